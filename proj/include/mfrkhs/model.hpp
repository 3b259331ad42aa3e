// Copyright 2026 The mfrkhs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Fitted regression model. Prediction evaluates the representer form
//   y_hat(x) = T sum_j [ sum_l theta_l g_l(x_j^(l), x^(l)) ] u_j
// against the retained training covariates.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mfrkhs/dataset.hpp"
#include "mfrkhs/errors.hpp"
#include "mfrkhs/funcspace.hpp"
#include "mfrkhs/kernels.hpp"
#include "mfrkhs/solver.hpp"

namespace mfrkhs {

/// Threshold above which theta_l counts as selected.
inline constexpr double kSelectionThreshold = 1e-8;

template <typename Scalar>
struct FitReport {
  int iterations = 0;
  Scalar final_objective = Scalar(0);
  bool converged = false;
  int inner_stalls = 0;
  std::vector<Scalar> objective_trace;
};

template <typename Scalar>
struct MfRkhsModel {
  std::vector<KernelSpec<Scalar>> specs;
  std::shared_ptr<const FiniteRankOperator<Scalar>> op;
  Vector<Scalar> theta;
  SampleSet<Scalar> u;
  std::vector<SampleSet<Scalar>> train_x;
  std::vector<std::string> names;
  FitConfig<Scalar> config;
  FitReport<Scalar> report;

  Eigen::Index n() const { return u.size(); }
  std::size_t p() const { return specs.size(); }

  void validate() const {
    if (!op) throw InvalidArgumentError("model has no operator");
    if (specs.empty()) throw InvalidArgumentError("model has no kernels");
    if (static_cast<std::size_t>(theta.size()) != specs.size() || train_x.size() != specs.size())
      throw InvalidArgumentError("model theta, kernels and covariates disagree on p");
    for (Eigen::Index l = 0; l < theta.size(); ++l)
      if (!(theta[l] >= Scalar(0))) throw InvalidArgumentError("model theta must be nonnegative");
    for (const auto& x : train_x)
      if (x.size() != u.size()) throw InvalidArgumentError("model covariates and u disagree on n");
    detail::require_same_grid(u.grid_ptr(), op->grid_ptr(), "model u");
  }
};

template <typename Scalar>
MfRkhsModel<Scalar> fit(const Dataset<Scalar>& data, std::vector<KernelSpec<Scalar>> specs,
                        std::shared_ptr<const FiniteRankOperator<Scalar>> op, const FitConfig<Scalar>& cfg) {
  const Problem<Scalar> prob(data, std::move(specs), std::move(op));
  SolverState<Scalar> state = fit_bcd(prob, cfg);
  FitReport<Scalar> report{state.iterations,
                           state.objective_trace.empty() ? Scalar(0) : state.objective_trace.back(),
                           state.converged, state.inner_stalls, std::move(state.objective_trace)};
  return MfRkhsModel<Scalar>{prob.specs(), prob.op_ptr(), std::move(state.theta), std::move(state.u),
                             data.covariates, data.names.empty() ? default_names(data.p()) : data.names,
                             cfg, std::move(report)};
}

/// Kernel weights c(j, m) = sum_l theta_l g_l(x_j^(l), z_m^(l)) between training and new points.
template <typename Scalar>
Matrix<Scalar> kernel_weights(const MfRkhsModel<Scalar>& model, std::span<const SampleSet<Scalar>> x_new) {
  if (x_new.size() != model.p())
    throw InvalidArgumentError("predict: " + std::to_string(x_new.size()) + " covariates, model has " +
                               std::to_string(model.p()));
  Matrix<Scalar> c = Matrix<Scalar>::Zero(model.n(), x_new.front().size());
  for (std::size_t l = 0; l < model.p(); ++l) {
    if (x_new[l].size() != x_new.front().size()) throw InvalidArgumentError("predict: covariate counts differ");
    detail::require_same_grid(model.train_x[l].grid_ptr(), x_new[l].grid_ptr(), "predict");
    const Scalar t = model.theta[static_cast<Eigen::Index>(l)];
    if (t != Scalar(0)) c += t * cross_gram(model.specs[l], model.train_x[l], x_new[l]);
  }
  return c;
}

/// Predictions for a batch: covariate l of new sample m is row m of x_new[l].
template <typename Scalar>
SampleSet<Scalar> predict_all(const MfRkhsModel<Scalar>& model, std::span<const SampleSet<Scalar>> x_new) {
  const Matrix<Scalar> c = kernel_weights(model, x_new);
  return SampleSet<Scalar>(model.op->grid_ptr(), model.op->apply_rows(c.transpose() * model.u.values()));
}

template <typename Scalar>
FunctionSample<Scalar> predict(const MfRkhsModel<Scalar>& model, std::span<const FunctionSample<Scalar>> x_new) {
  std::vector<SampleSet<Scalar>> sets;
  sets.reserve(x_new.size());
  for (const auto& x : x_new) sets.push_back(SampleSet<Scalar>::from_samples(std::span(&x, 1)));
  return predict_all<Scalar>(model, sets)[0];
}

/// 1-based numbers of the covariates with theta_l above the selection threshold.
template <typename Scalar>
std::vector<int> selected_variables(const MfRkhsModel<Scalar>& model) {
  std::vector<int> out;
  for (Eigen::Index l = 0; l < model.theta.size(); ++l)
    if (model.theta[l] > Scalar(kSelectionThreshold)) out.push_back(static_cast<int>(l) + 1);
  return out;
}

/// (1/n) sum_i ||y_hat_i - y_i||^2 over the dataset.
template <typename Scalar>
Scalar evaluate_mse(const MfRkhsModel<Scalar>& model, const Dataset<Scalar>& data) {
  data.validate();
  detail::require_same_grid(model.op->grid_ptr(), data.responses.grid_ptr(), "evaluate_mse");
  const SampleSet<Scalar> yhat = predict_all<Scalar>(model, data.covariates);
  const Matrix<Scalar> resid = yhat.values() - data.responses.values();
  return (resid.array().square().matrix() * data.responses.grid().weights()).sum() / Scalar(data.n());
}

/// Same predictions, different representative of the scale class: (c u, theta / c).
template <typename Scalar>
MfRkhsModel<Scalar> rescaled(const MfRkhsModel<Scalar>& model, Scalar c) {
  if (!(c > Scalar(0))) throw InvalidArgumentError("rescale factor must be positive");
  MfRkhsModel<Scalar> out = model;
  out.u = SampleSet<Scalar>(model.u.grid_ptr(), c * model.u.values());
  out.theta = model.theta / c;
  return out;
}

}  // namespace mfrkhs
