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

// Estimation of (u, theta) for the lasso-penalized multivariate functional RKHS
// regression
//
//   q(u, theta) = sum_i || y_i - sum_l sum_j theta_l g_l(x_j, x_i) T u_j ||^2
//               + lambda1 sum_l theta_l sum_{i,j} g_l(x_i, x_j) <T u_i, u_j>
//               + lambda2 sum_l theta_l
//
// by block coordinate descent: a closed-form u-step through the eigenpairs of
// G_theta and T, then a nonnegative conjugate-gradient theta-step.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfrkhs/dataset.hpp"
#include "mfrkhs/errors.hpp"
#include "mfrkhs/funcspace.hpp"
#include "mfrkhs/kernels.hpp"

namespace mfrkhs {

template <typename Scalar>
struct FitConfig {
  Scalar lambda1 = Scalar(0.1);
  Scalar lambda2 = Scalar(0.4);
  Scalar bcd_tol = Scalar(1e-6);
  int bcd_max_iters = 200;
  Scalar cg_tol = Scalar(1e-8);
  int cg_max_iters = 500;
  Scalar backtrack_rho = Scalar(0.5);
  int backtrack_max = 50;
  std::optional<Vector<Scalar>> theta_init;  // unset: all ones

  void validate() const {
    if (!(lambda1 > Scalar(0))) throw InvalidArgumentError("lambda1 must be positive");
    if (!(lambda2 >= Scalar(0))) throw InvalidArgumentError("lambda2 must be nonnegative");
    if (!(bcd_tol > Scalar(0)) || !(cg_tol > Scalar(0))) throw InvalidArgumentError("tolerances must be positive");
    if (bcd_max_iters < 1 || cg_max_iters < 1 || backtrack_max < 1)
      throw InvalidArgumentError("iteration limits must be positive");
    if (!(backtrack_rho > Scalar(0) && backtrack_rho < Scalar(1)))
      throw InvalidArgumentError("backtrack_rho must lie in (0, 1)");
    if (theta_init) {
      for (Eigen::Index l = 0; l < theta_init->size(); ++l)
        if (!((*theta_init)[l] >= Scalar(0)) || !std::isfinite(static_cast<double>((*theta_init)[l])))
          throw InvalidArgumentError("theta_init must be finite and nonnegative");
    }
  }
};

/// Validated data with the per-covariate Gram matrices computed once.
template <typename Scalar>
class Problem {
 public:
  using OperatorPtr = std::shared_ptr<const FiniteRankOperator<Scalar>>;

  Problem(const Dataset<Scalar>& data, std::vector<KernelSpec<Scalar>> specs, OperatorPtr op)
      : responses_(data.responses), specs_(std::move(specs)), op_(std::move(op)) {
    data.validate();
    if (!op_) throw InvalidArgumentError("problem needs an operator");
    if (!same_grid(responses_.grid_ptr(), op_->grid_ptr()))
      throw GridMismatchError("responses and operator live on different grids");
    grams_ = gram_matrices<Scalar>(specs_, data.covariates);
    for (std::size_t l = 0; l < grams_.size(); ++l)
      if (!grams_[l].allFinite()) throw NumericalError("Gram matrix " + std::to_string(l) + " is not finite");
  }

  Eigen::Index n() const { return responses_.size(); }
  Eigen::Index p() const { return static_cast<Eigen::Index>(grams_.size()); }
  const SampleSet<Scalar>& responses() const { return responses_; }
  const std::vector<Matrix<Scalar>>& grams() const { return grams_; }
  const std::vector<KernelSpec<Scalar>>& specs() const { return specs_; }
  const FiniteRankOperator<Scalar>& op() const { return *op_; }
  const OperatorPtr& op_ptr() const { return op_; }
  const Vector<Scalar>& weights() const { return responses_.grid().weights(); }

  void check_theta(const Vector<Scalar>& theta) const {
    if (theta.size() != p())
      throw InvalidArgumentError("theta has " + std::to_string(theta.size()) + " entries, expected " +
                                 std::to_string(p()));
    for (Eigen::Index l = 0; l < theta.size(); ++l)
      if (!(theta[l] >= Scalar(0)) || !std::isfinite(static_cast<double>(theta[l])))
        throw InvalidArgumentError("theta must be finite and nonnegative");
  }

  void check_u(const SampleSet<Scalar>& u) const {
    if (u.size() != n())
      throw InvalidArgumentError("u has " + std::to_string(u.size()) + " samples, expected " + std::to_string(n()));
    detail::require_same_grid(u.grid_ptr(), responses_.grid_ptr(), "u");
  }

  Matrix<Scalar> combined_gram(const Vector<Scalar>& theta) const {
    return combine_gram<Scalar>(grams_, theta);
  }

 private:
  SampleSet<Scalar> responses_;
  std::vector<KernelSpec<Scalar>> specs_;
  OperatorPtr op_;
  std::vector<Matrix<Scalar>> grams_;
};

/// Row i: sum_j G_theta(j, i) T u_j.
template <typename Scalar>
Matrix<Scalar> fitted_values(const Problem<Scalar>& prob, const SampleSet<Scalar>& u, const Vector<Scalar>& theta) {
  prob.check_u(u);
  prob.check_theta(theta);
  return prob.combined_gram(theta).transpose() * prob.op().apply_rows(u.values());
}

template <typename Scalar>
Scalar objective_q(const Problem<Scalar>& prob, const SampleSet<Scalar>& u, const Vector<Scalar>& theta,
                   Scalar lambda1, Scalar lambda2) {
  prob.check_u(u);
  prob.check_theta(theta);
  const auto& w = prob.weights();
  const Matrix<Scalar> gt = prob.combined_gram(theta);
  const Matrix<Scalar> tu = prob.op().apply_rows(u.values());
  const Matrix<Scalar> resid = prob.responses().values() - gt.transpose() * tu;
  const Scalar fit = (resid.array().square().matrix() * w).sum();
  // pairs(i, j) = <T u_i, u_j>
  const Matrix<Scalar> pairs = tu * w.asDiagonal() * u.values().transpose();
  const Scalar ridge = lambda1 * gt.cwiseProduct(pairs).sum();
  return fit + ridge + lambda2 * theta.sum();
}

/// Closed-form minimizer of q over u for fixed theta. With G_theta = V diag(beta) V^T
/// and T = sum_q delta_q w_q w_q^*:
///   u = sum_{p,q} (beta_p delta_q + lambda1)^{-1} (sum_j v_pj <w_q, y_j>) v_p w_q.
/// Equivalently (K_theta + lambda1 I) u = P y with P the projection onto span{w_q}.
template <typename Scalar>
SampleSet<Scalar> solve_u(const Problem<Scalar>& prob, const Vector<Scalar>& theta, Scalar lambda1) {
  if (!(lambda1 > Scalar(0))) throw InvalidArgumentError("solve_u: lambda1 must be positive");
  prob.check_theta(theta);
  const Matrix<Scalar> gt = prob.combined_gram(theta);
  if (!gt.allFinite()) throw NumericalError("solve_u: combined Gram matrix is not finite");

  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(gt);
  if (eig.info() != Eigen::Success) throw NumericalError("solve_u: eigendecomposition failed");
  Vector<Scalar> beta = eig.eigenvalues();
  const Matrix<Scalar>& v = eig.eigenvectors();
  const Scalar beta_max = std::max(beta.maxCoeff(), Scalar(0));
  for (Eigen::Index k = 0; k < beta.size(); ++k)
    if (beta[k] < Scalar(1e-12) * beta_max || beta[k] < Scalar(0)) beta[k] = Scalar(0);

  const auto& op = prob.op();
  // coeff(p, q) = sum_j v_pj <w_q, y_j>
  Matrix<Scalar> coeff = v.transpose() * op.coefficients(prob.responses().values());
  for (Eigen::Index q = 0; q < coeff.cols(); ++q)
    for (Eigen::Index pi = 0; pi < coeff.rows(); ++pi) coeff(pi, q) /= beta[pi] * op.eigenvalues()[q] + lambda1;
  return SampleSet<Scalar>(prob.responses().grid_ptr(), (v * coeff) * op.eigenfunctions());
}

/// h_u(theta) = theta^T Ktilde theta + (Dtilde + lambda2 1)^T theta + constant.
template <typename Scalar>
struct ThetaQuadratic {
  Matrix<Scalar> Ktilde;
  Vector<Scalar> Dtilde;
  Scalar lambda2 = Scalar(0);
  Scalar constant = Scalar(0);

  Eigen::Index size() const { return Dtilde.size(); }

  Vector<Scalar> linear_term() const { return Dtilde + Vector<Scalar>::Constant(size(), lambda2); }

  Scalar value(const Vector<Scalar>& theta) const {
    return theta.dot(Ktilde * theta) + linear_term().dot(theta) + constant;
  }

  Vector<Scalar> gradient(const Vector<Scalar>& theta) const {
    return Dtilde + Scalar(2) * (Ktilde * theta) + Vector<Scalar>::Constant(size(), lambda2);
  }

  void validate() const {
    if (Ktilde.rows() != size() || Ktilde.cols() != size())
      throw InvalidArgumentError("theta quadratic: Ktilde must be p x p");
    if (!Ktilde.allFinite() || !Dtilde.allFinite() || !std::isfinite(static_cast<double>(lambda2)))
      throw NumericalError("theta quadratic is not finite");
  }
};

template <typename Scalar>
ThetaQuadratic<Scalar> build_theta_quadratic(const Problem<Scalar>& prob, const SampleSet<Scalar>& u, Scalar lambda1,
                                             Scalar lambda2) {
  prob.check_u(u);
  const auto& w = prob.weights();
  const Eigen::Index p = prob.p();
  const Matrix<Scalar> tu = prob.op().apply_rows(u.values());
  // a[l] row i = sum_j g_l(x_j, x_i) T u_j
  std::vector<Matrix<Scalar>> a;
  a.reserve(static_cast<std::size_t>(p));
  for (const auto& g : prob.grams()) a.push_back(g.transpose() * tu);

  const Matrix<Scalar> lead = lambda1 * u.values() - Scalar(2) * prob.responses().values();
  ThetaQuadratic<Scalar> quad;
  quad.Ktilde.resize(p, p);
  quad.Dtilde.resize(p);
  quad.lambda2 = lambda2;
  for (Eigen::Index l = 0; l < p; ++l) {
    const auto& al = a[static_cast<std::size_t>(l)];
    quad.Dtilde[l] = (lead.cwiseProduct(al) * w).sum();
    for (Eigen::Index h = l; h < p; ++h)
      quad.Ktilde(l, h) = quad.Ktilde(h, l) = (al.cwiseProduct(a[static_cast<std::size_t>(h)]) * w).sum();
  }
  quad.constant = (prob.responses().values().array().square().matrix() * w).sum();
  return quad;
}

template <typename Scalar>
struct NncgStep {
  Scalar alpha;
  Scalar direction_norm_sq;
  Scalar decrease;  // h(theta_k) - h(theta_{k+1})
};

template <typename Scalar>
struct NncgResult {
  Vector<Scalar> theta;
  int iterations = 0;
  bool converged = false;
  bool stalled = false;
  std::vector<NncgStep<Scalar>> steps;
};

/// max over coordinates of the KKT violation for min h s.t. theta >= 0.
template <typename Scalar>
Scalar kkt_residual(const Vector<Scalar>& theta, const Vector<Scalar>& grad) {
  Scalar r = Scalar(0);
  for (Eigen::Index l = 0; l < theta.size(); ++l)
    r = std::max(r, theta[l] > Scalar(0) ? std::abs(grad[l]) : std::max(Scalar(0), -grad[l]));
  return r;
}

/// Nonnegative conjugate gradient for the theta quadratic. Boundary coordinates
/// follow the projected gradient; interior coordinates use the three-term modified
/// Polak-Ribiere-Polyak direction, restarted whenever the active set changes. Steps
/// are rho^j, capped at the ratio-test limit so that blocking coordinates land on
/// exact zero, and must satisfy h(theta + a d) <= h(theta) - a^2 ||d||^2.
template <typename Scalar>
NncgResult<Scalar> solve_theta_nncg(const ThetaQuadratic<Scalar>& quad, const Vector<Scalar>& theta0,
                                    const FitConfig<Scalar>& cfg) {
  quad.validate();
  const Eigen::Index p = quad.size();
  if (theta0.size() != p) throw InvalidArgumentError("solve_theta_nncg: theta0 has the wrong length");
  for (Eigen::Index l = 0; l < p; ++l)
    if (!(theta0[l] >= Scalar(0)) || !std::isfinite(static_cast<double>(theta0[l])))
      throw InvalidArgumentError("solve_theta_nncg: theta0 must be finite and nonnegative");

  NncgResult<Scalar> out;
  Vector<Scalar> theta = theta0.unaryExpr([](Scalar t) { return t == Scalar(0) ? Scalar(0) : t; });
  Vector<Scalar> grad = quad.gradient(theta);

  Vector<Scalar> grad_prev, dir_prev;
  std::vector<bool> active_prev;
  bool have_prev = false;

  for (int k = 0; k < cfg.cg_max_iters; ++k) {
    if (!grad.allFinite()) throw NumericalError("solve_theta_nncg: non-finite gradient");
    if (kkt_residual(theta, grad) <= cfg.cg_tol * (Scalar(1) + grad.norm())) {
      out.converged = true;
      break;
    }

    std::vector<bool> active(static_cast<std::size_t>(p));
    for (Eigen::Index l = 0; l < p; ++l) active[static_cast<std::size_t>(l)] = theta[l] == Scalar(0);

    Vector<Scalar> dir = Vector<Scalar>::Zero(p);
    for (Eigen::Index l = 0; l < p; ++l)
      if (active[static_cast<std::size_t>(l)]) dir[l] = grad[l] > Scalar(0) ? Scalar(0) : -grad[l];

    const Scalar prev_norm_sq = have_prev ? grad_prev.squaredNorm() : Scalar(0);
    const bool conjugate = have_prev && active == active_prev && prev_norm_sq > Scalar(0);
    Scalar slope_free = Scalar(0);
    if (conjugate) {
      Scalar g_gamma = 0, g_dprev = 0;
      for (Eigen::Index l = 0; l < p; ++l) {
        if (active[static_cast<std::size_t>(l)]) continue;
        g_gamma += grad[l] * (grad[l] - grad_prev[l]);
        g_dprev += grad[l] * dir_prev[l];
      }
      const Scalar beta = g_gamma / prev_norm_sq;
      const Scalar vartheta = g_dprev / prev_norm_sq;
      for (Eigen::Index l = 0; l < p; ++l) {
        if (active[static_cast<std::size_t>(l)]) continue;
        dir[l] = -grad[l] + beta * dir_prev[l] - vartheta * (grad[l] - grad_prev[l]);
        slope_free += grad[l] * dir[l];
      }
    }
    if (!conjugate || !(slope_free < Scalar(0))) {
      for (Eigen::Index l = 0; l < p; ++l)
        if (!active[static_cast<std::size_t>(l)]) dir[l] = -grad[l];
    }

    const Scalar dir_norm_sq = dir.squaredNorm();
    if (dir_norm_sq == Scalar(0)) {
      out.converged = true;
      break;
    }

    // Ratio test for the largest feasible step.
    Scalar alpha_max = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index l = 0; l < p; ++l)
      if (dir[l] < Scalar(0)) alpha_max = std::min(alpha_max, theta[l] / -dir[l]);

    const Scalar slope = grad.dot(dir);
    const Scalar curvature = dir.dot(quad.Ktilde * dir);
    Scalar alpha = Scalar(0);
    Scalar decrease = Scalar(0);
    bool accepted = false, capped = false, tried_cap = false;
    Scalar trial = Scalar(1);
    for (int j = 0; j < cfg.backtrack_max; ++j, trial *= cfg.backtrack_rho) {
      Scalar a = trial;
      bool at_cap = false;
      if (a >= alpha_max) {
        if (tried_cap) continue;
        a = alpha_max;
        at_cap = tried_cap = true;
      }
      if (!(a > Scalar(0))) break;
      const Scalar dec = -(a * slope + a * a * curvature);
      if (dec >= a * a * dir_norm_sq) {
        alpha = a;
        decrease = dec;
        capped = at_cap;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.stalled = true;
      break;
    }

    Vector<Scalar> next = theta + alpha * dir;
    for (Eigen::Index l = 0; l < p; ++l) {
      if (capped && dir[l] < Scalar(0) && theta[l] / -dir[l] == alpha_max) next[l] = Scalar(0);
      if (!(next[l] > Scalar(0))) next[l] = Scalar(0);
    }

    out.steps.push_back({alpha, dir_norm_sq, decrease});
    ++out.iterations;
    grad_prev = grad;
    dir_prev = dir;
    active_prev = std::move(active);
    have_prev = true;
    theta = std::move(next);
    grad = quad.gradient(theta);
  }
  out.theta = std::move(theta);
  return out;
}

template <typename Scalar>
struct SolverState {
  SampleSet<Scalar> u;
  Vector<Scalar> theta;
  std::vector<Scalar> objective_trace;
  int iterations = 0;
  bool converged = false;
  int inner_stalls = 0;  // theta-steps that ended on a backtracking failure
};

/// Alternates solve_u and solve_theta_nncg until |q_k - q_{k-1}| <= bcd_tol |q_{k-1}|
/// or bcd_max_iters. Hitting the iteration cap is reported, not raised.
template <typename Scalar>
SolverState<Scalar> fit_bcd(const Problem<Scalar>& prob, const FitConfig<Scalar>& cfg) {
  cfg.validate();
  Vector<Scalar> theta = cfg.theta_init ? *cfg.theta_init : Vector<Scalar>::Ones(prob.p());
  prob.check_theta(theta);

  SolverState<Scalar> state{SampleSet<Scalar>::zeros(prob.responses().grid_ptr(), prob.n()), theta, {}, 0, false, 0};
  for (int k = 0; k < cfg.bcd_max_iters; ++k) {
    state.u = solve_u(prob, state.theta, cfg.lambda1);
    const ThetaQuadratic<Scalar> quad = build_theta_quadratic(prob, state.u, cfg.lambda1, cfg.lambda2);
    NncgResult<Scalar> step = solve_theta_nncg(quad, state.theta, cfg);
    if (step.stalled) ++state.inner_stalls;
    state.theta = std::move(step.theta);
    const Scalar q = objective_q(prob, state.u, state.theta, cfg.lambda1, cfg.lambda2);
    if (!std::isfinite(static_cast<double>(q))) throw NumericalError("fit_bcd: objective is not finite");
    state.objective_trace.push_back(q);
    ++state.iterations;
    if (state.objective_trace.size() >= 2) {
      const Scalar prev = state.objective_trace[state.objective_trace.size() - 2];
      if (std::abs(q - prev) <= cfg.bcd_tol * std::abs(prev)) {
        state.converged = true;
        break;
      }
    }
  }
  return state;
}

/// Largest relative increase between consecutive trace entries (0 if nonincreasing).
template <typename Scalar>
Scalar max_trace_increase(std::span<const Scalar> trace) {
  Scalar worst = Scalar(0);
  for (std::size_t k = 1; k < trace.size(); ++k) {
    const Scalar scale = std::max(std::abs(trace[k - 1]), Scalar(1e-300));
    worst = std::max(worst, (trace[k] - trace[k - 1]) / scale);
  }
  return worst;
}

}  // namespace mfrkhs
