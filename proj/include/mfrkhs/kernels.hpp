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

// Scalar kernels g_l over covariate functions and the finite-rank operator T.
// Together they form the separable operator-valued kernel K_l(x, z) = g_l(x, z) T.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mfrkhs/errors.hpp"
#include "mfrkhs/funcspace.hpp"

namespace mfrkhs {

enum class KernelFamily { gaussian, cauchy, exponential };

inline std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::cauchy: return "cauchy";
    case KernelFamily::exponential: return "exponential";
  }
  return "unknown";
}

inline KernelFamily kernel_family_from_string(std::string_view name) {
  if (name == "gaussian") return KernelFamily::gaussian;
  if (name == "cauchy") return KernelFamily::cauchy;
  if (name == "exponential") return KernelFamily::exponential;
  throw InvalidArgumentError("unknown kernel family '" + std::string(name) + "'");
}

template <typename Scalar>
struct KernelSpec {
  KernelFamily family = KernelFamily::gaussian;
  Scalar bandwidth = Scalar(1);

  KernelSpec() = default;
  KernelSpec(KernelFamily f, Scalar sigma_g) : family(f), bandwidth(sigma_g) {
    if (!(bandwidth > Scalar(0)) || !std::isfinite(static_cast<double>(bandwidth)))
      throw InvalidArgumentError("kernel bandwidth must be positive");
  }

  /// Kernel value from the squared L2 distance between two covariate functions.
  /// The exponential family uses the unsquared distance over sigma_g^2.
  Scalar from_sq_distance(Scalar d2) const {
    const Scalar s2 = bandwidth * bandwidth;
    d2 = d2 < Scalar(0) ? Scalar(0) : d2;
    switch (family) {
      case KernelFamily::gaussian: return std::exp(-d2 / s2);
      case KernelFamily::cauchy: return Scalar(1) / (Scalar(1) + d2 / s2);
      case KernelFamily::exponential: return std::exp(-std::sqrt(d2) / s2);
    }
    return Scalar(0);
  }

  bool operator==(const KernelSpec&) const = default;
};

template <typename Scalar>
Scalar scalar_kernel(const KernelSpec<Scalar>& spec, const FunctionSample<Scalar>& x, const FunctionSample<Scalar>& z) {
  detail::require_same_grid(x.grid_ptr(), z.grid_ptr(), "scalar_kernel");
  const Scalar d2 = (x.grid().weights().array() * (x.values() - z.values()).array().square()).sum();
  return spec.from_sq_distance(d2);
}

/// Gram matrix of one kernel against two sets of covariate samples: entry (i, j) = g(a_i, b_j).
template <typename Scalar>
Matrix<Scalar> cross_gram(const KernelSpec<Scalar>& spec, const SampleSet<Scalar>& a, const SampleSet<Scalar>& b) {
  detail::require_same_grid(a.grid_ptr(), b.grid_ptr(), "cross_gram");
  const auto& w = a.grid().weights();
  Matrix<Scalar> g(a.size(), b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j)
      g(i, j) = spec.from_sq_distance((w.transpose().array() * (a.values().row(i) - b.values().row(j)).array().square()).sum());
  return g;
}

/// Symmetric Gram matrix with an exact unit diagonal.
template <typename Scalar>
Matrix<Scalar> gram(const KernelSpec<Scalar>& spec, const SampleSet<Scalar>& x) {
  const auto& w = x.grid().weights();
  const Eigen::Index n = x.size();
  Matrix<Scalar> g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g(i, i) = spec.from_sq_distance(Scalar(0));
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Scalar d2 = (w.transpose().array() * (x.values().row(i) - x.values().row(j)).array().square()).sum();
      g(i, j) = g(j, i) = spec.from_sq_distance(d2);
    }
  }
  return g;
}

template <typename Scalar>
std::vector<Matrix<Scalar>> gram_matrices(std::span<const KernelSpec<Scalar>> specs,
                                          std::span<const SampleSet<Scalar>> covariates) {
  if (covariates.empty()) throw InvalidArgumentError("gram_matrices: no covariates");
  if (specs.size() != covariates.size())
    throw InvalidArgumentError("gram_matrices: " + std::to_string(specs.size()) + " kernel specs for " +
                               std::to_string(covariates.size()) + " covariates");
  const Eigen::Index n = covariates.front().size();
  if (n == 0) throw InvalidArgumentError("gram_matrices: empty data");
  std::vector<Matrix<Scalar>> out;
  out.reserve(covariates.size());
  for (std::size_t l = 0; l < covariates.size(); ++l) {
    if (covariates[l].size() != n)
      throw InvalidArgumentError("gram_matrices: covariate " + std::to_string(l) + " has " +
                                 std::to_string(covariates[l].size()) + " samples, expected " + std::to_string(n));
    out.push_back(gram(specs[l], covariates[l]));
  }
  return out;
}

/// G_theta = sum_l theta_l G_l.
template <typename Scalar>
Matrix<Scalar> combine_gram(std::span<const Matrix<Scalar>> grams, const Vector<Scalar>& theta) {
  if (grams.empty()) throw InvalidArgumentError("combine_gram: no matrices");
  if (static_cast<std::size_t>(theta.size()) != grams.size())
    throw InvalidArgumentError("combine_gram: theta has " + std::to_string(theta.size()) + " entries for " +
                               std::to_string(grams.size()) + " matrices");
  Matrix<Scalar> out = Matrix<Scalar>::Zero(grams.front().rows(), grams.front().cols());
  for (std::size_t l = 0; l < grams.size(); ++l) {
    const Scalar t = theta[static_cast<Eigen::Index>(l)];
    if (!(t >= Scalar(0))) throw InvalidArgumentError("combine_gram: theta must be nonnegative");
    if (grams[l].rows() != out.rows() || grams[l].cols() != out.cols())
      throw InvalidArgumentError("combine_gram: matrix shapes differ");
    if (t != Scalar(0)) out += t * grams[l];
  }
  return out;
}

/// Compact self-adjoint operator of finite rank on the response space, stored
/// spectrally: T u = sum_q delta_q <w_q, u> w_q with orthonormal w_q.
template <typename Scalar>
class FiniteRankOperator {
 public:
  static constexpr double kOrthonormalityTol = 1e-6;

  /// `eigenfunctions` holds one w_q per row. Validates positivity and orthonormality.
  FiniteRankOperator(GridPtr<Scalar> grid, Vector<Scalar> eigenvalues, Matrix<Scalar> eigenfunctions)
      : grid_(std::move(grid)), eigenvalues_(std::move(eigenvalues)), eigenfunctions_(std::move(eigenfunctions)) {
    if (!grid_) throw InvalidArgumentError("operator needs a grid");
    if (eigenvalues_.size() < 1) throw InvalidArgumentError("operator rank must be at least 1");
    if (eigenfunctions_.rows() != eigenvalues_.size() || eigenfunctions_.cols() != grid_->node_count())
      throw InvalidArgumentError("operator eigenfunctions must be rank x node_count");
    if (!eigenvalues_.allFinite() || !eigenfunctions_.allFinite())
      throw NumericalError("operator spectral data is not finite");
    for (Eigen::Index q = 0; q < eigenvalues_.size(); ++q)
      if (!(eigenvalues_[q] > Scalar(0)))
        throw InvalidArgumentError("operator eigenvalue " + std::to_string(q) + " is not positive");
    const Scalar err = orthonormality_error();
    if (!(err <= Scalar(kOrthonormalityTol)))
      throw ResolutionError("operator eigenfunctions are not orthonormal on the grid (max deviation " +
                            std::to_string(static_cast<double>(err)) + ")");
  }

  const Grid<Scalar>& grid() const { return *grid_; }
  const GridPtr<Scalar>& grid_ptr() const { return grid_; }
  Eigen::Index rank() const { return eigenvalues_.size(); }
  const Vector<Scalar>& eigenvalues() const { return eigenvalues_; }
  const Matrix<Scalar>& eigenfunctions() const { return eigenfunctions_; }
  FunctionSample<Scalar> eigenfunction(Eigen::Index q) const {
    return FunctionSample<Scalar>(grid_, eigenfunctions_.row(q).transpose());
  }

  /// max_{q,r} |<w_q, w_r> - 1{q=r}|
  Scalar orthonormality_error() const {
    const Matrix<Scalar> m = eigenfunctions_ * grid_->weights().asDiagonal() * eigenfunctions_.transpose();
    return (m - Matrix<Scalar>::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
  }

  /// Row i of the result holds <w_q, v_i> for the rows v_i of `values`.
  Matrix<Scalar> coefficients(const Matrix<Scalar>& values) const {
    return values * grid_->weights().asDiagonal() * eigenfunctions_.transpose();
  }

  /// Applies T to every row of `values`.
  Matrix<Scalar> apply_rows(const Matrix<Scalar>& values) const {
    return (coefficients(values) * eigenvalues_.asDiagonal()) * eigenfunctions_;
  }

  /// Orthogonal projection of every row of `values` onto span{w_q}.
  Matrix<Scalar> project_rows(const Matrix<Scalar>& values) const {
    return coefficients(values) * eigenfunctions_;
  }

 private:
  GridPtr<Scalar> grid_;
  Vector<Scalar> eigenvalues_;
  Matrix<Scalar> eigenfunctions_;
};

template <typename Scalar>
FunctionSample<Scalar> operator_apply(const FiniteRankOperator<Scalar>& op, const FunctionSample<Scalar>& u) {
  detail::require_same_grid(op.grid_ptr(), u.grid_ptr(), "operator_apply");
  const Matrix<Scalar> row = op.apply_rows(u.values().transpose());
  return FunctionSample<Scalar>(op.grid_ptr(), row.row(0).transpose());
}

template <typename Scalar>
SampleSet<Scalar> operator_apply(const FiniteRankOperator<Scalar>& op, const SampleSet<Scalar>& u) {
  detail::require_same_grid(op.grid_ptr(), u.grid_ptr(), "operator_apply");
  return SampleSet<Scalar>(op.grid_ptr(), op.apply_rows(u.values()));
}

/// Projection onto tensor products of sin(2 pi h t) on [0,1]^d with h = 1..counts[a] on
/// axis a. Eigenfunctions are the L2-normalized tensor sines (ordered row-major over
/// the frequency multi-index), eigenvalues 2^-d, which reproduces the unnormalized
/// projection T u = sum_h <b_h, u> b_h exactly.
template <typename Scalar>
FiniteRankOperator<Scalar> make_sine_projection(std::span<const int> counts, const GridPtr<Scalar>& grid) {
  if (!grid) throw InvalidArgumentError("make_sine_projection: null grid");
  if (counts.size() != grid->dim())
    throw InvalidArgumentError("make_sine_projection: " + std::to_string(counts.size()) + " counts for a " +
                               std::to_string(grid->dim()) + "-d grid");
  Eigen::Index rank = 1;
  for (std::size_t a = 0; a < counts.size(); ++a) {
    if (counts[a] < 1) throw InvalidArgumentError("make_sine_projection: counts must be positive");
    const auto& x = grid->axis(a);
    if (std::abs(static_cast<double>(x[0])) > 1e-12 || std::abs(static_cast<double>(x[x.size() - 1]) - 1.0) > 1e-12)
      throw InvalidArgumentError("make_sine_projection: grid must span [0,1] on every axis");
    if (x.size() < 2 * static_cast<Eigen::Index>(counts[a]) + 1)
      throw ResolutionError("make_sine_projection: axis " + std::to_string(a) + " has " + std::to_string(x.size()) +
                            " points, frequency " + std::to_string(counts[a]) + " needs at least " +
                            std::to_string(2 * counts[a] + 1));
    rank *= counts[a];
  }

  const auto d = static_cast<int>(counts.size());
  const Scalar scale = std::pow(Scalar(2), Scalar(d) / Scalar(2));
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;

  // Per-axis tables of sin(2 pi h t_k).
  std::vector<Matrix<Scalar>> tables;
  for (std::size_t a = 0; a < counts.size(); ++a) {
    const auto& x = grid->axis(a);
    Matrix<Scalar> t(counts[a], x.size());
    for (int h = 0; h < counts[a]; ++h)
      for (Eigen::Index k = 0; k < x.size(); ++k) t(h, k) = std::sin(two_pi * Scalar(h + 1) * x[k]);
    tables.push_back(std::move(t));
  }

  Matrix<Scalar> w(rank, grid->node_count());
  std::vector<int> freq(counts.size());
  for (Eigen::Index q = 0; q < rank; ++q) {
    Eigen::Index rem = q;
    for (std::size_t a = counts.size(); a-- > 0;) {
      freq[a] = static_cast<int>(rem % counts[a]);
      rem /= counts[a];
    }
    for (Eigen::Index k = 0; k < grid->node_count(); ++k) {
      const auto idx = grid->multi_index(k);
      Scalar v = scale;
      for (std::size_t a = 0; a < counts.size(); ++a) v *= tables[a](freq[a], idx[a]);
      w(q, k) = v;
    }
  }
  const Vector<Scalar> delta = Vector<Scalar>::Constant(rank, std::pow(Scalar(2), Scalar(-d)));
  return FiniteRankOperator<Scalar>(grid, delta, std::move(w));
}

template <typename Scalar>
FiniteRankOperator<Scalar> make_sine_projection(std::initializer_list<int> counts, const GridPtr<Scalar>& grid) {
  const std::vector<int> c(counts);
  return make_sine_projection<Scalar>(std::span<const int>(c), grid);
}

}  // namespace mfrkhs
