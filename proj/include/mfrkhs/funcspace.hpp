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

// Discretized L2 spaces on rectangular domains. A Grid is a tensor product of
// strictly increasing axes carrying composite trapezoid weights; functions are
// stored as their nodal values in row-major order (last axis fastest).

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mfrkhs/errors.hpp"

namespace mfrkhs {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
class Grid {
 public:
  using VectorType = Vector<Scalar>;

  /// Validates the axes and builds tensor-product trapezoid weights.
  explicit Grid(std::vector<VectorType> axes) : axes_(std::move(axes)) {
    if (axes_.empty()) throw InvalidGridError("grid needs at least one axis");
    Eigen::Index count = 1;
    for (std::size_t a = 0; a < axes_.size(); ++a) {
      const VectorType& x = axes_[a];
      if (x.size() < 2)
        throw InvalidGridError("axis " + std::to_string(a) + " has fewer than 2 points");
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        if (!std::isfinite(static_cast<double>(x[k])))
          throw InvalidGridError("axis " + std::to_string(a) + " has a non-finite coordinate");
        if (k > 0 && !(x[k] > x[k - 1]))
          throw InvalidGridError("axis " + std::to_string(a) + " is not strictly increasing at index " +
                                 std::to_string(k));
      }
      count *= x.size();
    }

    weights_ = VectorType::Ones(count);
    Eigen::Index stride = count;
    for (const VectorType& x : axes_) {
      const VectorType w = trapezoid_weights(x);
      stride /= x.size();
      for (Eigen::Index k = 0; k < count; ++k) weights_[k] *= w[(k / stride) % x.size()];
    }
    measure_ = weights_.sum();
  }

  static VectorType trapezoid_weights(const VectorType& x) {
    const Eigen::Index m = x.size();
    VectorType w(m);
    w[0] = (x[1] - x[0]) / Scalar(2);
    w[m - 1] = (x[m - 1] - x[m - 2]) / Scalar(2);
    for (Eigen::Index k = 1; k + 1 < m; ++k) w[k] = (x[k + 1] - x[k - 1]) / Scalar(2);
    return w;
  }

  const std::vector<VectorType>& axes() const { return axes_; }
  const VectorType& axis(std::size_t a) const { return axes_[a]; }
  const VectorType& weights() const { return weights_; }
  Eigen::Index node_count() const { return weights_.size(); }
  std::size_t dim() const { return axes_.size(); }
  Scalar measure() const { return measure_; }

  /// Per-axis index of flat node `k`.
  std::vector<Eigen::Index> multi_index(Eigen::Index k) const {
    std::vector<Eigen::Index> idx(axes_.size());
    for (std::size_t a = axes_.size(); a-- > 0;) {
      idx[a] = k % axes_[a].size();
      k /= axes_[a].size();
    }
    return idx;
  }

  bool operator==(const Grid& other) const {
    if (axes_.size() != other.axes_.size()) return false;
    for (std::size_t a = 0; a < axes_.size(); ++a)
      if (axes_[a].size() != other.axes_[a].size() || axes_[a] != other.axes_[a]) return false;
    return true;
  }

 private:
  std::vector<VectorType> axes_;
  VectorType weights_;
  Scalar measure_{};
};

template <typename Scalar>
using GridPtr = std::shared_ptr<const Grid<Scalar>>;

template <typename Scalar>
GridPtr<Scalar> make_grid(std::vector<Vector<Scalar>> axes) {
  return std::make_shared<const Grid<Scalar>>(std::move(axes));
}

/// `points` equally spaced coordinates on [lo, hi], endpoints exact.
template <typename Scalar>
Vector<Scalar> uniform_axis(Eigen::Index points, Scalar lo = Scalar(0), Scalar hi = Scalar(1)) {
  if (points < 2) throw InvalidGridError("uniform axis needs at least 2 points");
  Vector<Scalar> x(points);
  for (Eigen::Index k = 0; k < points; ++k)
    x[k] = lo + (hi - lo) * static_cast<Scalar>(k) / static_cast<Scalar>(points - 1);
  x[points - 1] = hi;
  return x;
}

/// Uniform grid over the unit cube [0,1]^d with the same point count on every axis.
template <typename Scalar>
GridPtr<Scalar> unit_cube_grid(std::size_t dim, Eigen::Index points_per_axis) {
  return make_grid<Scalar>(std::vector<Vector<Scalar>>(dim, uniform_axis<Scalar>(points_per_axis)));
}

template <typename Scalar>
bool same_grid(const GridPtr<Scalar>& a, const GridPtr<Scalar>& b) {
  return a == b || (a && b && *a == *b);
}

template <typename Scalar>
class FunctionSample {
 public:
  using VectorType = Vector<Scalar>;

  FunctionSample(GridPtr<Scalar> grid, VectorType values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw InvalidArgumentError("function sample needs a grid");
    if (values_.size() != grid_->node_count())
      throw InvalidArgumentError("function sample has " + std::to_string(values_.size()) + " values, grid has " +
                                 std::to_string(grid_->node_count()) + " nodes");
    if (!values_.allFinite()) throw NumericalError("function sample contains non-finite values");
  }

  static FunctionSample zeros(GridPtr<Scalar> grid) {
    const auto n = grid->node_count();
    return FunctionSample(std::move(grid), VectorType::Zero(n));
  }

  const Grid<Scalar>& grid() const { return *grid_; }
  const GridPtr<Scalar>& grid_ptr() const { return grid_; }
  const VectorType& values() const { return values_; }

 private:
  GridPtr<Scalar> grid_;
  VectorType values_;
};

/// Evaluates `fn(coords)` at every node, coords being a span of length dim().
template <typename Scalar, typename Fn>
FunctionSample<Scalar> tabulate(const GridPtr<Scalar>& grid, Fn&& fn) {
  Vector<Scalar> values(grid->node_count());
  std::vector<Scalar> coords(grid->dim());
  for (Eigen::Index k = 0; k < grid->node_count(); ++k) {
    const auto idx = grid->multi_index(k);
    for (std::size_t a = 0; a < grid->dim(); ++a) coords[a] = grid->axis(a)[idx[a]];
    values[k] = fn(std::span<const Scalar>(coords));
  }
  return FunctionSample<Scalar>(grid, std::move(values));
}

namespace detail {

template <typename Scalar>
void require_same_grid(const GridPtr<Scalar>& a, const GridPtr<Scalar>& b, const char* what) {
  if (!same_grid(a, b)) throw GridMismatchError(std::string(what) + ": samples live on different grids");
}

}  // namespace detail

template <typename Scalar>
Scalar inner_product(const FunctionSample<Scalar>& f, const FunctionSample<Scalar>& g) {
  detail::require_same_grid(f.grid_ptr(), g.grid_ptr(), "inner_product");
  return (f.grid().weights().array() * f.values().array() * g.values().array()).sum();
}

template <typename Scalar>
Scalar norm_sq(const FunctionSample<Scalar>& f) {
  return (f.grid().weights().array() * f.values().array().square()).sum();
}

template <typename Scalar>
FunctionSample<Scalar> linear_combine(std::span<const Scalar> coeffs, std::span<const FunctionSample<Scalar>> fs) {
  if (fs.empty()) throw InvalidArgumentError("linear_combine: empty sample list");
  if (coeffs.size() != fs.size()) throw InvalidArgumentError("linear_combine: coefficient count mismatch");
  Vector<Scalar> acc = Vector<Scalar>::Zero(fs.front().values().size());
  for (std::size_t j = 0; j < fs.size(); ++j) {
    detail::require_same_grid(fs.front().grid_ptr(), fs[j].grid_ptr(), "linear_combine");
    acc += coeffs[j] * fs[j].values();
  }
  return FunctionSample<Scalar>(fs.front().grid_ptr(), std::move(acc));
}

/// n functions on one grid, stored as the rows of an n x node_count matrix.
template <typename Scalar>
class SampleSet {
 public:
  using MatrixType = Matrix<Scalar>;

  SampleSet(GridPtr<Scalar> grid, MatrixType values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw InvalidArgumentError("sample set needs a grid");
    if (values_.cols() != grid_->node_count())
      throw InvalidArgumentError("sample set rows have " + std::to_string(values_.cols()) + " values, grid has " +
                                 std::to_string(grid_->node_count()) + " nodes");
    if (!values_.allFinite()) throw NumericalError("sample set contains non-finite values");
  }

  static SampleSet zeros(GridPtr<Scalar> grid, Eigen::Index count) {
    const auto nodes = grid->node_count();
    return SampleSet(std::move(grid), MatrixType::Zero(count, nodes));
  }

  static SampleSet from_samples(std::span<const FunctionSample<Scalar>> samples) {
    if (samples.empty()) throw InvalidArgumentError("sample set needs at least one sample");
    MatrixType values(static_cast<Eigen::Index>(samples.size()), samples.front().values().size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      detail::require_same_grid(samples.front().grid_ptr(), samples[i].grid_ptr(), "SampleSet");
      values.row(static_cast<Eigen::Index>(i)) = samples[i].values().transpose();
    }
    return SampleSet(samples.front().grid_ptr(), std::move(values));
  }

  Eigen::Index size() const { return values_.rows(); }
  const Grid<Scalar>& grid() const { return *grid_; }
  const GridPtr<Scalar>& grid_ptr() const { return grid_; }
  const MatrixType& values() const { return values_; }

  FunctionSample<Scalar> operator[](Eigen::Index i) const {
    return FunctionSample<Scalar>(grid_, values_.row(i).transpose());
  }

  std::vector<FunctionSample<Scalar>> samples() const {
    std::vector<FunctionSample<Scalar>> out;
    out.reserve(static_cast<std::size_t>(size()));
    for (Eigen::Index i = 0; i < size(); ++i) out.push_back((*this)[i]);
    return out;
  }

 private:
  GridPtr<Scalar> grid_;
  MatrixType values_;
};

/// Gram matrix of L2 inner products between the rows of `a` and `b` (same grid).
template <typename Scalar>
Matrix<Scalar> inner_products(const SampleSet<Scalar>& a, const SampleSet<Scalar>& b) {
  detail::require_same_grid(a.grid_ptr(), b.grid_ptr(), "inner_products");
  return a.values() * a.grid().weights().asDiagonal() * b.values().transpose();
}

}  // namespace mfrkhs
