#pragma once

// Weighted L^2 spaces on a grid and the brute-force oracles (dense matrix
// realization, weighted adjoint) every closed-form operator is checked
// against.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "tsfact/error.hpp"
#include "tsfact/grid.hpp"
#include "tsfact/matrix.hpp"

namespace tsfact {

using Complex = std::complex<double>;
/// Complex values sampled on the points of a grid (one per point).
using GridFunction = std::vector<Complex>;
/// Real values sampled on the points of a grid (one per point).
using RealFunction = std::vector<double>;

inline GridFunction to_complex(const RealFunction& f) {
  return GridFunction(f.begin(), f.end());
}

inline RealFunction real_part(const GridFunction& f) {
  RealFunction r(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) r[i] = f[i].real();
  return r;
}

/// L^2(T, rho mu_Delta) restricted to a window: functions on the grid, of
/// which only the values on T^k enter the inner product.
class WeightedSpace {
public:
  WeightedSpace() = default;

  WeightedSpace(TimeScaleGrid grid, RealFunction weight, int level_index = 0)
      : grid_(std::move(grid)), weight_(std::move(weight)), level_(level_index) {
    if (weight_.size() == grid_.size() - 1) weight_.push_back(0.0);
    if (weight_.size() != grid_.size())
      throw SpaceError("weight has " + std::to_string(weight_.size()) +
                       " values for a grid of " + std::to_string(grid_.size()) +
                       " points");
    gram_.assign(grid_.size(), 0.0);
    for (std::size_t i = 0; grid_.in_kappa(i); ++i) {
      if (!(weight_[i] > 0.0) || !std::isfinite(weight_[i]))
        throw PointError("weight must be strictly positive on T^k", i, grid_[i]);
      gram_[i] = weight_[i] * grid_.graininess(i);
    }
  }

  /// Unit weight on the grid.
  static WeightedSpace unit(const TimeScaleGrid& grid, int level_index = 0) {
    return WeightedSpace(grid, RealFunction(grid.size(), 1.0), level_index);
  }

  const TimeScaleGrid& grid() const noexcept { return grid_; }
  const RealFunction& weight() const noexcept { return weight_; }
  int level() const noexcept { return level_; }
  std::size_t size() const noexcept { return grid_.size(); }

  /// Diagonal Gram weights rho(x) mu(x); zero at the top point.
  const RealFunction& gram_weights() const noexcept { return gram_; }

private:
  TimeScaleGrid grid_;
  RealFunction weight_;
  RealFunction gram_;
  int level_ = 0;
};

/// <psi|phi> = sum over T^k of conj(psi) phi rho mu.
inline Complex inner_product(const GridFunction& psi, const GridFunction& phi,
                             const WeightedSpace& space) {
  if (psi.size() != space.size() || phi.size() != space.size())
    throw SpaceError("inner_product: function length does not match the grid");
  Complex s = 0.0;
  const auto& d = space.gram_weights();
  for (std::size_t i = 0; space.grid().in_kappa(i); ++i)
    s += std::conj(psi[i]) * phi[i] * d[i];
  return s;
}

inline double norm(const GridFunction& psi, const WeightedSpace& space) {
  return std::sqrt(std::max(0.0, inner_product(psi, psi, space).real()));
}

/// Banded operator between two weighted spaces in the point basis.
///
/// Row i of the target reads source entries i-2 .. i+2; coefficient arrays
/// are indexed by target row. Source and target grids must share a prefix
/// (successive chain levels drop top points).
class LinearOperator {
public:
  static constexpr int max_offset = 2;
  static constexpr std::size_t band_count = 2 * max_offset + 1;

  LinearOperator() = default;

  LinearOperator(WeightedSpace source, WeightedSpace target)
      : source_(std::move(source)), target_(std::move(target)) {
    if (!source_.grid().has_prefix(target_.grid()) &&
        !target_.grid().has_prefix(source_.grid()))
      throw SpaceError("operator spaces live on unrelated grids");
    for (auto& b : band_) b.assign(target_.size(), 0.0);
  }

  const WeightedSpace& source() const noexcept { return source_; }
  const WeightedSpace& target() const noexcept { return target_; }

  RealFunction& band(int offset) { return band_.at(slot(offset)); }
  const RealFunction& band(int offset) const { return band_.at(slot(offset)); }

  double coefficient(std::size_t row, int offset) const {
    return band(offset).at(row);
  }
  void set(std::size_t row, int offset, double value) { band(offset).at(row) = value; }

  GridFunction apply(const GridFunction& v) const {
    if (v.size() != source_.size())
      throw SpaceError("apply: function length does not match the source grid");
    GridFunction out(target_.size(), 0.0);
    for (std::size_t i = 0; i < target_.size(); ++i)
      for (int off = -max_offset; off <= max_offset; ++off) {
        const long j = static_cast<long>(i) + off;
        if (j < 0 || j >= static_cast<long>(source_.size())) continue;
        out[i] += band(off)[i] * v[static_cast<std::size_t>(j)];
      }
    return out;
  }

  /// Dense realization, target.size() x source.size(), zero-padded at edges.
  Matrix to_matrix() const {
    Matrix m(target_.size(), source_.size());
    for (std::size_t i = 0; i < target_.size(); ++i)
      for (int off = -max_offset; off <= max_offset; ++off) {
        const long j = static_cast<long>(i) + off;
        if (j < 0 || j >= static_cast<long>(source_.size())) continue;
        m(i, static_cast<std::size_t>(j)) = band(off)[i];
      }
    return m;
  }

private:
  static std::size_t slot(int offset) {
    if (offset < -max_offset || offset > max_offset)
      throw SpaceError("band offset out of range: " + std::to_string(offset));
    return static_cast<std::size_t>(offset + max_offset);
  }

  WeightedSpace source_;
  WeightedSpace target_;
  std::array<RealFunction, band_count> band_;
};

inline Matrix to_matrix(const LinearOperator& op) { return op.to_matrix(); }

/// Band description of a dense matrix; throws if it is wider than +-2.
inline LinearOperator from_matrix(const Matrix& m, const WeightedSpace& source,
                                  const WeightedSpace& target, double tol = 0.0) {
  if (m.rows() != target.size() || m.cols() != source.size())
    throw SpaceError("from_matrix: shape does not match the spaces");
  LinearOperator op(source, target);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const long off = static_cast<long>(j) - static_cast<long>(i);
      if (std::abs(off) > LinearOperator::max_offset) {
        if (std::abs(m(i, j)) > tol)
          throw SpaceError("matrix exceeds the supported band width");
        continue;
      }
      op.set(i, static_cast<int>(off), m(i, j));
    }
  return op;
}

/// Weighted adjoint by brute force: M* = D_src^{-1} M^T D_tgt on T^k.
///
/// Rows and columns outside T^k of the respective grids are zero. Satisfies
/// <psi, M phi>_tgt = <M* psi, phi>_src for psi, phi supported on T^k.
inline Matrix adjoint_oracle(const Matrix& m, const WeightedSpace& source,
                             const WeightedSpace& target) {
  if (m.rows() != target.size() || m.cols() != source.size())
    throw SpaceError("adjoint_oracle: shape does not match the spaces");
  const auto& ds = source.gram_weights();
  const auto& dt = target.gram_weights();
  Matrix a(source.size(), target.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (!source.grid().in_kappa(i)) continue;
    for (std::size_t j = 0; j < target.size(); ++j) {
      if (!target.grid().in_kappa(j)) continue;
      const double mji = m(j, i);
      if (mji == 0.0) continue;
      if (!(ds[i] > 0.0))
        throw PointError("zero Gram weight under operator support", i,
                         source.grid()[i]);
      a(i, j) = mji * dt[j] / ds[i];
    }
  }
  return a;
}

inline Matrix adjoint_oracle(const LinearOperator& op) {
  return adjoint_oracle(op.to_matrix(), op.source(), op.target());
}

/// Restriction of a square operator matrix to the T^k rows and columns.
inline Matrix kappa_block(const Matrix& m, const TimeScaleGrid& row_grid,
                          const TimeScaleGrid& col_grid) {
  return m.block(std::min(m.rows(), row_grid.kappa_size()),
                 std::min(m.cols(), col_grid.kappa_size()));
}

} // namespace tsfact
