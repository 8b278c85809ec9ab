#pragma once

// Closed forms of the shift S, its adjoint S*, inclusion I_k and I_k*,
// the Delta operator and its adjoint, and the ladder operators
// A_k = h_k Delta + f_k I_k with their adjoints. Everything is built
// directly from masked formulas; the brute-force adjoint in hilbert.hpp is
// only used by tests and verification.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "tsfact/error.hpp"
#include "tsfact/hilbert.hpp"

namespace tsfact {

enum class ShiftKind { S, S_star };

/// (sigma^{-1})^Delta at x_i for i in T^k_k. For isolated points this is
/// mu(sigma^{-1}(x)) / mu(x).
inline double backward_jump_derivative(const TimeScaleGrid& grid, std::size_t i) {
  return grid.graininess(i - 1) / grid.graininess(i);
}

/// Sψ = ψ^σ, i.e. (Sψ)(x_i) = ψ(x_{i+1}) on T^kk, and its adjoint
/// S*ψ = (ρ^{σ^{-1}}/ρ) (σ^{-1})^Δ ψ^{σ^{-1}} on T^k_k.
inline LinearOperator shift_op(const WeightedSpace& space, ShiftKind which) {
  const auto& grid = space.grid();
  const auto& rho = space.weight();
  LinearOperator op(space, space);
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (which == ShiftKind::S) {
      op.set(i, +1, grid.chi_kappa_kappa(i));
    } else if (grid.in_kappa_both(i)) {
      op.set(i, -1, rho[i - 1] / rho[i] * backward_jump_derivative(grid, i));
    }
  }
  return op;
}

/// Diagonals of S*S (supported on T^k_k) and SS* (supported on T^kk).
struct ShiftProducts {
  RealFunction s_star_s;
  RealFunction s_s_star;
};

inline ShiftProducts shift_products(const WeightedSpace& space) {
  const auto& grid = space.grid();
  const auto& rho = space.weight();
  ShiftProducts out{RealFunction(space.size(), 0.0), RealFunction(space.size(), 0.0)};
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (grid.in_kappa_both(i))
      out.s_star_s[i] = rho[i - 1] / rho[i] * backward_jump_derivative(grid, i);
    if (grid.in_kappa_kappa(i))
      out.s_s_star[i] = rho[i] / rho[i + 1] * backward_jump_derivative(grid, i + 1);
  }
  return out;
}

/// ||S|| = sqrt(sup over T^k_k of ρ(σ^{-1}(x))/ρ(x) · (σ^{-1})^Δ(x)).
inline double s_norm_bound(const WeightedSpace& space) {
  const auto d = shift_products(space).s_star_s;
  return std::sqrt(*std::max_element(d.begin(), d.end()));
}

namespace detail {

inline void check_level_pair(const WeightedSpace& k, const WeightedSpace& k1) {
  const auto ns = k.size();
  const auto nt = k1.size();
  if (!(nt == ns || nt + 1 == ns) || !k.grid().has_prefix(k1.grid()))
    throw SpaceError("level spaces must share a grid (the next level may drop "
                     "the top point)");
}

} // namespace detail

/// η_k = ρ_{k+1}/ρ_k on T^k of the next level, zero elsewhere; length of
/// the level-k grid.
inline RealFunction weight_ratio(const WeightedSpace& space_k,
                                 const WeightedSpace& space_k1) {
  detail::check_level_pair(space_k, space_k1);
  RealFunction eta(space_k.size(), 0.0);
  for (std::size_t i = 0; space_k1.grid().in_kappa(i); ++i) {
    eta[i] = space_k1.weight()[i] / space_k.weight()[i];
    if (!(eta[i] > 0.0))
      throw PointError("nonpositive weight ratio", i, space_k.grid()[i]);
  }
  return eta;
}

struct OperatorPair {
  LinearOperator op;      // H_k -> H_{k+1}
  LinearOperator adjoint; // H_{k+1} -> H_k
};

/// I_k ψ = ψ and I_k* ψ = η_k ψ.
inline OperatorPair inclusion_ops(const WeightedSpace& space_k,
                                  const WeightedSpace& space_k1) {
  const RealFunction eta = weight_ratio(space_k, space_k1);
  OperatorPair p{LinearOperator(space_k, space_k1), LinearOperator(space_k1, space_k)};
  for (std::size_t i = 0; i < space_k1.size(); ++i) p.op.set(i, 0, 1.0);
  for (std::size_t i = 0; i < space_k1.size(); ++i) p.adjoint.set(i, 0, eta[i]);
  return p;
}

/// Δ = (I_k/μ)(S − χ_{T^kk}) and Δ* = (S* − χ_{T^kk}) (η_k/μ).
inline OperatorPair delta_ops(const WeightedSpace& space_k,
                              const WeightedSpace& space_k1) {
  const RealFunction eta = weight_ratio(space_k, space_k1);
  const auto& grid = space_k.grid();
  const auto& rho = space_k.weight();
  OperatorPair p{LinearOperator(space_k, space_k1), LinearOperator(space_k1, space_k)};
  for (std::size_t i = 0; i < space_k1.size(); ++i) {
    if (!grid.in_kappa_kappa(i)) continue;
    const double inv_mu = 1.0 / grid.graininess(i);
    p.op.set(i, 0, -inv_mu);
    p.op.set(i, +1, inv_mu);
  }
  for (std::size_t i = 0; i < space_k.size(); ++i) {
    // S* part reads (η/μ)ψ at σ^{-1}(x)
    if (grid.in_kappa_both(i) && i - 1 < space_k1.size()) {
      const double s_star = rho[i - 1] / rho[i] * backward_jump_derivative(grid, i);
      p.adjoint.set(i, -1, s_star * eta[i - 1] / grid.graininess(i - 1));
    }
    if (grid.in_kappa_kappa(i) && i < space_k1.size())
      p.adjoint.set(i, 0, -eta[i] / grid.graininess(i));
  }
  return p;
}

/// Parameters of A_k = h_k Δ + f_k I_k, stored as (h_k, φ_k) with
/// φ_k = f_k − h_k χ_{T^kk}/μ.
struct LadderSpec {
  RealFunction h;
  RealFunction phi;
  int source_level = 0;

  static LadderSpec from_h_f(const TimeScaleGrid& grid, RealFunction h,
                             const RealFunction& f, int level = 0) {
    check_length(grid, h, "h");
    check_length(grid, f, "f");
    RealFunction phi(grid.size(), 0.0);
    for (std::size_t i = 0; grid.in_kappa(i); ++i)
      phi[i] = f[i] - h[i] * grid.chi_kappa_kappa(i) / grid.graininess(i);
    return {std::move(h), std::move(phi), level};
  }

  /// f = φ + h χ_{T^kk}/μ.
  RealFunction f(const TimeScaleGrid& grid) const {
    RealFunction out(grid.size(), 0.0);
    for (std::size_t i = 0; grid.in_kappa(i); ++i)
      out[i] = phi[i] + h[i] * grid.chi_kappa_kappa(i) / grid.graininess(i);
    return out;
  }

  static void check_length(const TimeScaleGrid& grid, const RealFunction& v,
                           const char* name) {
    if (v.size() != grid.size() && v.size() + 1 != grid.size())
      throw SpaceError(std::string("ladder function ") + name +
                       " does not match the grid");
  }
};

/// A_k = I_k (h_k/μ S + φ_k) and A_k* = (S* h_k/μ + φ_k) I_k*.
inline OperatorPair ladder_op(const LadderSpec& spec, const WeightedSpace& space_k,
                              const WeightedSpace& space_k1) {
  const auto& grid = space_k.grid();
  LadderSpec::check_length(grid, spec.h, "h");
  LadderSpec::check_length(grid, spec.phi, "phi");
  const RealFunction eta = weight_ratio(space_k, space_k1);
  const auto& rho = space_k.weight();
  OperatorPair p{LinearOperator(space_k, space_k1), LinearOperator(space_k1, space_k)};
  for (std::size_t i = 0; space_k1.grid().in_kappa(i); ++i) {
    p.op.set(i, 0, spec.phi[i]);
    if (grid.in_kappa_kappa(i)) p.op.set(i, +1, spec.h[i] / grid.graininess(i));
  }
  for (std::size_t i = 0; i < space_k.size(); ++i) {
    if (!grid.in_kappa(i)) continue;
    if (grid.in_kappa_both(i) && i - 1 < space_k1.size()) {
      const double s_star = rho[i - 1] / rho[i] * backward_jump_derivative(grid, i);
      p.adjoint.set(i, -1, s_star * spec.h[i - 1] / grid.graininess(i - 1) * eta[i - 1]);
    }
    if (i < space_k1.size()) p.adjoint.set(i, 0, spec.phi[i] * eta[i]);
  }
  return p;
}

/// Coefficients of a tridiagonal operator written as
/// (Mψ)(x) = α(x)ψ(σ(x)) + β(x)ψ(x) + γ(x)ψ(σ^{-1}(x)).
struct ThreeTerm {
  RealFunction alpha;
  RealFunction beta;
  RealFunction gamma;
};

inline ThreeTerm three_term_coefficients(const Matrix& product, double tol = 0.0) {
  if (product.rows() != product.cols())
    throw SpaceError("three_term_coefficients: product must be square");
  const std::size_t n = product.rows();
  ThreeTerm t{RealFunction(n, 0.0), RealFunction(n, 0.0), RealFunction(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const long off = static_cast<long>(j) - static_cast<long>(i);
      if (off == 1) t.alpha[i] = product(i, j);
      else if (off == 0) t.beta[i] = product(i, j);
      else if (off == -1) t.gamma[i] = product(i, j);
      else if (std::abs(product(i, j)) > tol)
        throw SpaceError("product is not tridiagonal at (" + std::to_string(i) + ", " +
                         std::to_string(j) + ")");
    }
  return t;
}

} // namespace tsfact
