#pragma once

// The factorization chain: weights ρ_k and structural functions (B_k, η_k,
// g_k) linked by the Pearson equation, the ladder data (h_k, φ_k, a_k, b_k),
// and the checks that A_k A_k* = a_k A_{k+1}* A_{k+1} + b_k holds.
//
// Level k+1 lives on the level-k grid with its top point removed: the shift
// in ρ_{k+1} = (B_k ρ_k)^σ vanishes at the last point of T^k, so the weight
// of the next space is supported one point lower.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tsfact/error.hpp"
#include "tsfact/hilbert.hpp"
#include "tsfact/operators.hpp"

namespace tsfact {

/// Structural data of one chain level. All functions are sampled on `grid`;
/// only their values on T^k are meaningful.
struct StructuralLevel {
  int level = 0;
  TimeScaleGrid grid;
  RealFunction rho;
  RealFunction B;
  RealFunction A_pearson;
  RealFunction eta;
  RealFunction g;
  RealFunction h;
  RealFunction phi;
  double a = 1.0;
  double b = 0.0;

  WeightedSpace space() const { return WeightedSpace(grid, rho, level); }
  LadderSpec ladder_spec() const { return {h, phi, level}; }

  /// Weight of the next space, η_k ρ_k on the grid with its top removed.
  WeightedSpace next_space() const {
    TimeScaleGrid next = grid.drop_top();
    RealFunction w(next.size(), 0.0);
    for (std::size_t i = 0; next.in_kappa(i); ++i) {
      w[i] = eta[i] * rho[i];
      if (!(w[i] > 0.0)) throw PointError("nonpositive advanced weight", i, grid[i]);
    }
    return WeightedSpace(std::move(next), std::move(w), level + 1);
  }

  void validate() const {
    const std::size_t n = grid.size();
    auto check = [&](const RealFunction& f, const char* name) {
      if (f.size() != n)
        throw ChainError(std::string("level ") + std::to_string(level) + ": " + name +
                         " has the wrong length");
    };
    check(rho, "rho");
    check(B, "B");
    check(A_pearson, "A_pearson");
    check(eta, "eta");
    check(g, "g");
    check(h, "h");
    check(phi, "phi");
    if (a == 0.0) throw ChainError("a_k must be nonzero");
  }
};

/// Level-0 data from ρ_0, B_0 and the Pearson coefficient A_0; η_0 = B_0 + μA_0.
inline StructuralLevel make_first_level(TimeScaleGrid grid, RealFunction rho,
                                        RealFunction B, RealFunction A_pearson,
                                        RealFunction h, RealFunction phi,
                                        RealFunction g = {}) {
  StructuralLevel lv;
  const std::size_t n = grid.size();
  if (g.empty()) g.assign(n, 1.0);
  for (auto* f : {&rho, &B, &A_pearson, &h, &phi, &g})
    if (f->size() + 1 == n) f->push_back(0.0);
  lv.eta.assign(n, 0.0);
  for (std::size_t i = 0; grid.in_kappa(i); ++i)
    lv.eta[i] = B.at(i) + grid.graininess(i) * A_pearson.at(i);
  lv.grid = std::move(grid);
  lv.rho = std::move(rho);
  lv.B = std::move(B);
  lv.A_pearson = std::move(A_pearson);
  lv.h = std::move(h);
  lv.phi = std::move(phi);
  lv.g = std::move(g);
  lv.validate();
  return lv;
}

/// Solve the Pearson equation (Bρ)^σ = ηρ upward from ρ(x_0) = 1, then
/// rescale so that max ρ = 1.
inline RealFunction pearson_weight(const TimeScaleGrid& grid, const RealFunction& B,
                                   const RealFunction& A_pearson) {
  RealFunction rho(grid.size(), 0.0);
  rho[0] = 1.0;
  for (std::size_t i = 0; grid.in_kappa_kappa(i); ++i) {
    const double eta = B[i] + grid.graininess(i) * A_pearson[i];
    if (!(B[i + 1] != 0.0)) throw PointError("B vanishes on the lattice", i + 1, grid[i + 1]);
    rho[i + 1] = eta * rho[i] / B[i + 1];
    if (!(rho[i + 1] > 0.0) || !std::isfinite(rho[i + 1]))
      throw PointError("Pearson weight is not positive", i + 1, grid[i + 1]);
  }
  const double mx = *std::max_element(rho.begin(), rho.end());
  for (double& r : rho) r /= mx;
  return rho;
}

struct PearsonResidual {
  RealFunction residual;  // (Bρ)^Δ − Aρ on T^kk
  double delta_form = 0.0;
  double shift_form = 0.0; // max |(Bρ)^σ − ηρ|
  double scale = 0.0;      // max |(Bρ)^Δ|, for relative tolerances
  double max() const { return std::max(delta_form, shift_form); }
};

inline PearsonResidual pearson_residual(const StructuralLevel& lv) {
  const auto& grid = lv.grid;
  PearsonResidual out;
  out.residual.assign(grid.size(), 0.0);
  for (std::size_t i = 0; grid.in_kappa_kappa(i); ++i) {
    const double mu = grid.graininess(i);
    const double br0 = lv.B[i] * lv.rho[i];
    const double br1 = lv.B[i + 1] * lv.rho[i + 1];
    const double d = (br1 - br0) / mu;
    out.residual[i] = d - lv.A_pearson[i] * lv.rho[i];
    out.delta_form = std::max(out.delta_form, std::abs(out.residual[i]));
    out.shift_form = std::max(out.shift_form, std::abs(br1 - lv.eta[i] * lv.rho[i]));
    out.scale = std::max({out.scale, std::abs(d), std::abs(br1) / mu});
  }
  return out;
}

struct AdvanceResult {
  StructuralLevel level;
  /// Points where h_{k+1} vanishes together with h_k φ_k^σ, so φ_{k+1} is
  /// not fixed by h_{k+1}φ_{k+1} = h_k φ_k^σ/(a g^σ); there φ_{k+1} comes
  /// from the diagonal identity instead.
  std::vector<std::size_t> removable_points;
};

namespace detail {

/// Right-hand side of the diagonal identity with the level-(k+1) terms
/// removed: B^σ h²/(μ^σ μ) + φ²η − b − a g B h_{k+1}(σ^{-1})²/(μ μ^{σ^{-1}}).
inline double diagonal_remainder(const StructuralLevel& lv, const RealFunction& h_next,
                                 std::size_t i) {
  const auto& grid = lv.grid;
  const double mu = grid.graininess(i);
  double r = lv.B[i + 1] * lv.h[i] * lv.h[i] / (grid.graininess(i + 1) * mu) +
             lv.phi[i] * lv.phi[i] * lv.eta[i] - lv.b;
  if (i >= 1)
    r -= lv.a * lv.g[i] * lv.B[i] * h_next[i - 1] * h_next[i - 1] /
         (mu * grid.graininess(i - 1));
  return r;
}

inline double max_abs_on(const RealFunction& f, std::size_t lo, std::size_t hi) {
  double m = 0.0;
  for (std::size_t i = lo; i <= hi && i < f.size(); ++i) m = std::max(m, std::abs(f[i]));
  return m;
}

} // namespace detail

/// Next chain level: ρ_{k+1} = η_k ρ_k, B_{k+1} = g_k B_k,
/// η_{k+1} = (η_k g_k)^σ, and φ_{k+1} from h_{k+1}φ_{k+1} = h_k φ_k^σ/(a_k g_k^σ).
inline AdvanceResult advance_level(const StructuralLevel& lv, RealFunction h_next) {
  lv.validate();
  const auto& grid = lv.grid;
  TimeScaleGrid next = grid.drop_top();
  const std::size_t n1 = next.size();
  if (h_next.size() + 1 == n1) h_next.push_back(0.0);
  if (h_next.size() != n1) throw ChainError("h_{k+1} does not match the next grid");

  AdvanceResult res;
  StructuralLevel& nx = res.level;
  nx.level = lv.level + 1;
  nx.rho.assign(n1, 0.0);
  nx.B.assign(n1, 0.0);
  nx.A_pearson.assign(n1, 0.0);
  nx.eta.assign(n1, 0.0);
  nx.g.assign(n1, 1.0);
  nx.phi.assign(n1, 0.0);
  nx.h = std::move(h_next);

  double h_scale = 0.0, num_scale = 0.0;
  for (std::size_t i = 0; next.in_kappa(i); ++i) {
    h_scale = std::max(h_scale, std::abs(nx.h[i]));
    num_scale = std::max(num_scale, std::abs(lv.h[i] * lv.phi[i + 1]));
  }

  std::optional<std::size_t> last_regular;
  std::optional<std::size_t> before_last;
  for (std::size_t i = 0; next.in_kappa(i); ++i) {
    nx.rho[i] = lv.eta[i] * lv.rho[i];
    if (!(nx.rho[i] > 0.0)) throw PointError("nonpositive advanced weight", i, grid[i]);
    nx.B[i] = lv.g[i] * lv.B[i];
    nx.eta[i] = lv.eta[i + 1] * lv.g[i + 1];
    nx.A_pearson[i] = (nx.eta[i] - nx.B[i]) / grid.graininess(i);

    const double g_up = lv.g[i + 1];
    if (g_up == 0.0) throw PointError("g_k^sigma vanishes", i, grid[i]);
    const double num = lv.h[i] * lv.phi[i + 1];
    if (std::abs(nx.h[i]) > 1e-14 * h_scale) {
      nx.phi[i] = num / (lv.a * g_up * nx.h[i]);
      before_last = last_regular;
      last_regular = i;
      continue;
    }
    if (std::abs(num) > 1e-12 * std::max(num_scale, 1e-300))
      throw PointError("h_{k+1} vanishes where h_k phi_k^sigma does not", i, grid[i]);
    res.removable_points.push_back(i);
    if (nx.eta[i] == 0.0) continue;
    const double sq = detail::diagonal_remainder(lv, nx.h, i) / (lv.a * nx.eta[i]);
    if (sq < -1e-12 * std::max(1.0, num_scale))
      throw PointError("no real phi_{k+1} at a removable point", i, grid[i]);
    double mag = std::sqrt(std::max(0.0, sq));
    // sign is not fixed by the relations; continue the trend of the
    // preceding regular values
    double hint = 1.0;
    if (last_regular && before_last)
      hint = 2.0 * nx.phi[*last_regular] - nx.phi[*before_last];
    else if (last_regular)
      hint = nx.phi[*last_regular];
    nx.phi[i] = hint < 0.0 ? -mag : mag;
  }
  nx.grid = std::move(next);
  return res;
}

/// Residuals of the pointwise relations equivalent to the factorization:
///   h_{k+1}φ_{k+1} = h_k φ_k^σ / (a_k g_k^σ)                       (phi)
///   a g (B (h_{k+1}^{σ^{-1}})²/(μ μ^{σ^{-1}}) − φ²η/(a g)) + b
///     = B^σ h²/(μ^σ μ) − (φ^σ)² η^σ h² / (a g^σ h_{k+1}²)          (eq)
/// (eq) is evaluated on the deep interior of the level-(k+1) grid; (phi)
/// also at the point just below it, which governs the subdiagonal of the
/// first deep row of the factorization.
struct RelationResiduals {
  double phi = 0.0;
  RealFunction eq;
  double eq_max = 0.0;
  double phi_scale = 0.0;
  double eq_scale = 0.0;
  std::vector<std::size_t> skipped_points;
};

inline RelationResiduals relation_residuals(const StructuralLevel& lk,
                                            const StructuralLevel& lk1,
                                            std::size_t guard_width) {
  const auto& grid = lk.grid;
  if (!grid.has_prefix(lk1.grid) || lk1.grid.size() + 1 != grid.size())
    throw ChainError("relation_residuals: levels are not consecutive");
  const IndexRange deep = lk1.grid.deep_interior(guard_width);
  RelationResiduals out;
  out.eq.assign(lk1.grid.size(), 0.0);
  const double a = lk.a;
  const double b = lk.b;

  for (std::size_t i = deep.lo - 1; i <= deep.hi; ++i) {
    const double lhs = lk1.h[i] * lk1.phi[i];
    const double rhs = lk.h[i] * lk.phi[i + 1] / (a * lk.g[i + 1]);
    out.phi = std::max(out.phi, std::abs(lhs - rhs));
    out.phi_scale = std::max({out.phi_scale, std::abs(lhs), std::abs(rhs)});
  }

  const double h_scale = detail::max_abs_on(lk1.h, deep.lo, deep.hi);
  for (std::size_t i = deep.lo; i <= deep.hi; ++i) {
    const double hn = lk1.h[i];
    if (std::abs(hn) < 1e-14 * h_scale) {
      out.skipped_points.push_back(i);
      continue;
    }
    const double mu = grid.graininess(i);
    const double mu_dn = grid.graininess(i - 1);
    const double mu_up = grid.graininess(i + 1);
    const double hp = lk1.h[i - 1];
    const double t1 = a * lk.g[i] * lk.B[i] * hp * hp / (mu * mu_dn);
    const double t2 = lk.phi[i] * lk.phi[i] * lk.eta[i];
    const double r1 = lk.B[i + 1] * lk.h[i] * lk.h[i] / (mu_up * mu);
    const double r2 = lk.phi[i + 1] * lk.phi[i + 1] * lk.eta[i + 1] * lk.h[i] * lk.h[i] /
                      (a * lk.g[i + 1] * hn * hn);
    const double lhs = t1 - t2 + b;
    const double rhs = r1 - r2;
    out.eq[i] = std::abs(lhs - rhs);
    out.eq_max = std::max(out.eq_max, out.eq[i]);
    out.eq_scale = std::max({out.eq_scale, std::abs(t1), std::abs(t2), std::abs(b),
                             std::abs(r1), std::abs(r2)});
  }
  return out;
}

/// Residuals of the trivial-weight specialization (ρ ≡ B ≡ η ≡ g ≡ 1):
///   h_{k+1}φ_{k+1} = h_k φ_k^σ / a
///   a (h_{k+1}^{σ^{-1}})²/(μ μ^{σ^{-1}}) + a φ_{k+1}² + b = h²/(μ^σ μ) + φ²
struct ReducedResiduals {
  double phi = 0.0;
  double eq = 0.0;
};

inline ReducedResiduals trivial_weight_reduced_residual(const StructuralLevel& lk,
                                                        const StructuralLevel& lk1,
                                                        std::size_t guard_width) {
  auto is_one = [](const RealFunction& f, const TimeScaleGrid& grid) {
    for (std::size_t i = 0; grid.in_kappa(i); ++i)
      if (std::abs(f[i] - 1.0) > 1e-12) return false;
    return true;
  };
  const TimeScaleGrid& next = lk1.grid;
  if (!is_one(lk.rho, lk.grid) || !is_one(lk.B, lk.grid) || !is_one(lk.eta, next) ||
      !is_one(lk.g, lk.grid) || !is_one(lk1.rho, next))
    throw ChainError("trivial-weight relations need rho = B = eta = g = 1");
  const auto& grid = lk.grid;
  const IndexRange deep = next.deep_interior(guard_width);
  ReducedResiduals out;
  for (std::size_t i = deep.lo - 1; i <= deep.hi; ++i)
    out.phi = std::max(out.phi, std::abs(lk1.h[i] * lk1.phi[i] -
                                         lk.h[i] * lk.phi[i + 1] / lk.a));
  for (std::size_t i = deep.lo; i <= deep.hi; ++i) {
    const double mu = grid.graininess(i);
    const double lhs = lk.a * lk1.h[i - 1] * lk1.h[i - 1] / (mu * grid.graininess(i - 1)) +
                       lk.a * lk1.phi[i] * lk1.phi[i] + lk.b;
    const double rhs = lk.h[i] * lk.h[i] / (grid.graininess(i + 1) * mu) +
                       lk.phi[i] * lk.phi[i];
    out.eq = std::max(out.eq, std::abs(lhs - rhs));
  }
  return out;
}

/// Pointwise residual of the functional equation for g_k that remains when
/// h_k ≡ h_{k+1} ≡ 1:
///   a g F + b = F^σ,  F = B/(μ μ^{σ^{-1}}) − φ²η/(a g),
/// on the deep interior of the level-(k+1) grid. Only evaluates; g_k is
/// taken from the level.
inline RealFunction g_equation_residual(const StructuralLevel& lk, std::size_t guard_width) {
  lk.validate();
  const auto& grid = lk.grid;
  const TimeScaleGrid next = grid.drop_top();
  const IndexRange deep = next.deep_interior(guard_width);
  const double a = lk.a;
  auto F = [&](std::size_t i) {
    if (lk.g[i] == 0.0) throw PointError("g_k vanishes", i, grid[i]);
    return lk.B[i] / (grid.graininess(i) * grid.graininess(i - 1)) -
           lk.phi[i] * lk.phi[i] * lk.eta[i] / (a * lk.g[i]);
  };
  RealFunction r(next.size(), 0.0);
  for (std::size_t i = deep.lo; i <= deep.hi; ++i)
    r[i] = std::abs(a * lk.g[i] * F(i) + lk.b - F(i + 1));
  return r;
}

using SeedFunction = std::function<double(double x)>;

/// Which square root of u = h_{k+1}² is returned. `through_zeros` is
/// positive on the top segment and changes sign at every isolated zero of u,
/// i.e. follows a smooth h through its simple zeros. Both branches satisfy
/// the relations, with φ_{k+1} changing sign along with h_{k+1}.
enum class RootBranch { positive, through_zeros };

struct HSolveResult {
  RealFunction h;                     // on the level-(k+1) grid
  std::size_t seed_index = 0;
  std::vector<std::size_t> restarts;  // points where the recurrence was 0/0
};

/// Solve the (eq) relation for u = h_{k+1}² as the recurrence
///   u(x) = β(x) / (γ(x) − α(x) u(σ^{-1}(x)))
/// with α = a g B/(μ μ^{σ^{-1}}), β = (φ^σ)² η^σ h²/(a g^σ),
/// γ = B^σ h²/(μ^σ μ) + φ²η − b.
///
/// The seed fixes u just below the deep interior; the recurrence runs forward
/// to the top of T^k of the next grid and backward to its bottom. Where both
/// β and the denominator vanish the relation carries no information (this
/// happens where h_k = 0) and the seed is consulted again.
inline HSolveResult solve_h_next(const StructuralLevel& lv, double a, double b,
                                 const SeedFunction& seed, std::size_t guard_width,
                                 RootBranch branch = RootBranch::positive) {
  const auto& grid = lv.grid;
  const TimeScaleGrid next = grid.drop_top();
  const std::size_t n1 = next.size();
  const IndexRange deep = next.deep_interior(guard_width);
  const std::size_t s = deep.lo - 1;

  auto alpha = [&](std::size_t i) {
    return a * lv.g[i] * lv.B[i] / (grid.graininess(i) * grid.graininess(i - 1));
  };
  auto beta = [&](std::size_t i) {
    return lv.phi[i + 1] * lv.phi[i + 1] * lv.eta[i + 1] * lv.h[i] * lv.h[i] /
           (a * lv.g[i + 1]);
  };
  auto gamma = [&](std::size_t i) {
    return lv.B[i + 1] * lv.h[i] * lv.h[i] / (grid.graininess(i + 1) * grid.graininess(i)) +
           lv.phi[i] * lv.phi[i] * lv.eta[i] - b;
  };

  HSolveResult out;
  out.seed_index = s;
  RealFunction u(n1, 0.0);
  u[s] = seed(grid[s]);
  if (!(u[s] > 0.0)) throw PointError("seed must be positive", s, grid[s]);

  constexpr double tol = 1e-12;
  for (std::size_t i = s + 1; next.in_kappa(i); ++i) {
    const double be = beta(i);
    const double au = alpha(i) * u[i - 1];
    const double ga = gamma(i);
    const double den = ga - au;
    const double scale = std::max({std::abs(ga), std::abs(au), std::abs(be), 1e-300});
    if (std::abs(be) <= tol * scale && std::abs(den) <= tol * scale) {
      u[i] = seed(grid[i]);
      if (!(u[i] > 0.0)) throw PointError("seed must be positive", i, grid[i]);
      out.restarts.push_back(i);
      continue;
    }
    if (be < -tol * scale) throw PointError("beta < 0 in h_{k+1} recurrence", i, grid[i]);
    if (den <= 0.0) throw PointError("denominator gamma - alpha u <= 0", i, grid[i]);
    u[i] = std::max(0.0, be) / den;
  }
  for (std::size_t i = s; i >= 1; --i) {
    const double al = alpha(i);
    const double ga = gamma(i);
    const double be = beta(i);
    double rest;
    if (u[i] > 0.0) rest = ga - be / u[i];
    else if (std::abs(be) <= tol * std::max(std::abs(ga), 1e-300)) rest = ga;
    else throw PointError("backward continuation hits u = 0", i, grid[i]);
    if (al == 0.0) throw PointError("backward continuation: alpha vanishes", i, grid[i]);
    const double v = rest / al;
    if (v < -tol * std::max(std::abs(ga), std::abs(be / std::max(u[i], 1e-300))) / std::abs(al))
      throw PointError("backward continuation gives negative h_{k+1}^2", i - 1, grid[i - 1]);
    u[i - 1] = std::max(0.0, v);
  }
  out.h.assign(n1, 0.0);
  const std::size_t top = n1 - 2;
  const double u_scale = *std::max_element(u.begin(), u.end());
  double sign = 1.0;
  for (std::size_t i = top + 1; i-- > 0;) {
    out.h[i] = sign * std::sqrt(u[i]);
    if (branch == RootBranch::through_zeros && i < top && i > 0 &&
        u[i] <= 1e-14 * u_scale)
      sign = -sign;
  }
  return out;
}

inline HSolveResult solve_h_next(const StructuralLevel& lv, double a, double b,
                                 double seed_value, std::size_t guard_width,
                                 RootBranch branch = RootBranch::positive) {
  return solve_h_next(lv, a, b, [seed_value](double) { return seed_value; }, guard_width,
                      branch);
}

struct FittedConstants {
  double a = 0.0;
  double b = 0.0;
  std::size_t first_point = 0;
  std::size_t second_point = 0;
};

/// Determine (a_k, b_k) from level-(k+1) data.
///
/// On the diagonal of the factorization the relation is linear in (a, b):
///   B^σ h²/(μ^σ μ) + φ²η = a (g B (h_{k+1}^{σ^{-1}})²/(μ μ^{σ^{-1}}) + φ_{k+1}² η_{k+1}) + b.
/// It is solved at the two leftmost deep-interior points (moving the second
/// point right while the system is singular) and the result is then checked
/// against both relations on the whole deep interior.
inline FittedConstants fit_constants(const StructuralLevel& lv, const RealFunction& h_next,
                                     const RealFunction& phi_next, std::size_t guard_width,
                                     double rel_tol = 1e-10) {
  const auto& grid = lv.grid;
  const TimeScaleGrid next = grid.drop_top();
  const IndexRange deep = next.deep_interior(guard_width);
  auto lhs = [&](std::size_t i) {
    return lv.B[i + 1] * lv.h[i] * lv.h[i] / (grid.graininess(i + 1) * grid.graininess(i)) +
           lv.phi[i] * lv.phi[i] * lv.eta[i];
  };
  auto coef = [&](std::size_t i) {
    const double eta_next = lv.eta[i + 1] * lv.g[i + 1];
    return lv.g[i] * lv.B[i] * h_next[i - 1] * h_next[i - 1] /
               (grid.graininess(i) * grid.graininess(i - 1)) +
           phi_next[i] * phi_next[i] * eta_next;
  };

  FittedConstants fc;
  bool found = false;
  const std::size_t i = deep.lo;
  for (std::size_t j = i + 1; j <= deep.hi && !found; ++j) {
    const double pi = coef(i), pj = coef(j);
    if (std::abs(pi - pj) <= 1e-12 * std::max({std::abs(pi), std::abs(pj), 1e-300}))
      continue;
    fc.a = (lhs(i) - lhs(j)) / (pi - pj);
    fc.b = lhs(i) - fc.a * pi;
    fc.first_point = i;
    fc.second_point = j;
    found = true;
  }
  if (!found) throw ChainError("fit_constants: every evaluation pair is singular");
  if (fc.a == 0.0) throw ChainError("fit_constants: fitted a_k vanishes");

  StructuralLevel trial = lv;
  trial.a = fc.a;
  trial.b = fc.b;
  StructuralLevel nx;
  nx.grid = next;
  nx.h = h_next;
  nx.phi = phi_next;
  nx.h.resize(next.size(), 0.0);
  nx.phi.resize(next.size(), 0.0);
  const auto rr = relation_residuals(trial, nx, guard_width);
  if (rr.phi > rel_tol * std::max(1.0, rr.phi_scale) ||
      rr.eq_max > rel_tol * std::max(1.0, rr.eq_scale))
    throw ChainError("fit_constants: no constants fit (phi residual " +
                     std::to_string(rr.phi) + ", eq residual " +
                     std::to_string(rr.eq_max) + ")");
  return fc;
}

/// The chain of spaces H_0 .. H_L+1 and ladder operators A_0 .. A_L.
class FactorChain {
public:
  FactorChain(std::vector<StructuralLevel> levels, std::size_t guard_width)
      : levels_(std::move(levels)), guard_(guard_width) {
    if (levels_.empty()) throw ChainError("a chain needs at least one level");
    for (std::size_t k = 0; k < levels_.size(); ++k) {
      levels_[k].validate();
      if (levels_[k].level != static_cast<int>(k))
        throw ChainError("levels must be numbered contiguously from 0");
      spaces_.push_back(levels_[k].space());
      if (k > 0) check_weight_recurrence(k);
    }
    spaces_.push_back(levels_.back().next_space());
    for (std::size_t k = 0; k < levels_.size(); ++k)
      ladders_.push_back(ladder_op(levels_[k].ladder_spec(), spaces_[k], spaces_[k + 1]));
  }

  std::size_t depth() const noexcept { return levels_.size(); }
  std::size_t guard_width() const noexcept { return guard_; }
  const StructuralLevel& level(std::size_t k) const { return levels_.at(k); }
  const std::vector<StructuralLevel>& levels() const noexcept { return levels_; }
  /// H_k for k = 0 .. depth().
  const WeightedSpace& space(std::size_t k) const { return spaces_.at(k); }
  /// (A_k, A_k*) for k = 0 .. depth()-1.
  const OperatorPair& ladder(std::size_t k) const { return ladders_.at(k); }
  IndexRange deep_interior(std::size_t k) const {
    return space(k).grid().deep_interior(guard_);
  }

  /// A_k* A_k as a dense matrix on the level-k grid.
  Matrix product_down(std::size_t k) const {
    return ladder(k).adjoint.to_matrix() * ladder(k).op.to_matrix();
  }
  /// A_k A_k* as a dense matrix on the level-(k+1) grid.
  Matrix product_up(std::size_t k) const {
    return ladder(k).op.to_matrix() * ladder(k).adjoint.to_matrix();
  }

  /// Check the factorization between every pair of consecutive levels;
  /// a level passes when its residual is at most rel_tol * max(1, scale).
  /// Returns true when all pass.
  bool verify(double rel_tol);

  /// Whether A_k A_k* = a_k A_{k+1}* A_{k+1} + b_k passed verify().
  bool verified(std::size_t k) const {
    return k < verified_.size() && verified_[k];
  }

private:
  void check_weight_recurrence(std::size_t k) const {
    const auto& prev = levels_[k - 1];
    const auto& cur = levels_[k];
    if (cur.grid.size() + 1 != prev.grid.size() || !prev.grid.has_prefix(cur.grid))
      throw ChainError("level " + std::to_string(k) + " grid must drop the top point");
    for (std::size_t i = 0; cur.grid.in_kappa(i); ++i) {
      const double expect = prev.eta[i] * prev.rho[i];
      if (std::abs(cur.rho[i] - expect) > 1e-12 * std::abs(expect))
        throw ChainError("rho_" + std::to_string(k) + " != eta rho at index " +
                         std::to_string(i));
    }
  }

  std::vector<StructuralLevel> levels_;
  std::size_t guard_;
  std::vector<WeightedSpace> spaces_;
  std::vector<OperatorPair> ladders_;
  std::vector<bool> verified_;
};

struct FactorizationResidual {
  double residual = 0.0; // max entry of A_kA_k* − a A_{k+1}*A_{k+1} − b
  double scale = 0.0;    // max entry of A_kA_k* on the same rows
};

/// Matrix residual of A_k A_k* = a_k A_{k+1}* A_{k+1} + b_k over the rows of
/// the deep interior of the level-(k+1) grid (all columns).
inline FactorizationResidual factorization_residual_detail(const FactorChain& chain,
                                                           std::size_t k) {
  if (k + 1 >= chain.depth())
    throw ChainError("factorization_residual needs levels k and k+1");
  const Matrix up = chain.product_up(k);
  const Matrix down = chain.product_down(k + 1);
  const auto& lv = chain.level(k);
  const IndexRange rows = chain.deep_interior(k + 1);
  FactorizationResidual out;
  for (std::size_t i = rows.lo; i <= rows.hi; ++i)
    for (std::size_t j = 0; j < up.cols(); ++j) {
      const double r = up(i, j) - lv.a * down(i, j) - (i == j ? lv.b : 0.0);
      out.residual = std::max(out.residual, std::abs(r));
      out.scale = std::max(out.scale, std::abs(up(i, j)));
    }
  return out;
}

inline double factorization_residual(const FactorChain& chain, std::size_t k) {
  return factorization_residual_detail(chain, k).residual;
}

inline bool FactorChain::verify(double rel_tol) {
  verified_.assign(depth(), false);
  bool all = true;
  for (std::size_t k = 0; k + 1 < depth(); ++k) {
    const auto r = factorization_residual_detail(*this, k);
    verified_[k] = r.residual <= rel_tol * std::max(1.0, r.scale);
    all = all && verified_[k];
  }
  return all;
}

} // namespace tsfact
