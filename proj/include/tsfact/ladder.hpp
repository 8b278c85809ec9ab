#pragma once

// Using a verified chain: kernels of A_k and A_k*, transport of eigenpairs
// of A_k*A_k up and down the ladder, the families generated from kernels,
// and a dense symmetric eigensolver to check all of it against.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "tsfact/chain.hpp"
#include "tsfact/error.hpp"
#include "tsfact/hilbert.hpp"
#include "tsfact/matrix.hpp"

namespace tsfact {

struct LadderSolution {
  int level = 0;
  GridFunction values;
  double eigenvalue = 0.0;
  std::string provenance;
  bool annihilated = false;
};

enum class LadderSide { A, A_star };

namespace detail {

/// One two-term constraint p ψ_j + q ψ_{j+1} = 0; j = -1 or j+1 = m leave
/// only one term.
struct TwoTermRow {
  long j;
  double p;
  double q;
};

/// Kernel of a system of two-term rows over m unknowns, one basis vector per
/// maximal run of linked unknowns. Runs containing a forced zero vanish.
inline std::vector<RealFunction> two_term_kernel(const std::vector<TwoTermRow>& rows,
                                                 std::size_t m, bool propagate_down) {
  double scale = 0.0;
  for (const auto& r : rows) scale = std::max({scale, std::abs(r.p), std::abs(r.q)});
  const double tiny = 1e-14 * std::max(scale, 1e-300);

  // ratio[j] links ψ_{j+1} = ratio[j] ψ_j; NaN marks "no link"
  std::vector<double> ratio(m, std::numeric_limits<double>::quiet_NaN());
  std::vector<bool> forced_zero(m, false);
  for (const auto& r : rows) {
    const bool has_p = r.j >= 0 && std::abs(r.p) > tiny;
    const bool has_q = r.j + 1 < static_cast<long>(m) && std::abs(r.q) > tiny;
    if (has_p && has_q) {
      ratio[static_cast<std::size_t>(r.j)] = -r.p / r.q;
    } else if (has_p) {
      forced_zero[static_cast<std::size_t>(r.j)] = true;
    } else if (has_q) {
      forced_zero[static_cast<std::size_t>(r.j + 1)] = true;
    }
  }

  std::vector<RealFunction> basis;
  std::size_t start = 0;
  while (start < m) {
    std::size_t end = start;
    while (end + 1 < m && !std::isnan(ratio[end])) ++end;
    bool dead = false;
    for (std::size_t j = start; j <= end; ++j) dead = dead || forced_zero[j];
    if (!dead) {
      RealFunction v(m, 0.0);
      if (propagate_down) {
        v[end] = 1.0;
        for (std::size_t j = end; j > start; --j) v[j - 1] = v[j] / ratio[j - 1];
      } else {
        v[start] = 1.0;
        for (std::size_t j = start; j < end; ++j) v[j + 1] = ratio[j] * v[j];
      }
      basis.push_back(std::move(v));
    }
    start = end + 1;
  }
  return basis;
}

inline double norm_on(const GridFunction& v, const WeightedSpace& space, IndexRange rows) {
  const auto& d = space.gram_weights();
  double s = 0.0;
  for (std::size_t i = rows.lo; i <= rows.hi && i < v.size(); ++i) s += std::norm(v[i]) * d[i];
  return std::sqrt(s);
}

inline void require_level(const FactorChain& chain, int level, const char* what) {
  if (level < 0 || static_cast<std::size_t>(level) >= chain.depth())
    throw ChainError(std::string(what) + ": level " + std::to_string(level) +
                     " is not part of the chain");
}

} // namespace detail

/// Kernel of A_k (forward recurrence ψ^σ = −φμ/h ψ) or of A_k* (backward
/// recurrence from its closed form). Zeros of the leading coefficient split
/// the grid into independent segments; each contributes one basis element,
/// normalized in the space the operator acts on.
inline std::vector<LadderSolution> kernel_of_ladder(const FactorChain& chain, std::size_t k,
                                                    LadderSide which) {
  detail::require_level(chain, static_cast<int>(k), "kernel_of_ladder");
  const auto& pair = chain.ladder(k);
  std::vector<detail::TwoTermRow> rows;
  std::size_t m = 0;
  const LinearOperator* op = nullptr;
  int level = static_cast<int>(k);
  if (which == LadderSide::A) {
    op = &pair.op;
    m = op->source().size();
    for (std::size_t i = 0; i < op->target().size(); ++i)
      rows.push_back({static_cast<long>(i), op->coefficient(i, 0), op->coefficient(i, +1)});
  } else {
    op = &pair.adjoint;
    m = op->source().size();
    level = static_cast<int>(k) + 1;
    for (std::size_t i = 0; i < op->target().size(); ++i)
      rows.push_back({static_cast<long>(i) - 1, op->coefficient(i, -1),
                      i < m ? op->coefficient(i, 0) : 0.0});
  }
  const WeightedSpace& space = op->source();
  const auto basis = detail::two_term_kernel(rows, m, which == LadderSide::A_star);

  const std::string name =
      (which == LadderSide::A ? "ker A_" : "ker A*_") + std::to_string(k);
  std::vector<LadderSolution> out;
  const double coef_scale = op->to_matrix().max_abs();
  for (const auto& b : basis) {
    GridFunction v = to_complex(b);
    const double nv = norm(v, space);
    if (nv == 0.0) continue; // supported only on the massless top point
    for (auto& z : v) z /= nv;
    const GridFunction r = op->apply(v);
    double res = 0.0, vmax = 0.0;
    for (const auto& z : r) res = std::max(res, std::abs(z));
    for (const auto& z : v) vmax = std::max(vmax, std::abs(z));
    if (res > 1e-10 * coef_scale * vmax)
      throw ChainError(name + ": recurrence solution fails the residual check");
    out.push_back({level, std::move(v), 0.0, name + " at level " + std::to_string(level), false});
  }
  if (out.empty()) throw ChainError(name + ": kernel is empty on this window");
  return out;
}

/// ψ^↑ = A_k ψ with λ^↑ = (λ − b_k)/a_k.
inline LadderSolution raise(const FactorChain& chain, const LadderSolution& sol) {
  detail::require_level(chain, sol.level, "raise");
  const auto k = static_cast<std::size_t>(sol.level);
  if (!chain.verified(k))
    throw ChainError("raise: factorization at level " + std::to_string(k) +
                     " is not verified");
  const auto& lv = chain.level(k);
  const auto& target = chain.space(k + 1);
  LadderSolution up;
  up.level = sol.level + 1;
  up.values = chain.ladder(k).op.apply(sol.values);
  up.eigenvalue = (sol.eigenvalue - lv.b) / lv.a;
  up.provenance = sol.provenance + ", raised to level " + std::to_string(up.level);
  const double n_in = norm(sol.values, chain.space(k));
  const double n_out =
      detail::norm_on(up.values, target, target.grid().trusted_rows(chain.guard_width()));
  if (n_out < 1e-12 * n_in) {
    up.annihilated = true;
    std::fill(up.values.begin(), up.values.end(), Complex{});
  }
  return up;
}

/// ψ^↓ = A*_{k−1} ψ with λ^↓ = a_{k−1} λ + b_{k−1}.
inline LadderSolution lower(const FactorChain& chain, const LadderSolution& sol) {
  if (sol.level < 1 || static_cast<std::size_t>(sol.level) > chain.depth())
    throw ChainError("lower: no level below " + std::to_string(sol.level));
  const auto k = static_cast<std::size_t>(sol.level - 1);
  if (!chain.verified(k))
    throw ChainError("lower: factorization at level " + std::to_string(k) +
                     " is not verified");
  const auto& lv = chain.level(k);
  const auto& target = chain.space(k);
  LadderSolution down;
  down.level = sol.level - 1;
  down.values = chain.ladder(k).adjoint.apply(sol.values);
  down.eigenvalue = lv.a * sol.eigenvalue + lv.b;
  down.provenance = sol.provenance + ", lowered to level " + std::to_string(down.level);
  const double n_in = norm(sol.values, chain.space(k + 1));
  const double n_out =
      detail::norm_on(down.values, target, target.grid().trusted_rows(chain.guard_width()));
  if (n_out < 1e-12 * n_in) {
    down.annihilated = true;
    std::fill(down.values.begin(), down.values.end(), Complex{});
  }
  return down;
}

/// ψ_l^k = A*_k ⋯ A*_{l−1} ψ_l for every kernel element ψ_l of A_l,
/// k < l ≤ max_level. Annihilated results are dropped; so are levels whose
/// kernel is empty on the window.
inline std::vector<LadderSolution> solutions_from_kernels(const FactorChain& chain,
                                                          std::size_t target_level,
                                                          std::size_t max_level) {
  if (max_level >= chain.depth())
    throw ChainError("solutions_from_kernels: max level beyond the chain");
  std::vector<LadderSolution> out;
  for (std::size_t l = target_level + 1; l <= max_level; ++l) {
    std::vector<LadderSolution> kern;
    try {
      kern = kernel_of_ladder(chain, l, LadderSide::A);
    } catch (const ChainError&) {
      continue;
    }
    for (auto sol : kern) {
      bool alive = true;
      while (static_cast<std::size_t>(sol.level) > target_level) {
        sol = lower(chain, sol);
        if (sol.annihilated) {
          alive = false;
          break;
        }
      }
      if (alive) out.push_back(std::move(sol));
    }
  }
  return out;
}

/// ‖(A_k*A_k − λ)ψ‖ over the deep interior, divided by ‖ψ‖ in H_k.
inline double eigen_residual(const FactorChain& chain, const LadderSolution& sol) {
  detail::require_level(chain, sol.level, "eigen_residual");
  const auto k = static_cast<std::size_t>(sol.level);
  const auto& space = chain.space(k);
  const double nv = norm(sol.values, space);
  if (nv == 0.0) throw ChainError("eigen_residual: zero-norm function");
  const auto& pair = chain.ladder(k);
  GridFunction r = pair.adjoint.apply(pair.op.apply(sol.values));
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= sol.eigenvalue * sol.values[i];
  return detail::norm_on(r, space, chain.deep_interior(k)) / nv;
}

struct EigenPair {
  double eigenvalue = 0.0;
  GridFunction vector; // unit norm in H_k, zero at the top point
};

struct DenseSpectrum {
  std::vector<EigenPair> pairs; // ascending
  double symmetry_defect = 0.0; // max |T − T^T| / max |T|
  double off_norm = 0.0;
  int sweeps = 0;
};

/// Eigenpairs of A_k*A_k on T^k via T = D^{1/2} M D^{-1/2}, D = diag(ρ_k μ),
/// and cyclic Jacobi.
inline DenseSpectrum dense_spectrum_detail(const FactorChain& chain, std::size_t k) {
  detail::require_level(chain, static_cast<int>(k), "dense_spectrum_oracle");
  const auto& space = chain.space(k);
  const std::size_t m = space.grid().kappa_size();
  const Matrix full = chain.product_down(k);
  const auto& d = space.gram_weights();
  Matrix t(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) t(i, j) = std::sqrt(d[i] / d[j]) * full(i, j);

  DenseSpectrum out;
  double defect = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) defect = std::max(defect, std::abs(t(i, j) - t(j, i)));
  out.symmetry_defect = defect / std::max(t.max_abs(), 1e-300);
  if (out.symmetry_defect > 1e-8)
    throw ChainError("dense_spectrum_oracle: A_k*A_k is not self-adjoint (defect " +
                     std::to_string(out.symmetry_defect) + ")");
  Matrix sym(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) sym(i, j) = 0.5 * (t(i, j) + t(j, i));

  const auto eig = jacobi_eigen(sym);
  out.off_norm = eig.off_norm;
  out.sweeps = eig.sweeps;
  for (std::size_t c = 0; c < m; ++c) {
    EigenPair p;
    p.eigenvalue = eig.values[c];
    p.vector.assign(space.size(), Complex{});
    for (std::size_t i = 0; i < m; ++i) p.vector[i] = eig.vectors(i, c) / std::sqrt(d[i]);
    out.pairs.push_back(std::move(p));
  }
  return out;
}

inline std::vector<EigenPair> dense_spectrum_oracle(const FactorChain& chain, std::size_t k) {
  return dense_spectrum_detail(chain, k).pairs;
}

struct GramReport {
  std::vector<std::vector<Complex>> gram;
  /// Largest |G_ij| between solutions whose eigenvalues differ by more than the gap.
  double max_off_distinct = 0.0;
  /// The same, divided by ‖ψ_i‖‖ψ_j‖.
  double max_relative_off_distinct = 0.0;
};

inline GramReport orthogonality_gram(const std::vector<LadderSolution>& solutions,
                                     const WeightedSpace& space, double gap = 1e-6) {
  GramReport out;
  const std::size_t n = solutions.size();
  for (const auto& s : solutions)
    if (s.level != solutions.front().level)
      throw ChainError("orthogonality_gram: solutions live on different levels");
  out.gram.assign(n, std::vector<Complex>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out.gram[i][j] = inner_product(solutions[i].values, solutions[j].values, space);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double li = solutions[i].eigenvalue, lj = solutions[j].eigenvalue;
      if (std::abs(li - lj) <= gap * std::max({1.0, std::abs(li), std::abs(lj)})) continue;
      const double g = std::abs(out.gram[i][j]);
      const double nn = std::sqrt(out.gram[i][i].real() * out.gram[j][j].real());
      out.max_off_distinct = std::max(out.max_off_distinct, g);
      if (nn > 0.0) out.max_relative_off_distinct = std::max(out.max_relative_off_distinct, g / nn);
    }
  return out;
}

struct EigenMatch {
  double value = 0.0;
  std::size_t oracle_index = 0;
  double oracle_value = 0.0;
  double distance = 0.0;
  /// Another oracle eigenvalue lies within the gap of the matched one.
  bool collision = false;
};

/// Nearest oracle eigenvalue for each transported value.
inline std::vector<EigenMatch> match_eigenvalues(const std::vector<double>& values,
                                                 const std::vector<double>& oracle,
                                                 double gap = 1e-6) {
  if (oracle.empty()) throw ChainError("match_eigenvalues: empty oracle spectrum");
  std::vector<EigenMatch> out;
  for (double v : values) {
    EigenMatch m;
    m.value = v;
    m.distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      const double dist = std::abs(oracle[i] - v);
      if (dist < m.distance) {
        m.distance = dist;
        m.oracle_index = i;
        m.oracle_value = oracle[i];
      }
    }
    for (std::size_t i = 0; i < oracle.size(); ++i)
      if (i != m.oracle_index && std::abs(oracle[i] - m.oracle_value) < gap) m.collision = true;
    out.push_back(m);
  }
  return out;
}

} // namespace tsfact
