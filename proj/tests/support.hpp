#pragma once

// Shared fixtures and hand-rolled random generators for the test suites.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tsfact/tsfact.hpp"

namespace tsfact_test {

using namespace tsfact;

class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(eng_);
  }
  long integer(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(eng_); }
  bool coin() { return integer(0, 1) == 1; }
  /// Log-uniform in [lo, hi].
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }

private:
  std::mt19937_64 eng_;
};

/// A grid of random kind with 6..max_points points and random end flags.
inline TimeScaleGrid random_grid(Rng& rng, long max_points = 14) {
  const long n = rng.integer(6, max_points);
  GridParams p;
  p.min_is_true_min = rng.coin();
  p.max_is_true_max = rng.coin();
  switch (rng.integer(0, 3)) {
  case 0: {
    p.a = rng.integer(-20, 20);
    p.b = p.a + n - 1;
    return build_grid(GridKind::integer, p);
  }
  case 1: {
    p.c = rng.uniform(0.5, 3.0);
    p.q = rng.uniform(0.55, 0.9);
    p.count = n - 1;
    return build_grid(GridKind::q_lattice, p);
  }
  case 2: {
    p.c = rng.uniform(0.5, 3.0);
    p.q = rng.uniform(0.55, 0.9);
    p.h = rng.uniform(-0.5, 0.5);
    p.count = n - 1;
    return build_grid(GridKind::qh_lattice, p);
  }
  default: {
    double x = rng.uniform(-5.0, 5.0);
    for (long i = 0; i < n; ++i) {
      p.points.push_back(x);
      x += rng.uniform(0.2, 2.0);
    }
    return build_grid(GridKind::explicit_points, p);
  }
  }
}

inline RealFunction random_values(Rng& rng, std::size_t n, double lo, double hi) {
  RealFunction v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline RealFunction random_weight(Rng& rng, std::size_t n) {
  RealFunction v(n);
  for (auto& x : v) x = rng.log_uniform(0.1, 10.0);
  return v;
}

inline GridFunction random_complex(Rng& rng, std::size_t n) {
  GridFunction v(n);
  for (auto& z : v) z = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  return v;
}

/// Function values x -> f(x) on the grid.
template <class F>
RealFunction sample(const TimeScaleGrid& grid, F f) {
  RealFunction v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid[i]);
  return v;
}

/// A preset chain with every level checked at the preset's tolerance.
inline BuiltChain build_preset(const std::string& name,
                               std::optional<std::pair<long, long>> window = {}) {
  const auto cfg = preset_config(name, window);
  auto built = build_chain(cfg);
  built.chain.verify(cfg.tolerances.comm);
  return built;
}

/// The ℤ example on [lo, hi]: A_0 = xΔ, A_1 = (x+1)Δ + 1, trivial weights,
/// (a_0, b_0) = (1, 0).
inline BuiltChain z_chain(long lo = -10, long hi = 20, bool verify_levels = true) {
  auto built = build_chain(preset_config("z-example", std::pair<long, long>{lo, hi}));
  if (verify_levels) built.chain.verify(1e-10);
  return built;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).max_abs();
}

struct Dataset {
  StructuralLevel l0;
  StructuralLevel l1;
};

/// Random Pearson-consistent level-0 data with (a, b), and level 1 obtained
/// from solve_h_next; returns nothing when the recurrence breaks down.
inline std::optional<Dataset> consistent_dataset(Rng& rng, std::size_t guard = 1) {
  const auto grid = random_grid(rng, 12);
  const std::size_t n = grid.size();
  const auto B = random_weight(rng, n);
  const auto eta = random_weight(rng, n);
  RealFunction A(n, 0.0);
  for (std::size_t i = 0; grid.in_kappa(i); ++i) A[i] = (eta[i] - B[i]) / grid.graininess(i);
  auto rho = pearson_weight(grid, B, A);
  auto l0 = make_first_level(grid, std::move(rho), B, A, random_values(rng, n, 0.5, 3.0),
                             random_values(rng, n, -3.0, 3.0), random_weight(rng, n));
  l0.a = rng.uniform(0.5, 2.0);
  l0.b = rng.uniform(-3.0, 0.0);
  try {
    const auto hs = solve_h_next(l0, l0.a, l0.b, rng.log_uniform(0.1, 10.0), guard);
    auto adv = advance_level(l0, hs.h);
    if (!adv.removable_points.empty()) return std::nullopt;
    return Dataset{std::move(l0), std::move(adv.level)};
  } catch (const PointError&) {
    return std::nullopt;
  }
}

} // namespace tsfact_test
