#include <gtest/gtest.h>

#include <numbers>

#include "support.hpp"

using namespace tsfact;
using namespace tsfact_test;

namespace {

StructuralLevel trivial_level(const TimeScaleGrid& grid, RealFunction h, RealFunction phi) {
  const std::size_t n = grid.size();
  return make_first_level(grid, RealFunction(n, 1.0), RealFunction(n, 1.0),
                          RealFunction(n, 0.0), std::move(h), std::move(phi));
}

/// A_0 = 3 I, A_1 = √3 I on a cut window of ℤ: 9 = 2·3 + 3, so (a_0, b_0) = (2, 3).
FactorChain multiplier_chain() {
  const auto g = integer_grid(0, 10, false, false);
  auto l0 = trivial_level(g, RealFunction(g.size(), 0.0), RealFunction(g.size(), 3.0));
  l0.a = 2.0;
  l0.b = 3.0;
  auto l1 = advance_level(l0, RealFunction(g.size() - 1, 0.0)).level;
  l1.phi.assign(l1.grid.size(), std::sqrt(3.0));
  FactorChain chain({l0, l1}, 2);
  chain.verify(1e-12);
  return chain;
}

/// Single level with A = Δ on {0..N}, both ends true.
FactorChain delta_chain(long N) {
  const auto g = integer_grid(0, N);
  FactorChain chain({trivial_level(g, RealFunction(g.size(), 1.0),
                                   RealFunction(g.size(), -1.0))},
                    2);
  chain.verify(1e-12);
  return chain;
}

/// Eigenvalues of the symmetric tridiagonal matrix (d, e) by Sturm-count bisection.
std::vector<double> tridiagonal_eigenvalues(const std::vector<double>& d,
                                            const std::vector<double>& e) {
  const std::size_t n = d.size();
  auto count_below = [&](double x) {
    std::size_t neg = 0;
    double q = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double off = k == 0 ? 0.0 : e[k - 1] * e[k - 1] / q;
      q = d[k] - x - off;
      if (q == 0.0) q = -1e-300;
      if (q < 0.0) ++neg;
    }
    return neg;
  };
  double lo = 0.0, hi = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = (k > 0 ? std::abs(e[k - 1]) : 0.0) + (k + 1 < n ? std::abs(e[k]) : 0.0);
    lo = std::min(lo, d[k] - r);
    hi = std::max(hi, d[k] + r);
  }
  std::vector<double> out;
  for (std::size_t j = 0; j < n; ++j) {
    double a = lo, b = hi;
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (a + b);
      if (count_below(m) > j) b = m;
      else a = m;
    }
    out.push_back(0.5 * (a + b));
  }
  return out;
}

/// Determinant of (T − λ) by the three-term recurrence of leading minors.
double characteristic_polynomial(const std::vector<double>& d, const std::vector<double>& e,
                                 double lambda) {
  double p_prev = 1.0, p = d[0] - lambda;
  for (std::size_t k = 1; k < d.size(); ++k) {
    const double next = (d[k] - lambda) * p - e[k - 1] * e[k - 1] * p_prev;
    p_prev = p;
    p = next;
  }
  return p;
}

double cosine_distance(const GridFunction& u, const GridFunction& v, const WeightedSpace& s) {
  return 1.0 - std::abs(inner_product(u, v, s)) / (norm(u, s) * norm(v, s));
}

} // namespace

TEST(Kernel, ZExampleLevelZeroConstantsPerSegment) {
  const auto built = z_chain(-10, 20);
  const auto ker = kernel_of_ladder(built.chain, 0, LadderSide::A);
  ASSERT_EQ(ker.size(), 2u);
  const auto& g = built.chain.space(0).grid();
  for (const auto& sol : ker) {
    EXPECT_EQ(sol.level, 0);
    EXPECT_EQ(sol.eigenvalue, 0.0);
    EXPECT_NEAR(norm(sol.values, built.chain.space(0)), 1.0, 1e-14);
  }
  // h_0(0) = 0 separates x ≤ 0 from x ≥ 1
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    const auto& left = ker[0].values;
    const auto& right = ker[1].values;
    if (g[i] <= 0) {
      EXPECT_NEAR(std::abs(left[i] - left[0]), 0.0, 1e-15);
      EXPECT_EQ(right[i], Complex(0.0));
    } else if (g[i] <= 19) {
      EXPECT_EQ(left[i], Complex(0.0));
      EXPECT_NEAR(std::abs(right[i] - right[11]), 0.0, 1e-15) << g[i];
    }
  }
}

TEST(Kernel, ReciprocalSpansKernelOfLevelOne) {
  const auto built = z_chain(1, 30);
  const auto& chain = built.chain;
  const auto ker = kernel_of_ladder(chain, 1, LadderSide::A);
  ASSERT_EQ(ker.size(), 1u);
  const auto& g = chain.space(1).grid();
  const auto& v = ker[0].values;
  for (std::size_t i = 0; i + 1 < g.size(); ++i)
    EXPECT_NEAR(v[i].real() * g[i], v[0].real() * g[0], 1e-14) << g[i];
  // the exact 1/x is annihilated by A_1 as well
  GridFunction inv(g.size(), 0.0);
  for (std::size_t i = 0; i + 1 < g.size(); ++i) inv[i] = 1.0 / g[i];
  EXPECT_LE(norm(chain.ladder(1).op.apply(inv), chain.space(2)), 1e-12 * norm(inv, chain.space(1)));
}

TEST(Kernel, PureDeltaGivesConstants) {
  const auto chain = delta_chain(8);
  const auto ker = kernel_of_ladder(chain, 0, LadderSide::A);
  ASSERT_EQ(ker.size(), 1u);
  for (std::size_t i = 0; i < 8; ++i)
    EXPECT_NEAR(ker[0].values[i].real(), 1.0 / std::sqrt(8.0), 1e-15);
}

TEST(Kernel, ZExampleAdjointKernel) {
  const auto built = z_chain(-10, 20);
  const auto ker = kernel_of_ladder(built.chain, 0, LadderSide::A_star);
  ASSERT_EQ(ker.size(), 1u);
  EXPECT_EQ(ker[0].level, 1);
  const auto& g = built.chain.space(1).grid();
  for (std::size_t i = 0; i < g.size(); ++i)
    EXPECT_EQ(ker[0].values[i].real(), g[i] == 0 ? 1.0 : 0.0) << g[i];
  const auto image = built.chain.ladder(0).adjoint.apply(ker[0].values);
  for (const auto& z : image) EXPECT_EQ(z, Complex(0.0));
}

TEST(Kernel, MultiplierKeepsOnlyTheUnconstrainedPoint) {
  // A_k has one row fewer than H_k has massive points, so ker A_k is never
  // empty on a window; with h ≡ 0 only the point without a row survives
  const auto chain = multiplier_chain();
  const auto ker = kernel_of_ladder(chain, 0, LadderSide::A);
  ASSERT_EQ(ker.size(), 1u);
  const auto& g = chain.space(0).grid();
  for (std::size_t i = 0; i < g.size(); ++i)
    EXPECT_EQ(ker[0].values[i].real(), i + 2 == g.size() ? 1.0 : 0.0);
  // lowering lands outside the trusted rows
  EXPECT_TRUE(solutions_from_kernels(chain, 0, 1).empty());
}

TEST(Kernel, EmptyWhenEverySegmentIsForcedToZero) {
  const auto chain = multiplier_chain();
  EXPECT_THROW(kernel_of_ladder(chain, 0, LadderSide::A_star), ChainError);
  EXPECT_THROW(kernel_of_ladder(chain, 5, LadderSide::A), ChainError);
}

TEST(Transport, EigenvalueArithmetic) {
  const auto chain = multiplier_chain();
  ASSERT_TRUE(chain.verified(0));
  const auto& g = chain.space(0).grid();
  LadderSolution sol{0, GridFunction(g.size(), 1.0), 7.0, "test", false};
  const auto up = raise(chain, sol);
  EXPECT_EQ(up.level, 1);
  EXPECT_EQ(up.eigenvalue, 2.0);
  EXPECT_FALSE(up.annihilated);
  const auto down = lower(chain, up);
  EXPECT_EQ(down.level, 0);
  EXPECT_EQ(down.eigenvalue, 7.0);
  EXPECT_NE(up.provenance.find("raised to level 1"), std::string::npos);
}

TEST(Transport, ConstantsAreAnnihilatedAtLevelZero) {
  const auto built = z_chain(-10, 20);
  const auto& g = built.chain.space(0).grid();
  const auto up = raise(built.chain, {0, GridFunction(g.size(), 1.0), 0.0, "one", false});
  EXPECT_TRUE(up.annihilated);
  for (const auto& z : up.values) EXPECT_EQ(z, Complex(0.0));
}

TEST(Transport, LoweringOneGivesMinusOne) {
  const auto built = z_chain(-10, 20);
  const auto& chain = built.chain;
  const auto& g1 = chain.space(1).grid();
  const auto down = lower(chain, {1, GridFunction(g1.size(), 1.0), 0.0, "one", false});
  EXPECT_FALSE(down.annihilated);
  EXPECT_EQ(down.eigenvalue, 0.0);
  const auto rows = chain.space(0).grid().trusted_rows(chain.guard_width());
  for (std::size_t i = rows.lo; i <= rows.hi; ++i) EXPECT_EQ(down.values[i], Complex(-1.0));
}

TEST(Transport, ReciprocalIsAnnihilatedOnLowering) {
  const auto built = z_chain(1, 30);
  const auto ker = kernel_of_ladder(built.chain, 1, LadderSide::A);
  const auto down = lower(built.chain, ker.at(0));
  EXPECT_TRUE(down.annihilated);
}

TEST(Transport, RequiresVerifiedLevels) {
  const auto built = z_chain(-10, 20, false);
  const auto& g = built.chain.space(0).grid();
  const LadderSolution sol{0, GridFunction(g.size(), 1.0), 0.0, "x", false};
  EXPECT_THROW(raise(built.chain, sol), ChainError);
  EXPECT_THROW(lower(built.chain, {1, GridFunction(g.size() - 1, 1.0), 0.0, "x", false}),
               ChainError);
  EXPECT_THROW(lower(built.chain, sol), ChainError);
}

TEST(KernelFamilies, SquareSpectrum) {
  const auto built = build_preset("square-spectrum");
  const auto& chain = built.chain;
  const auto sols = solutions_from_kernels(chain, 0, 4);
  ASSERT_EQ(sols.size(), 4u);
  for (std::size_t l = 1; l <= 4; ++l) {
    const auto& s = sols[l - 1];
    EXPECT_EQ(s.level, 0);
    EXPECT_DOUBLE_EQ(s.eigenvalue, static_cast<double>(l * l));
    EXPECT_LE(eigen_residual(chain, s), 1e-10 * s.eigenvalue);
    EXPECT_NE(s.provenance.find("ker A_" + std::to_string(l)), std::string::npos);
  }
  std::vector<double> values, oracle;
  for (const auto& s : sols) values.push_back(s.eigenvalue);
  for (const auto& p : dense_spectrum_oracle(chain, 0)) oracle.push_back(p.eigenvalue);
  for (const auto& m : match_eigenvalues(values, oracle)) {
    EXPECT_LE(m.distance, 1e-8);
    EXPECT_FALSE(m.collision);
  }
}

TEST(KernelFamilies, ZExampleIsDegenerate) {
  for (auto window : {std::pair<long, long>{-10, 20}, std::pair<long, long>{1, 30}}) {
    const auto built = z_chain(window.first, window.second);
    for (const auto& s : solutions_from_kernels(built.chain, 0, 1)) EXPECT_EQ(s.eigenvalue, 0.0);
  }
  EXPECT_THROW(solutions_from_kernels(z_chain().chain, 0, 2), ChainError);
}

TEST(EigenResidual, KernelMemberAndRandomVector) {
  const auto built = z_chain(-10, 20);
  for (const auto& s : kernel_of_ladder(built.chain, 0, LadderSide::A))
    EXPECT_LE(eigen_residual(built.chain, s), 1e-12);
  Rng rng(5);
  const auto n = built.chain.space(0).size();
  const LadderSolution r{0, random_complex(rng, n), 0.0, "random", false};
  EXPECT_GT(eigen_residual(built.chain, r), 0.1);
  EXPECT_THROW(eigen_residual(built.chain, {0, GridFunction(n, 0.0), 0.0, "zero", false}),
               ChainError);
}

TEST(DenseOracle, SecondDifferenceMatchesCharacteristicPolynomial) {
  for (long N = 4; N <= 8; ++N) {
    const auto chain = delta_chain(N);
    const auto pairs = dense_spectrum_oracle(chain, 0);
    // Δ*Δ on {0..N−1}: Neumann-type second difference
    const auto m = static_cast<std::size_t>(N);
    std::vector<double> d(m, 2.0), e(m - 1, -1.0);
    d.front() = 1.0;
    d.back() = 1.0;
    const auto ref = tridiagonal_eigenvalues(d, e);
    ASSERT_EQ(pairs.size(), m);
    for (std::size_t j = 0; j < m; ++j) {
      EXPECT_NEAR(pairs[j].eigenvalue, ref[j], 1e-12) << "N=" << N << " j=" << j;
      EXPECT_NEAR(characteristic_polynomial(d, e, pairs[j].eigenvalue), 0.0, 1e-10);
      const double closed = 4.0 * std::pow(std::sin(std::numbers::pi * j / (2.0 * N)), 2);
      EXPECT_NEAR(pairs[j].eigenvalue, closed, 1e-12);
    }
  }
}

TEST(DenseOracle, PositiveOrthogonalAndAccurate) {
  Rng rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = random_grid(rng, 16);
    const std::size_t n = g.size();
    const auto lv = make_first_level(g, random_weight(rng, n), random_weight(rng, n),
                                     RealFunction(n, 0.0), random_values(rng, n, -2, 2),
                                     random_values(rng, n, -2, 2));
    FactorChain chain({lv}, 1);
    const auto spec = dense_spectrum_detail(chain, 0);
    EXPECT_LE(spec.symmetry_defect, 1e-12);
    double scale = 1.0;
    for (const auto& p : spec.pairs) scale = std::max(scale, std::abs(p.eigenvalue));
    const auto& space = chain.space(0);
    for (std::size_t i = 0; i < spec.pairs.size(); ++i) {
      const auto& p = spec.pairs[i];
      EXPECT_GE(p.eigenvalue, -1e-10 * scale);
      EXPECT_NEAR(norm(p.vector, space), 1.0, 1e-12);
      const LadderSolution s{0, p.vector, p.eigenvalue, "oracle", false};
      EXPECT_LE(eigen_residual(chain, s), 1e-10 * scale);
      for (std::size_t j = 0; j < i; ++j) {
        if (std::abs(p.eigenvalue - spec.pairs[j].eigenvalue) < 1e-6 * scale) continue;
        EXPECT_LE(std::abs(inner_product(p.vector, spec.pairs[j].vector, space)), 1e-9);
      }
    }
  }
}

TEST(LadderProperty, TransportIdentity) {
  for (const char* preset : {"square-spectrum", "q-derivative"}) {
    const auto built = build_preset(preset);
    const auto& chain = built.chain;
    for (std::size_t k = 0; k + 1 < chain.depth(); ++k) {
      if (!chain.verified(k)) continue;
      const auto& space = chain.space(k);
      const auto pairs = dense_spectrum_oracle(chain, k);
      double scale = 1.0;
      for (const auto& p : pairs) scale = std::max(scale, std::abs(p.eigenvalue));
      int raised = 0;
      for (const auto& p : pairs) {
        const LadderSolution s{static_cast<int>(k), p.vector, p.eigenvalue, "oracle", false};
        const auto image = chain.ladder(k).op.apply(p.vector);
        const double an = norm(image, chain.space(k + 1));
        // ‖A_kψ‖² = ⟨ψ, A_k*A_kψ⟩ = λ‖ψ‖²
        EXPECT_NEAR(an * an, p.eigenvalue, 1e-10 * scale) << preset;
        if (an <= 1e-8) continue;
        const auto up = raise(chain, s);
        ASSERT_FALSE(up.annihilated);
        const double lam_up = up.eigenvalue;
        EXPECT_LE(eigen_residual(chain, up), 1e-8 * std::max(1.0, std::abs(lam_up)))
            << preset << " k=" << k << " λ=" << p.eigenvalue;
        const auto back = lower(chain, up);
        EXPECT_LE(cosine_distance(back.values, p.vector, space), 1e-8);
        ++raised;
      }
      EXPECT_GT(raised, 0);
    }
  }
}

TEST(LadderProperty, KernelCoincidence) {
  for (const char* preset : {"square-spectrum", "q-derivative"}) {
    const auto built = build_preset(preset);
    const auto& chain = built.chain;
    for (std::size_t k = 0; k < chain.depth(); ++k) {
      std::vector<LadderSolution> ker;
      try {
        ker = kernel_of_ladder(chain, k, LadderSide::A);
      } catch (const ChainError&) {
      }
      for (const auto& s : ker) EXPECT_LE(eigen_residual(chain, s), 1e-12);
      for (const auto& p : dense_spectrum_oracle(chain, k)) {
        if (std::abs(p.eigenvalue) > 1e-10) continue;
        const auto image = chain.ladder(k).op.apply(p.vector);
        EXPECT_LE(norm(image, chain.space(k + 1)), 1e-8 * norm(p.vector, chain.space(k)));
      }
    }
  }
}

TEST(LadderProperty, QPolynomialsAreOrthogonal) {
  const auto built = build_preset("q-derivative");
  const auto& chain = built.chain;
  std::size_t top = 0;
  while (top + 1 < chain.depth() && chain.verified(top)) ++top;
  ASSERT_GE(top, 3u);
  const auto sols = solutions_from_kernels(chain, 0, top);
  ASSERT_EQ(sols.size(), top);
  const auto report = orthogonality_gram(sols, chain.space(0));
  EXPECT_LE(report.max_relative_off_distinct, 1e-8);
  std::vector<double> values, oracle;
  for (const auto& s : sols) values.push_back(s.eigenvalue);
  for (const auto& p : dense_spectrum_oracle(chain, 0)) oracle.push_back(p.eigenvalue);
  for (const auto& m : match_eigenvalues(values, oracle))
    EXPECT_LE(m.distance, 1e-8 * std::max(1.0, std::abs(m.value)));
}

TEST(Gram, SingleAndRepeatedSolutions) {
  const auto built = build_preset("square-spectrum");
  const auto sols = solutions_from_kernels(built.chain, 0, 2);
  const auto& space = built.chain.space(0);
  const auto one = orthogonality_gram({sols[0]}, space);
  ASSERT_EQ(one.gram.size(), 1u);
  EXPECT_NEAR(one.gram[0][0].real(), std::pow(norm(sols[0].values, space), 2), 1e-12);
  const auto two = orthogonality_gram({sols[1], sols[1]}, space);
  const auto& G = two.gram;
  EXPECT_NEAR(std::abs(G[0][0] * G[1][1] - G[0][1] * G[1][0]), 0.0, 1e-10 * std::norm(G[0][0]));
  EXPECT_EQ(two.max_off_distinct, 0.0);
  auto mixed = sols;
  mixed[0].level = 1;
  EXPECT_THROW(orthogonality_gram(mixed, space), ChainError);
}

TEST(MatchEigenvalues, NearestWithCollisions) {
  const auto m = match_eigenvalues({-0.1, 3.9}, {0.0, 1e-9, 4.0});
  EXPECT_EQ(m[0].oracle_index, 0u);
  EXPECT_TRUE(m[0].collision);
  EXPECT_EQ(m[1].oracle_index, 2u);
  EXPECT_FALSE(m[1].collision);
  EXPECT_NEAR(m[1].distance, 0.1, 1e-15);
  EXPECT_THROW(match_eigenvalues({1.0}, {}), ChainError);
}
