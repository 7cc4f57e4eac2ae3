#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "charsum/sums.hpp"

using namespace charsum;

namespace {

cplx naive_sum(const DirichletCharacter& chi, i64 start, u64 N) {
  cplx s{0, 0};
  for (u64 i = 0; i < N; ++i) {
    auto v = chi.value(start + static_cast<i64>(i));
    s += cplx(v.real(), v.imag());
  }
  return s;
}

}  // namespace

TEST(IntervalSum, Examples) {
  auto chi9 = build_character(9, {1});
  auto full = interval_char_sum(chi9, 1, 9);
  ASSERT_TRUE(full.counts);
  EXPECT_TRUE(full.counts->is_exact_zero());
  EXPECT_EQ(full.magnitude, 0.0L);

  auto quad = build_character(7, {3});
  EXPECT_EQ(interval_char_sum(quad, 1, 6).magnitude, 0.0L);
  EXPECT_NEAR(static_cast<double>(interval_char_sum(quad, 1, 2).magnitude), 2.0, 1e-15);

  auto four = interval_char_sum(chi9, 1, 4);
  cplx want = cplx(1, 0) + std::polar(1.0L, 2 * M_PIl / 6) + std::polar(1.0L, 2 * M_PIl / 3);
  EXPECT_NEAR(static_cast<double>(std::abs(four.value - want)), 0.0, 1e-15);
  EXPECT_NEAR(static_cast<double>(four.magnitude), 2.0, 1e-15);
  EXPECT_NEAR(static_cast<double>(four.ratio), 0.5, 1e-15);
}

TEST(IntervalSum, FullPeriodsVanishExactly) {
  for (u64 q = 2; q <= 300; q += 7)
    for (auto& chi : all_characters(q)) {
      auto r = interval_char_sum(chi, 17, 3 * q);
      ASSERT_TRUE(r.counts);
      EXPECT_EQ(r.counts->is_exact_zero(), !chi.principal()) << chi.token();
      EXPECT_TRUE(r.wrapped);
    }
}

TEST(IntervalSum, MatchesNaiveAcrossWraps) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 200; ++i) {
    u64 q = 2 + rng() % 500;
    auto fm = factor(q);
    auto chi = character_by_rank(fm, rng() % fm.phi);
    i64 start = static_cast<i64>(rng() % 2000) - 1000;
    u64 N = 1 + rng() % (3 * q);
    auto r = interval_char_sum(chi, start, N);
    EXPECT_NEAR(static_cast<double>(std::abs(r.value - naive_sum(chi, start, N))), 0.0, 1e-9);
    EXPECT_LE(r.ratio, 1 + 1e-9L);
    EXPECT_EQ(r.wrapped, N > q);
  }
}

TEST(PhaseCountsValue, MatchesTermwiseSum) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 100; ++i) {
    u64 n = 1 + rng() % 360;
    PhaseCounts pc(n);
    long double terms = 0;
    cplx direct{0, 0};
    for (int k = 0; k < 50; ++k) {
      u64 idx = rng() % n;
      pc.add(idx);
      direct += std::polar(1.0L, 2 * M_PIl * idx / n);
      terms += 1;
    }
    EXPECT_LE(static_cast<double>(std::abs(pc.value() - direct)), 1e-12 * terms);
  }
}

TEST(CompleteSum, QuadraticSevenXSquaredPlusOne) {
  auto quad = build_character(7, {3});
  auto r = complete_twisted_sum(quad, std::vector<i64>{1, 0, 1});
  EXPECT_NEAR(static_cast<double>(r.value.real()), -1.0, 1e-15);
  EXPECT_LE(r.magnitude, 2 * std::sqrt(7.0L));
}

TEST(CompleteSum, PrincipalCountsUnits) {
  auto f = parse_rational("(x-1) (x-2)^-1");
  auto r = complete_twisted_sum(principal_character(35), f);
  u64 units = 0;
  for (i64 x = 1; x <= 35; ++x)
    if (std::gcd(mod_floor(x - 1, 35), u64{35}) == 1 && std::gcd(mod_floor(x - 2, 35), u64{35}) == 1) ++units;
  EXPECT_NEAR(static_cast<double>(r.value.real()), static_cast<double>(units), 1e-12);
}

TEST(CompleteSum, ProductOverPrimesOfFifteen) {
  auto f = parse_rational("(x-1) (x-2)^-1");
  for (auto& chi : all_characters(15)) {
    auto m = weil_prime_multiplicativity(chi, f);
    EXPECT_TRUE(m.exact_equal) << chi.token();
    EXPECT_NEAR(static_cast<double>(m.full_magnitude), static_cast<double>(m.product_magnitude), 1e-9);
  }
}

TEST(CompleteSum, MultiplicativityForSquarefreeModuli) {
  std::mt19937_64 rng(21);
  std::vector<FactoredRational> fs{parse_rational("(x-1) (x-2)^-1"), parse_rational("(x) (x-3)^2 (x+4)"),
                                   parse_rational("(x-5)^-1 (x-7)^-2")};
  int tested = 0;
  for (u64 q = 6; q <= 3000 && tested < 120; q += 1 + rng() % 40) {
    auto fm = factor(q);
    if (!fm.squarefree() || fm.omega < 2) continue;
    auto chi = character_by_rank(fm, rng() % fm.phi);
    for (auto& f : fs) {
      auto m = weil_prime_multiplicativity(chi, f);
      EXPECT_TRUE(m.exact_equal) << chi.token() << " " << f.to_string();
      EXPECT_NEAR(static_cast<double>(m.full_magnitude), static_cast<double>(m.product_magnitude),
                  1e-9 * std::max<double>(1.0, static_cast<double>(m.product_magnitude)));
    }
    ++tested;
  }
  EXPECT_GT(tested, 50);
}

TEST(MixedSum, ZeroPolynomialMatchesIntervalSum) {
  auto chi = build_character(101, {7});
  auto a = mixed_sum(chi, RealPolynomial{{0.0L, 0.0L}}, 3, 250);
  auto b = interval_char_sum(chi, 3, 250);
  EXPECT_EQ(a.value, b.value);
}

TEST(MixedSum, GeometricOracle) {
  auto chi = principal_character(1);
  const u64 M = 37, N = 100;
  const long double a = 5;
  RealPolynomial P{{0.0L, 2 * M_PIl * a / M}};
  auto r = mixed_sum(chi, P, 1, N);
  long double want = std::abs(std::sin(M_PIl * N * a / M) / std::sin(M_PIl * a / M));
  EXPECT_NEAR(static_cast<double>(r.magnitude), static_cast<double>(want), 1e-9);
}

TEST(MixedSum, QuadraticPhaseRatioBounded) {
  auto chi = build_character(101, {50});
  auto r = mixed_sum(chi, RealPolynomial{{0.0L, 0.0L, 0.1L}}, 1, 101);
  EXPECT_LE(r.ratio, 1.0L);
  EXPECT_GT(r.magnitude, 0.0L);
}

TEST(MixedSum, DeterministicAcrossThreadCounts) {
  auto chi = build_character(1009, {5});
  RealPolynomial P{{0.3L, 0.01L, 0.0007L}};
  set_thread_limit(1);
  auto a = mixed_sum(chi, P, 1, 200000);
  set_thread_limit(4);
  auto b = mixed_sum(chi, P, 1, 200000);
  set_thread_limit(0);
  EXPECT_EQ(a.value, b.value);
}

TEST(TwistedSum, Examples) {
  auto chi = build_character(13, {4});
  EXPECT_EQ(twisted_t_sum(chi, 0, 1, 50).value, interval_char_sum(chi, 1, 50).value);
  auto r = twisted_t_sum(principal_character(2), 10, 1, 1000);
  EXPECT_LT(r.magnitude, 1000.0L);
  cplx direct{0, 0};
  for (int n = 1; n <= 1000; n += 2) direct += std::polar(1.0L, 10 * std::log(static_cast<long double>(n)));
  EXPECT_NEAR(static_cast<double>(std::abs(r.value - direct)), 0.0, 1e-9);
  auto r13 = twisted_t_sum(chi, 5, 1, 13 * 50);
  EXPECT_LE(r13.ratio, 1.0L);
}

TEST(ExpSum, Examples) {
  auto half = exp_sum(1, 2, 1, {}, 4);
  EXPECT_EQ(half.sum.magnitude, 0.0L);
  auto gauss = exp_sum(1, 5, 2, {}, 5);
  EXPECT_NEAR(static_cast<double>(gauss.sum.magnitude), std::sqrt(5.0), 1e-12);
  auto cubic = exp_sum(3, 17, 3, {0.0L, 0.01L}, 17);
  EXPECT_TRUE(cubic.window_ok);
  cplx direct{0, 0};
  for (int n = 1; n <= 17; ++n) direct += std::polar(1.0L, 2 * M_PIl * (3.0L * n * n * n / 17 + 0.01L * n));
  EXPECT_NEAR(static_cast<double>(cubic.sum.magnitude), static_cast<double>(std::abs(direct)), 1e-9);
  EXPECT_FALSE(exp_sum(1, 5, 2, {}, 2).window_ok);
  EXPECT_FALSE(exp_sum(1, 5, 2, {}, 7).window_ok);
}

TEST(ExpSum, GaussSumsByEnumeration) {
  for (u64 p : {3u, 7u, 11u, 13u, 101u})
    for (i64 a = 1; a < 3; ++a) {
      auto r = exp_sum(a, p, 2, {}, p);
      EXPECT_NEAR(static_cast<double>(r.sum.magnitude), std::sqrt(static_cast<double>(p)), 1e-9);
    }
}

TEST(PolyaVinogradov, Examples) {
  auto m7 = polya_vinogradov_max(build_character(7, {3}));
  EXPECT_NEAR(static_cast<double>(m7.max_partial), 2.0, 1e-12);
  EXPECT_EQ(m7.argmax, 3u);
  auto m11 = polya_vinogradov_max(build_character(11, {5}));
  EXPECT_LE(m11.max_partial, std::sqrt(11.0L) * std::log(11.0L));
  EXPECT_GE(m11.max_partial, 1.0L);
  try {
    polya_vinogradov_max(principal_character(7));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PrincipalCharacter);
  }
}

TEST(PolyaVinogradov, MatchesNaivePartialSums) {
  for (u64 q = 3; q <= 150; q += 5)
    for (auto& chi : all_characters(q)) {
      if (chi.principal()) continue;
      long double best = -1;
      u64 arg = 0;
      for (u64 x = 1; x <= q; ++x) {
        long double m = x == 1 ? 0 : std::abs(naive_sum(chi, 1, x - 1));
        if (m > best + 1e-9L) {
          best = m;
          arg = x;
        }
      }
      auto r = polya_vinogradov_max(chi);
      EXPECT_NEAR(static_cast<double>(r.max_partial), static_cast<double>(best), 1e-9);
      EXPECT_EQ(r.argmax, arg) << chi.token();
    }
}
