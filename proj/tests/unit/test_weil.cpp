#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "charsum/sums.hpp"
#include "charsum/weil.hpp"

using namespace charsum;

namespace {

std::vector<u64> poly_mul(const std::vector<u64>& a, const std::vector<u64>& b, u64 p) {
  std::vector<u64> r(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] = (r[i + j] + a[i] * b[j]) % p;
  return r;
}

bool is_rth_power_naive(const std::vector<u64>& f, u64 p, int r) {
  int d = static_cast<int>(f.size()) - 1;
  if (d % r) return false;
  for (auto& g : all_monic(p, d / r)) {
    std::vector<u64> acc{1};
    for (int i = 0; i < r; ++i) acc = poly_mul(acc, g, p);
    if (acc == f) return true;
  }
  return false;
}

// f(x + c) and lambda^{-d} f(lambda x), monic of the same degree.
std::vector<u64> transform(const std::vector<u64>& f, u64 c, u64 lambda, u64 p) {
  int d = static_cast<int>(f.size()) - 1;
  std::vector<u64> g(d + 1, 0);
  std::vector<u64> pw{1};
  std::vector<u64> lin{c % p, lambda % p};  // lambda x + c
  for (int k = 0; k <= d; ++k) {
    for (std::size_t i = 0; i < pw.size(); ++i) g[i] = (g[i] + f[k] * pw[i]) % p;
    pw = poly_mul(pw, lin, p);
  }
  u64 inv = inverse_mod(powmod(lambda, d, p), p);
  for (auto& v : g) v = v * inv % p;
  return g;
}

}  // namespace

TEST(WeilOrbits, RepresentativesCoverEveryMonicPolynomial) {
  for (u64 p : {5u, 7u, 11u})
    for (int d = 1; d <= 4; ++d) {
      if (d % static_cast<int>(p) == 0) continue;
      auto reps = weil_orbit_representatives(p, d);
      std::set<std::vector<u64>> covered;
      for (auto& r : reps)
        for (u64 c = 0; c < p; ++c)
          for (u64 l = 1; l < p; ++l) covered.insert(transform(r, c, l, p));
      EXPECT_EQ(covered.size(), ipow(p, d)) << p << " " << d;
      EXPECT_LT(reps.size(), ipow(p, d)) ;
    }
}

TEST(WeilOrbits, RthPowerSetsMatchNaiveTest) {
  for (u64 p : {3u, 5u, 7u})
    for (int r = 2; r <= 4; ++r)
      for (int e = 1; e * r <= 4; ++e) {
        auto set = detail::rth_powers(p, e, r);
        EXPECT_EQ(set.size(), ipow(p, e));
        for (auto& f : all_monic(p, e * r))
          EXPECT_EQ(set.count(detail::encode_poly(f, p)) > 0, is_rth_power_naive(f, p, r));
      }
}

TEST(WeilScan, MatchesNaiveCharacterSums) {
  for (u64 p : {3u, 5u, 7u, 11u})
    for (int d = 1; d <= 3; ++d) {
      auto polys = all_monic(p, d);
      auto st = weil_check_polys(p, d, polys);
      u64 instances = 0, skipped = 0, violations = 0;
      long double max_ratio = 0;
      for (u64 c = 1; c + 1 < p; ++c) {
        auto chi = build_character(p, {c});
        for (auto& f : polys) {
          if (d % static_cast<int>(chi.order) == 0 && is_rth_power_naive(f, p, static_cast<int>(chi.order))) {
            ++skipped;
            continue;
          }
          ++instances;
          std::vector<i64> coeffs(f.begin(), f.end());
          auto s = complete_twisted_sum(chi, coeffs);
          long double bound = d * std::sqrt(static_cast<long double>(p));
          if (s.magnitude > bound * (1 + 1e-9L)) ++violations;
          max_ratio = std::max(max_ratio, s.magnitude / bound);
        }
      }
      EXPECT_EQ(st.instances, instances);
      EXPECT_EQ(st.skipped, skipped);
      EXPECT_EQ(st.violations, violations);
      EXPECT_NEAR(static_cast<double>(st.max_ratio), static_cast<double>(max_ratio), 1e-9);
    }
}

TEST(WeilScan, ReducedAgreesWithFullEnumeration) {
  auto full = weil_scan(23, 4, true);
  auto reduced = weil_scan(23, 4, false);
  EXPECT_EQ(full.violations, 0u);
  EXPECT_EQ(reduced.violations, 0u);
  EXPECT_NEAR(static_cast<double>(full.max_ratio), static_cast<double>(reduced.max_ratio), 1e-9);
  EXPECT_EQ(full.monic_covered, reduced.monic_covered);
  EXPECT_LT(reduced.polynomials_checked, full.polynomials_checked);
  EXPECT_GT(full.skipped_rth_powers, 0u);
  EXPECT_LE(full.max_ratio, 1.0L);
}

TEST(WeilScan, SquaresAreSkippedForQuadraticCharacter) {
  // x^2 is a square, so the quadratic character gives |sum| = p - 1 > 2 sqrt p; it must be skipped.
  auto st = weil_check_polys(13, 2, {{0, 0, 1}});
  EXPECT_EQ(st.skipped, 1u);
  EXPECT_EQ(st.violations, 0u);
  EXPECT_EQ(st.instances, 10u);
}
