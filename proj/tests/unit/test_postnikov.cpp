#include <gtest/gtest.h>

#include <random>

#include "charsum/postnikov.hpp"

using namespace charsum;

namespace {

// Phase of e_q(F(q0 u)) computed from F_coeffs with exact rationals.
bool lift_matches(const DirichletCharacter& chi, const PostnikovData& d, u64 B, u64 u) {
  ExactRational F = 0;
  ExactRational y(BigInt(d.q0 * u));
  ExactRational pw = 1;
  BigInt D = d.D;
  for (int s = 1; s <= d.m_prime; ++s) {
    pw *= y;
    ExactRational c = ExactRational(BigInt(B) * D) / ExactRational(s);
    F += (s % 2 ? c : -c) * pw;
  }
  BigInt num = boost::multiprecision::numerator(F), den = boost::multiprecision::denominator(F);
  if (boost::multiprecision::gcd(den, BigInt(d.q)) != 1) return false;
  u64 val = mulmod(big_mod(num, d.q), inverse_mod(big_mod(den, d.q), d.q), d.q);
  auto ph = chi.phase(static_cast<i64>(1 + d.q0 * u));
  return ph && RootOfUnity::make(static_cast<i64>(*ph), chi.order) == RootOfUnity::make(static_cast<i64>(val), d.q);
}

ExactRational closed_form_qj(const FactoredRational& f, int j, const ExactRational& x) {
  ExactRational s = 0;
  for (auto& t : f.terms()) {
    ExactRational base = x - t.root, pw = 1;
    for (int i = 0; i < j; ++i) pw *= base;
    s += ExactRational(t.mult) / pw;
  }
  return s * ExactRational(j % 2 ? 1 : -1) / ExactRational(j);
}

}  // namespace

TEST(Postnikov, NineIndexOne) {
  auto chi = build_character(9, {1});
  auto d = build_postnikov(chi, 3);
  EXPECT_EQ(d.m, 2);
  EXPECT_EQ(d.m_prime, 4);
  EXPECT_EQ(d.D, 8);
  EXPECT_EQ(d.u_coeffs[0], 6u);
  EXPECT_EQ(d.B_class(), "2 mod 3");
  EXPECT_EQ(d.checked, 3u);
  EXPECT_TRUE(d.failures.empty());
  for (u64 u = 0; u < 3; ++u) EXPECT_TRUE(lift_matches(chi, d, d.B, u));
  EXPECT_EQ(d.F_coeffs[1], ExactRational(-16, 2) * ExactRational(1));
}

TEST(Postnikov, ExponentOne) {
  for (auto& chi : primitive_characters(3)) {
    auto d = build_postnikov(chi, 3);
    EXPECT_EQ(d.m, 1);
    EXPECT_EQ(d.B, 1u);
    EXPECT_EQ(d.B_class(), "1 mod 1");
    EXPECT_TRUE(d.failures.empty());
  }
}

TEST(Postnikov, TwentyFiveMatchesBruteForceB) {
  for (auto& chi : primitive_characters(25)) {
    auto d = build_postnikov(chi, 5);
    EXPECT_TRUE(d.failures.empty());
    std::vector<u64> oracle;
    for (u64 B = 1; B <= 25; ++B) {
      if (B % 5 == 0) continue;
      bool ok = true;
      for (u64 u = 0; u < 5 && ok; ++u) ok = lift_matches(chi, d, B, u);
      if (ok) oracle.push_back(B);
    }
    EXPECT_EQ(d.B_solutions, oracle) << chi.token();
    EXPECT_FALSE(oracle.empty());
  }
}

TEST(Postnikov, ExhaustiveSmallFamilies) {
  for (u64 q0 : {3u, 5u, 7u, 11u, 13u, 15u})
    for (int m = 2; m <= 4; ++m) {
      u64 q = ipow(q0, m);
      if (q > 3000) continue;
      for (auto& chi : primitive_characters(q)) {
        auto d = build_postnikov(chi, q0);
        EXPECT_TRUE(d.failures.empty()) << chi.token();
        EXPECT_EQ(std::gcd(d.B, q0), 1u);
        EXPECT_EQ(d.checked, q / q0);
        for (int s = 1; s <= d.m_prime; ++s) {
          ExactRational c = d.F_coeffs[s - 1] * ExactRational(boost::multiprecision::pow(BigInt(q0), s));
          EXPECT_EQ(boost::multiprecision::gcd(boost::multiprecision::denominator(c), BigInt(q0)), 1);
        }
      }
    }
}

TEST(Postnikov, Errors) {
  try {
    build_postnikov(build_character(9, {3}), 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPrimitive);
  }
  EXPECT_THROW(build_postnikov(build_character(9, {1}), 2), Error);
  EXPECT_THROW(build_postnikov(build_character(27, {1}), 9), Error);
}

TEST(Qj, SimpleExamples) {
  auto f = parse_rational("(x)");
  auto fam = qj_coefficients(f, 2);
  ASSERT_EQ(fam.terms.size(), 1u);
  EXPECT_EQ(fam.terms[0].eval(5), ExactRational(1, 5));
  EXPECT_EQ(fam.terms[0].pole_order(0), 1);
  auto fam3 = qj_coefficients(f, 3);
  EXPECT_EQ(fam3.terms[1].eval(3), ExactRational(-1, 18));
  EXPECT_EQ(fam3.terms[1].pole_order(0), 2);
  auto c = qj_coefficients(FactoredRational(), 4);
  for (auto& t : c.terms) EXPECT_TRUE(t.is_zero());
}

TEST(Qj, MatchesClosedFormLogarithm) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Term> ts;
    int n = 1 + trial % 4;
    for (int i = 0; i < n; ++i) ts.push_back({static_cast<i64>(rng() % 9) - 4, static_cast<i64>(rng() % 5) - 2});
    FactoredRational f(ts);
    int m = 2 + trial % 3;
    auto fam = qj_coefficients(f, m, 2 * m);
    for (int s = 1; s <= static_cast<int>(fam.min_t_degree.size()); ++s) EXPECT_GE(fam.min_t_degree[s - 1], s);
    for (int j = 1; j <= 2 * m; ++j)
      for (i64 x : {7, 11, -13, 20}) EXPECT_EQ(fam.terms[j - 1].eval(x), closed_form_qj(f, j, ExactRational(x))) << j;
  }
}

TEST(Qj, TruncationDiffersBeyondTwoM) {
  auto f = parse_rational("(x)");
  auto fam = qj_coefficients(f, 1, 3);  // F truncated at s <= 2
  EXPECT_NE(fam.terms[2].eval(2), closed_form_qj(f, 3, ExactRational(2)));
}

TEST(QjZeroCount, Examples) {
  auto f1 = parse_rational("(x)");
  auto r1 = qj_zero_count(qj_coefficients(f1, 2).terms[0], f1.degree(), 7);
  EXPECT_EQ(r1.count, 0u);
  EXPECT_TRUE(r1.within_bound);

  auto f2 = parse_rational("(x) (x-1)");
  auto r2 = qj_zero_count(qj_coefficients(f2, 2).terms[0], f2.degree(), 11);
  EXPECT_LE(r2.count, 2u);

  auto f3 = parse_rational("(x) (x-1) (x-2)");
  auto r3 = qj_zero_count(qj_coefficients(f3, 3).terms[1], f3.degree(), 13);
  EXPECT_LE(r3.count, 6u);
  EXPECT_TRUE(r3.within_bound);
}

TEST(QjZeroCount, AgreesWithDirectEvaluation) {
  for (auto text : {"(x) (x-1)", "(x) (x-1) (x-2)", "(x) (x-3)^2 (x+1)^-1", "(x)^-1 (x-2)"}) {
    auto f = parse_rational(text);
    auto fam = qj_coefficients(f, 4);
    for (u64 p : {11u, 13u, 17u, 19u, 23u}) {
      for (auto& qj : fam.terms) {
        auto r = qj_zero_count(qj, f.degree(), p);
        u64 direct = 0;
        for (i64 x = 1; x <= static_cast<i64>(p); ++x) {
          bool pole = false;
          for (auto& t : f.terms())
            if (mod_floor(x - t.root, p) == 0) pole = true;
          if (pole) continue;
          ExactRational v = closed_form_qj(f, qj.j, ExactRational(x));
          if (big_mod(boost::multiprecision::numerator(v), p) == 0) ++direct;
        }
        EXPECT_EQ(r.count, direct) << text << " p=" << p << " j=" << qj.j;
        EXPECT_TRUE(r.within_bound);
      }
    }
  }
}

TEST(QjZeroCount, CompositeBound) {
  auto f = parse_rational("(x) (x-1)");
  auto fam = qj_coefficients(f, 3);
  auto r = qj_zero_count(fam.terms[1], f.degree(), 7 * 11, 7 * 11 * 2);
  EXPECT_TRUE(r.within_bound);
  EXPECT_NEAR(static_cast<double>(r.bound), 16.0 * 2, 1e-9);
}

TEST(ExpansionIdentity, Examples) {
  for (auto& chi : primitive_characters(45)) {
    auto rep = verify_expansion_identity(chi, 3, 2, parse_rational("(x)"));
    EXPECT_TRUE(rep.holds) << chi.token();
    EXPECT_GT(rep.points_checked, 0u);
  }
  auto chi = primitive_characters(175).front();
  auto rep = verify_expansion_identity(chi, 5, 2, parse_rational("(x-1) (x-2)^-1"));
  EXPECT_TRUE(rep.holds);
  auto pr = verify_expansion_identity(principal_character(63), 3, 2, parse_rational("(x-1) (x-2)^-1"));
  EXPECT_TRUE(pr.holds);
}

TEST(ExpansionIdentity, LiteralTruncationNeedsPrimesAboveM) {
  auto chi = primitive_characters(27 * 5).front();
  auto f = parse_rational("(x)");
  auto literal = verify_expansion_identity(chi, 3, 3, f, Truncation::Literal);
  auto complete = verify_expansion_identity(chi, 3, 3, f, Truncation::Complete);
  EXPECT_FALSE(literal.holds);
  EXPECT_TRUE(complete.holds);
  EXPECT_EQ(complete.js, (std::vector<int>{1, 2, 3}));
}

TEST(ExpansionIdentity, BadSplit) {
  auto chi = primitive_characters(45).front();
  try {
    verify_expansion_identity(chi, 5, 2, parse_rational("(x)"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadSplit);
  }
}

TEST(ExpansionIdentity, FiniteDifferenceOracle) {
  // Recover T_1, T_2 from chi_1 phases at t = 1, 2 and compare with the series coefficients.
  const u64 q1 = 5, q1m = 125;
  auto f = parse_rational("(x-1) (x-2)^-1");
  for (auto& chi1 : primitive_characters(q1m)) {
    PostnikovData pd = solve_postnikov(chi1, q1, false);
    auto js = expansion_indices(q1, 3, Truncation::Complete);
    ASSERT_EQ(js, (std::vector<int>{1, 2}));
    auto fam = qj_coefficients(f, 3, 2);
    const u64 inv2 = inverse_mod(2, q1m);
    for (i64 x = 0; x < 125; ++x) {
      if (!chi_of(chi1, f, x)) continue;
      auto phase_at = [&](u64 t) {
        u64 a = *chi_of(chi1, f, x + static_cast<i64>(t * q1));
        u64 b = *chi_of(chi1, f, x);
        u64 d = (a + chi1.order - b) % chi1.order;
        return d * q1m / chi1.order;  // exact: the ratio is a q1^m-th root of unity
      };
      u64 p1 = phase_at(1), p2 = phase_at(2);
      u64 T2 = mulmod((p2 + 2 * q1m - 2 * p1 % q1m) % q1m, inv2, q1m);
      u64 T1 = (p1 + q1m - T2) % q1m;
      auto T = expansion_terms(fam, js, BigInt(pd.B) * pd.D, q1, 3, x);
      EXPECT_EQ(T[1], T1);
      EXPECT_EQ(T[2], T2);
    }
  }
}
