#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "charsum/ratfunc.hpp"

using namespace charsum;

namespace {

FactoredRational random_rational(std::mt19937_64& rng, int max_terms = 4) {
  std::vector<Term> ts;
  int n = 1 + static_cast<int>(rng() % max_terms);
  for (int i = 0; i < n; ++i) {
    i64 d = static_cast<i64>(rng() % 5) - 2;
    if (d == 0) d = 1;
    ts.push_back({static_cast<i64>(rng() % 61) - 30, d});
  }
  return FactoredRational(ts);
}

}  // namespace

TEST(FactoredRational, CanonicalForm) {
  FactoredRational f({{2, -1}, {1, 1}, {2, 0}, {-3, 2}});
  EXPECT_EQ(f.to_string(), "(x+3)^2 (x-1) (x-2)^-1");
  EXPECT_EQ(f.degree(), 4);
  EXPECT_EQ(FactoredRational({{0, 1}}).to_string(), "(x)");
  EXPECT_EQ(FactoredRational({{1, 1}, {1, -1}}).to_string(), "1");
}

TEST(FactoredRational, ParseRoundTrip) {
  for (std::string text : {"(x-1) (x-2)^-1", "(x)", "(x+3)^2 (x-1) (x-2)^-1", "1"})
    EXPECT_EQ(parse_rational(text).to_string(), text);
  EXPECT_EQ(parse_rational("(x-1)*(x-2)^(-1)").to_string(), "(x-1) (x-2)^-1");
  EXPECT_EQ(parse_rational("x").to_string(), "(x)");
  EXPECT_EQ(parse_rational("").to_string(), "1");
  EXPECT_THROW(parse_rational("(y-1)"), Error);
  EXPECT_THROW(parse_rational("(x-1"), Error);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    auto f = random_rational(rng);
    EXPECT_EQ(parse_rational(f.to_string()), f);
  }
}

TEST(ReduceModP, Examples) {
  EXPECT_TRUE(reduce_mod_p(parse_rational("(x-1) (x-8)^-1"), 7).is_constant());
  EXPECT_EQ(reduce_mod_p(parse_rational("(x-1) (x-2)"), 5).to_string(), "(x-1) (x-2)");
  EXPECT_EQ(reduce_mod_p(parse_rational("(x-3) (x-13) (x-2)^-1"), 5).to_string(), "(x-2)^-1 (x-3)^2");
}

TEST(ReduceModP, PreservesEvaluation) {
  std::mt19937_64 rng(2);
  for (u64 p : {2u, 3u, 5u, 7u, 11u, 13u, 17u, 19u, 23u, 29u, 31u, 37u, 41u, 43u, 47u}) {
    for (int i = 0; i < 30; ++i) {
      auto f = random_rational(rng);
      auto g = reduce_mod_p(f, p);
      for (i64 x = 0; x < static_cast<i64>(p); ++x) {
        auto a = f.eval_mod(x, p);
        if (!a) continue;
        auto b = g.eval_mod(x, p);
        ASSERT_TRUE(b.has_value());
        EXPECT_EQ(*a, *b);
      }
    }
  }
}

TEST(SatisfiesStar, Examples) {
  EXPECT_TRUE(satisfies_star(parse_rational("(x-1) (x-2)^-1"), 7));
  EXPECT_FALSE(satisfies_star(parse_rational("(x-1)^2"), 5));
  EXPECT_TRUE(satisfies_star(parse_rational("(x-1) (x-6) (x-2)^-1"), 5));
  EXPECT_FALSE(satisfies_star(parse_rational("(x-1) (x-6)"), 5));
}

TEST(Admissible, Examples) {
  auto r = admissible(parse_rational("(x-1) (x-2)^-1"), 105, 105, 0.3L);
  EXPECT_TRUE(r.admissible);
  EXPECT_EQ(r.good_product, 105u);
  EXPECT_EQ(r.good_primes, (std::vector<u64>{3, 5, 7}));

  // No good primes: fails whenever q_bar / q_r^tau >= 1.
  auto sq = admissible(parse_rational("(x-1)^2"), 105, 105, 0.5L);
  EXPECT_FALSE(sq.admissible);
  EXPECT_TRUE(sq.good_primes.empty());

  long double tau = std::log(2.0L) / std::log(15.0L);
  auto r2 = admissible(parse_rational("(x-1) (x-16) (x-2)^-1"), 15, 15, tau);
  EXPECT_EQ(r2.good_product, 15u);
  EXPECT_TRUE(r2.admissible);
}

TEST(Admissible, Errors) {
  auto f = parse_rational("(x-1)");
  try {
    admissible(f, 45, 45, 0.5L);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotSquarefree);
  }
  try {
    admissible(f, 2, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LogLogUndefined);
  }
  EXPECT_THROW(admissible(f, 7, 15, 0.5L), Error);
  auto def = admissible(f, 105, 105);
  EXPECT_TRUE(def.tau_defaulted);
  EXPECT_NEAR(static_cast<double>(def.tau), 10.0 / std::log(std::log(105.0)), 1e-12);
}

TEST(Admissible, MonotoneInTau) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 500; ++i) {
    auto f = random_rational(rng, 5);
    u64 q = 1155;
    bool was = false;
    for (long double tau = 0; tau <= 1.5L; tau += 0.05L) {
      bool now = admissible(f, q, q, tau).admissible;
      EXPECT_FALSE(was && !now);
      was = now;
    }
  }
}
