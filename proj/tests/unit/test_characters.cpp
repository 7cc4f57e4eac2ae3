#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "charsum/characters.hpp"
#include "charsum/phase.hpp"

using namespace charsum;

namespace {

// Smallest divisor f of q such that chi is constant on units in each class mod f.
u64 conductor_by_induction(const DirichletCharacter& chi) {
  const u64 q = chi.q();
  for (u64 f : divisors(chi.modulus)) {
    bool ok = true;
    for (u64 x = 1; x <= q && ok; ++x) {
      if (std::gcd(x, q) != 1) continue;
      if (x % f != 1 % f) continue;
      if (*chi.phase(static_cast<i64>(x)) != 0) ok = false;
    }
    if (ok) return f;
  }
  return q;
}

PhaseCounts full_period_counts(const DirichletCharacter& chi) {
  PhaseCounts pc(chi.order);
  for (u64 x = 1; x <= chi.q(); ++x)
    if (auto ph = chi.phase(static_cast<i64>(x))) pc.add(*ph);
  return pc;
}

}  // namespace

TEST(Character, QuadraticModSeven) {
  auto chi = build_character(7, {3});
  EXPECT_EQ(chi.order, 2u);
  for (u64 x = 1; x < 7; ++x) {
    bool square = x == 1 || x == 2 || x == 4;
    EXPECT_EQ(*chi.evaluate(x), RootOfUnity::make(square ? 0 : 1, 2)) << x;
  }
  EXPECT_EQ(*chi.evaluate(10), RootOfUnity::make(1, 2));
}

TEST(Character, GeneratorValueModNine) {
  auto chi = build_character(9, {1});
  EXPECT_EQ(*chi.evaluate(2), RootOfUnity::make(1, 6));
  EXPECT_FALSE(chi.evaluate(6).has_value());
  EXPECT_FALSE(chi.evaluate(0).has_value());
}

TEST(Character, PrincipalIsOneOnUnits) {
  auto chi = principal_character(6);
  EXPECT_EQ(*chi.evaluate(5), RootOfUnity::make(0, 1));
  EXPECT_FALSE(chi.evaluate(4).has_value());
  auto one = principal_character(1);
  EXPECT_EQ(*one.evaluate(17), RootOfUnity::make(0, 1));
}

TEST(Character, IndexOutOfRange) {
  try {
    build_character(9, {6});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IndexOutOfRange);
  }
  EXPECT_THROW(build_character(15, {1}), Error);
}

TEST(Character, AgreesWithGeneratorPowers) {
  // Odd prime powers: chi(g^e) = e(c e / phi).
  for (u64 q : {3u, 9u, 27u, 25u, 49u, 121u, 169u}) {
    auto fm = factor(q);
    auto [p, k] = *fm.factors.begin();
    u64 g = primitive_root(p, k);
    for (u64 c = 0; c < fm.phi; c += 1 + fm.phi / 7) {
      auto chi = build_character(fm, {c});
      u64 x = 1;
      for (u64 e = 0; e < fm.phi; ++e) {
        EXPECT_EQ(*chi.evaluate(x), RootOfUnity::make(static_cast<i64>(c * e % fm.phi), fm.phi));
        x = x * g % q;
      }
    }
  }
  // Powers of two: x = (-1)^a 5^b.
  for (int k = 3; k <= 7; ++k) {
    u64 q = u64{1} << k, half = q / 4;
    for (u64 ia = 0; ia < 2; ++ia)
      for (u64 ib = 0; ib < half; ib += 1 + half / 5) {
        auto chi = build_character(q, {ia * half + ib});
        for (u64 a = 0; a < 2; ++a)
          for (u64 b = 0; b < half; ++b) {
            u64 x = powmod(5, b, q);
            if (a) x = q - x;
            // e(ia a / 2 + ib b / 2^{k-2})
            auto want = RootOfUnity::make(static_cast<i64>(ia * a), 2) * RootOfUnity::make(static_cast<i64>(ib * b), half);
            EXPECT_EQ(*chi.evaluate(x), want) << q << " " << x;
          }
      }
  }
}

TEST(Character, CompletelyMultiplicative) {
  std::mt19937_64 rng(3);
  for (u64 q : {45u, 64u, 63u, 1000u, 9991u, 65536u}) {
    auto fm = factor(q);
    for (int trial = 0; trial < 5; ++trial) {
      auto chi = character_by_rank(fm, rng() % fm.phi);
      for (int i = 0; i < 20000; ++i) {
        u64 x = rng() % q, y = rng() % q;
        auto a = chi.evaluate(x), b = chi.evaluate(y), c = chi.evaluate(x * y);
        ASSERT_EQ(c.has_value(), a.has_value() && b.has_value());
        if (c) {
          ASSERT_EQ(*c, *a * *b);
        }
        ASSERT_EQ(a.has_value(), std::gcd(x, q) == 1);
      }
    }
  }
}

TEST(Character, OrderMatchesPhases) {
  for (u64 q = 1; q <= 64; ++q)
    for (auto& chi : all_characters(q)) {
      u64 g = 0;
      for (u64 x = 1; x <= q; ++x)
        if (auto ph = chi.phase(x)) g = std::gcd(g, *ph);
      u64 order = chi.order / std::gcd(g, chi.order);
      EXPECT_EQ(order, chi.order) << chi.token();
    }
}

TEST(Conductor, Examples) {
  EXPECT_EQ(conductor(principal_character(12)), 1u);
  EXPECT_EQ(conductor(build_character(9, {1})), 9u);
  EXPECT_EQ(conductor(build_character(9, {3})), 3u);
}

TEST(Conductor, MatchesInductionOracle) {
  for (u64 q = 1; q <= 100; ++q)
    for (auto& chi : all_characters(q)) EXPECT_EQ(chi.conductor, conductor_by_induction(chi)) << chi.token();
}

TEST(Conductor, PeriodOnUnits) {
  // chi restricted to units is periodic with period exactly the conductor.
  for (u64 q = 2; q <= 200; q += (q < 60 ? 1 : 7))
    for (auto& chi : all_characters(q)) {
      for (u64 f : divisors(chi.modulus)) {
        bool periodic = true;
        for (u64 x = 1; x <= q && periodic; ++x) {
          auto a = chi.phase(x);
          if (!a) continue;
          for (u64 y = x + f; y <= q; y += f) {
            auto b = chi.phase(y);
            if (b && *b != *a) {
              periodic = false;
              break;
            }
          }
        }
        if (periodic) {
          EXPECT_EQ(f, chi.conductor) << chi.token();
          break;
        }
      }
    }
}

TEST(Orthogonality, ExactZeroForSmallModuli) {
  for (u64 q = 1; q <= 120; ++q)
    for (auto& chi : all_characters(q)) {
      PhaseCounts pc = full_period_counts(chi);
      if (chi.principal())
        EXPECT_FALSE(pc.is_exact_zero());
      else
        EXPECT_TRUE(pc.is_exact_zero()) << chi.token();
    }
}

TEST(PhaseCounts, ReductionDetectsNonzero) {
  PhaseCounts pc(12);
  pc.add(0);
  pc.add(6);
  EXPECT_TRUE(pc.is_exact_zero());  // 1 + (-1)
  pc.add(4);
  EXPECT_FALSE(pc.is_exact_zero());
  pc.add(8);
  pc.add(0, -1);
  pc.add(6, -1);
  EXPECT_FALSE(pc.is_exact_zero());  // 1 + w + w^2 with w = e(1/3) is 0, but here 0 is removed
  pc.add(0);
  EXPECT_TRUE(pc.is_exact_zero());
  PhaseCounts one(1);
  one.add(0, 3);
  EXPECT_NEAR(static_cast<double>(one.value().real()), 3.0, 1e-12);
}

TEST(Decompose, PointwiseProduct) {
  std::mt19937_64 rng(5);
  const std::vector<std::pair<u64, std::vector<u64>>> cases{
      {45, {9, 5}}, {63, {9, 7}}, {360, {8, 45}}, {360, {8, 9, 5}}, {1001, {7, 143}}, {12, {4, 3}}};
  for (auto& [q, split] : cases) {
    auto fm = factor(q);
    for (int i = 0; i < 20; ++i) {
      auto chi = character_by_rank(fm, rng() % fm.phi);
      auto parts = decompose(chi, split);
      for (u64 x = 0; x < q; ++x) {
        auto whole = chi.evaluate(x);
        std::optional<RootOfUnity> prod = RootOfUnity::make(0, 1);
        for (auto& c : parts) {
          auto v = c.evaluate(x);
          if (!v) {
            prod.reset();
            break;
          }
          prod = *prod * *v;
        }
        ASSERT_EQ(whole.has_value(), prod.has_value());
        if (whole) ASSERT_EQ(*whole, *prod);
      }
    }
  }
}

TEST(Decompose, PrincipalAndPrimitive) {
  auto parts = decompose(principal_character(12), {4, 3});
  EXPECT_TRUE(parts[0].principal());
  EXPECT_TRUE(parts[1].principal());
  for (auto& chi : primitive_characters(63)) {
    auto ps = decompose(chi, {9, 7});
    EXPECT_TRUE(ps[0].primitive());
    EXPECT_TRUE(ps[1].primitive());
  }
}

TEST(Decompose, InvalidSplit) {
  auto chi = build_character(45, {1, 1});
  for (std::vector<u64> bad : {std::vector<u64>{3, 15}, {9, 3}, {5, 5}}) {
    try {
      decompose(chi, bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidSplit);
    }
  }
}

TEST(Token, RoundTrip) {
  auto chi = build_character(360, {1, 4, 3});
  EXPECT_EQ(chi.token(), "q=360;idx=1,4,3");
  auto back = parse_character(chi.token());
  EXPECT_EQ(back.indices(), chi.indices());
  EXPECT_EQ(back.q(), 360u);
  EXPECT_EQ(parse_character("q=1;idx=").q(), 1u);
  EXPECT_THROW(parse_character("q=9,idx=1"), Error);
  EXPECT_THROW(parse_character("q=9;idx=x"), Error);
}

TEST(Enumeration, LexicographicOrder) {
  auto all = all_characters(45);
  ASSERT_EQ(all.size(), 24u);
  EXPECT_EQ(all[0].indices(), (std::vector<u64>{0, 0}));
  EXPECT_EQ(all[1].indices(), (std::vector<u64>{0, 1}));
  EXPECT_EQ(all[4].indices(), (std::vector<u64>{1, 0}));
  EXPECT_EQ(all.back().indices(), (std::vector<u64>{5, 3}));
}

TEST(Enumeration, RealCharacters) {
  for (u64 q = 1; q <= 300; ++q) {
    u64 count = 0;
    for (auto& chi : all_characters(q))
      if (chi.order <= 2) ++count;
    EXPECT_EQ(real_characters(q).size(), count) << q;
    for (auto& chi : real_characters(q)) EXPECT_LE(chi.order, 2u);
  }
}

TEST(LogTable, DiskCacheRoundTrip) {
  auto dir = std::filesystem::temp_directory_path() / "charsum_cache_test";
  std::filesystem::remove_all(dir);
  set_cache_dir(dir.string());
  // A modulus not used by other tests in this binary so the table is built here.
  auto chi = build_character(83 * 83, {5});
  EXPECT_TRUE(std::filesystem::exists(dir / "dlog_83_2.bin"));
  auto fresh = detail::build_table(83, 2);
  EXPECT_EQ(fresh->log, chi.components[0].table->log);
  set_cache_dir(std::string("/nonexistent/dir/for/cache"));
  auto t = detail::build_table(89, 1);
  EXPECT_EQ(t->log[1], 0u);
  set_cache_dir(std::nullopt);
  std::filesystem::remove_all(dir);
}
