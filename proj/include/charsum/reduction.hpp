#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "charsum/arith.hpp"
#include "charsum/characters.hpp"
#include "charsum/condition.hpp"
#include "charsum/error.hpp"
#include "charsum/parallel.hpp"
#include "charsum/phase.hpp"
#include "charsum/postnikov.hpp"
#include "charsum/ratfunc.hpp"
#include "charsum/sums.hpp"

namespace charsum {

// f(x + q y) / f(x + q y'); the formal degree doubles even when roots cancel.
inline FactoredRational shift_quotient(const FactoredRational& f, i64 q_shift, i64 y, i64 y_prime) {
  FactoredRational out = f.translated(q_shift * y) * f.translated(q_shift * y_prime).reciprocal();
  out.set_formal_degree(2 * f.degree());
  return out;
}

// ---------------------------------------------------------------------------
// Bad pairs (y, y') in [1, M]^2.

enum class BadPairMode { FirstStep, General };

struct BadPairReport {
  BadPairMode mode = BadPairMode::FirstStep;
  u64 q_bar = 1;
  u64 M = 0;
  long double threshold = 0;
  i64 degree = 1;
  std::vector<u64> qualifying;  // divisors Q of q_bar with Q > threshold
  u64 count = 0;                // pairs that are bad
  u64 per_divisor_total = 0;    // sum over qualifying Q of |{Q | y - y'}| (first-step mode)
  ExactRational bound = 0;      // sum over qualifying Q of (M^2 / Q) * degree^omega(Q)
  bool within_bound = true;
  bool m_exceeds_divisors = true;  // M > Q for every qualifying Q
};

namespace detail {

inline std::vector<u64> divisors_above(const FactoredModulus& fm, long double threshold) {
  std::vector<u64> out;
  for (u64 d : divisors(fm))
    if (static_cast<long double>(d) > threshold) out.push_back(d);
  return out;
}

inline ExactRational pair_bound(const std::vector<u64>& qs, u64 M, i64 degree) {
  ExactRational b = 0;
  for (u64 Q : qs) {
    BigInt w = 1;
    int omega = factor(Q).omega;
    for (int i = 0; i < omega; ++i) w *= degree;
    b += ExactRational(BigInt(M) * BigInt(M) * w, BigInt(Q));
  }
  return b;
}

}  // namespace detail

// Pairs with Q | y - y' for some Q | q_r exceeding the threshold.
inline BadPairReport count_bad_pairs_first_step(u64 q_r, u64 M, long double threshold) {
  require(q_r >= 1 && M >= 1, ErrorCode::InvalidArgument, "count_bad_pairs: q_r and M must be positive");
  FactoredModulus fm = factor(q_r);
  if (!fm.squarefree()) fail(ErrorCode::NotSquarefree, "q_r = " + std::to_string(q_r) + " is not squarefree");
  BadPairReport r;
  r.mode = BadPairMode::FirstStep;
  r.q_bar = q_r;
  r.M = M;
  r.threshold = threshold;
  r.qualifying = detail::divisors_above(fm, threshold);
  for (u64 Q : r.qualifying) {
    if (Q >= M) r.m_exceeds_divisors = false;
    for (u64 y = 1; y <= M; ++y)
      for (u64 yp = 1; yp <= M; ++yp)
        if ((y > yp ? y - yp : yp - y) % Q == 0) ++r.per_divisor_total;
  }
  for (u64 y = 1; y <= M; ++y)
    for (u64 yp = 1; yp <= M; ++yp) {
      u64 diff = y > yp ? y - yp : yp - y;
      for (u64 Q : r.qualifying)
        if (diff % Q == 0) {
          ++r.count;
          break;
        }
    }
  r.bound = detail::pair_bound(r.qualifying, M, 1);
  r.within_bound = ExactRational(r.count) <= r.bound;
  return r;
}

// Pairs whose shifted quotient f_{y,y'} fails (*) at primes of q_bar with product above the threshold.
inline BadPairReport count_bad_pairs_general(const FactoredRational& f, u64 q_shift, u64 q_bar, u64 M,
                                             long double threshold) {
  require(q_bar >= 1 && M >= 1, ErrorCode::InvalidArgument, "count_bad_pairs: q_bar and M must be positive");
  FactoredModulus fm = factor(q_bar);
  if (!fm.squarefree()) fail(ErrorCode::NotSquarefree, "q_bar = " + std::to_string(q_bar) + " is not squarefree");
  BadPairReport r;
  r.mode = BadPairMode::General;
  r.q_bar = q_bar;
  r.M = M;
  r.threshold = threshold;
  r.degree = std::max<i64>(1, f.degree());
  r.qualifying = detail::divisors_above(fm, threshold);
  for (u64 Q : r.qualifying)
    if (Q >= M) r.m_exceeds_divisors = false;
  const auto primes = fm.primes();
  auto rows = parallel_chunks<u64>(1, M + 1, 1, [&](u64 lo, u64 hi) {
    u64 c = 0;
    for (u64 y = lo; y < hi; ++y)
      for (u64 yp = 1; yp <= M; ++yp) {
        FactoredRational g = shift_quotient(f, static_cast<i64>(q_shift), static_cast<i64>(y), static_cast<i64>(yp));
        long double bad = 1;
        for (u64 p : primes)
          if (!satisfies_star(g, p)) bad *= static_cast<long double>(p);
        if (bad > threshold) ++c;
      }
    return c;
  });
  for (u64 c : rows) r.count += c;
  r.bound = detail::pair_bound(r.qualifying, M, r.degree);
  r.within_bound = ExactRational(r.count) <= r.bound;
  return r;
}

// ---------------------------------------------------------------------------
// Bad 2k-tuples: y in [1, M]^{2k} is p-bad when {y_i mod p} has at most k elements.

enum class TupleCase { A, APrime, B, C };

inline std::string to_string(TupleCase c) {
  switch (c) {
    case TupleCase::A: return "a";
    case TupleCase::APrime: return "a'";
    case TupleCase::B: return "b";
    case TupleCase::C: return "c";
  }
  return "?";
}

inline TupleCase parse_tuple_case(const std::string& s) {
  if (s == "a") return TupleCase::A;
  if (s == "a'" || s == "a-prime" || s == "aprime") return TupleCase::APrime;
  if (s == "b") return TupleCase::B;
  if (s == "c") return TupleCase::C;
  fail(ErrorCode::ParseError, "unknown tuple case '" + s + "' (expected a, a', b or c)");
}

struct BadTupleReport {
  TupleCase kase = TupleCase::A;
  u64 modulus = 1;
  std::vector<u64> primes;  // primes the predicate ranges over
  u64 M = 0;
  int k = 1;
  u64 total = 0;  // M^{2k}
  u64 count = 0;
  long double bound = 0;         // combinatorial form
  long double bound_closed = 0;  // simplified right-hand form
  bool within_bound = true;
  std::vector<Condition> preconditions;
  bool preconditions_hold = true;
};

namespace detail {

constexpr u64 kTupleCap = 100000000ULL;

inline long double binom(int n, int r) {
  long double b = 1;
  for (int i = 1; i <= r; ++i) b = b * (n - r + i) / i;
  return b;
}

inline int distinct_count(const u64* v, int n) {
  int d = 0;
  for (int i = 0; i < n; ++i) {
    bool seen = false;
    for (int j = 0; j < i && !seen; ++j) seen = v[j] == v[i];
    if (!seen) ++d;
  }
  return d;
}

// Counts tuples that are p-bad for some prime (require_all = false) or for every prime.
inline u64 enumerate_bad_tuples(const std::vector<u64>& primes, u64 M, int k, bool require_all) {
  const int n = 2 * k;
  if (primes.empty()) return require_all ? ipow(M, static_cast<unsigned>(n)) : 0;
  auto rows = parallel_chunks<u64>(1, M + 1, 1, [&](u64 lo, u64 hi) {
    u64 c = 0;
    std::vector<u64> y(n), res(n);
    for (u64 first = lo; first < hi; ++first) {
      y[0] = first;
      for (int i = 1; i < n; ++i) y[i] = 1;
      while (true) {
        bool any = false, all = true;
        for (u64 p : primes) {
          for (int i = 0; i < n; ++i) res[i] = y[i] % p;
          bool bad = distinct_count(res.data(), n) <= k;
          any = any || bad;
          all = all && bad;
        }
        if (require_all ? all : any) ++c;
        int i = n - 1;
        while (i >= 1 && y[i] == M) y[i--] = 1;
        if (i < 1) break;
        ++y[i];
      }
    }
    return c;
  });
  u64 total = 0;
  for (u64 c : rows) total += c;
  return total;
}

}  // namespace detail

// Case a: modulus is a prime p. Case a': modulus is q_r, union over its primes p > sqrt M.
// Case b: modulus is Q_1, tuples bad at every p | Q_1. Case c: modulus is Q, bad at every p | Q.
inline BadTupleReport count_bad_tuples(u64 modulus, u64 M, int k, TupleCase kase) {
  require(modulus >= 2 && M >= 1 && k >= 1, ErrorCode::InvalidArgument,
          "count_bad_tuples: need modulus >= 2, M >= 1, k >= 1");
  long double total = std::pow(static_cast<long double>(M), 2.0L * k);
  if (total > static_cast<long double>(detail::kTupleCap))
    fail(ErrorCode::InstanceTooLarge,
         "M^{2k} = " + std::to_string(static_cast<double>(total)) + " exceeds the enumeration cap 1e8");
  FactoredModulus fm = factor(modulus);
  if (!fm.squarefree()) fail(ErrorCode::NotSquarefree, "modulus " + std::to_string(modulus) + " is not squarefree");
  BadTupleReport r;
  r.kase = kase;
  r.modulus = modulus;
  r.M = M;
  r.k = k;
  r.total = ipow(M, static_cast<unsigned>(2 * k));
  const long double Ml = static_cast<long double>(M), kl = k;
  const long double C2k = detail::binom(2 * k, k);
  const long double sqrtM = std::sqrt(Ml);
  u64 min_p = fm.primes().front();
  auto add = [&](const std::string& label, long double lhs, long double rhs) {
    r.preconditions.push_back({label, true, lhs < rhs, lhs, rhs});
  };

  switch (kase) {
    case TupleCase::A: {
      if (fm.omega != 1) fail(ErrorCode::InvalidArgument, "case a expects a prime modulus");
      const long double p = static_cast<long double>(modulus);
      r.primes = {modulus};
      r.count = detail::enumerate_bad_tuples(r.primes, M, k, false);
      r.bound = C2k * std::pow(Ml, kl) * std::pow(kl, kl) * std::pow(1 + Ml / p, kl);
      r.bound_closed = std::pow(4 * kl, kl) * std::pow(Ml, 1.5L * kl);
      add("p > sqrt(M)", sqrtM, p);
      break;
    }
    case TupleCase::APrime: {
      for (u64 p : fm.primes())
        if (static_cast<long double>(p) > sqrtM) r.primes.push_back(p);
      r.count = detail::enumerate_bad_tuples(r.primes, M, k, false);
      for (u64 p : r.primes)
        r.bound += C2k * std::pow(Ml, kl) * std::pow(kl, kl) * std::pow(1 + Ml / static_cast<long double>(p), kl);
      r.bound_closed = fm.omega * std::pow(4 * kl, kl) * std::pow(Ml, 1.5L * kl);
      add("k < M^(1/5)", kl, std::pow(Ml, 0.2L));
      add("log q_r < M", std::log(static_cast<long double>(modulus)), Ml);
      break;
    }
    case TupleCase::B: {
      r.primes = fm.primes();
      r.count = detail::enumerate_bad_tuples(r.primes, M, k, true);
      long double prod = 1;
      for (u64 p : r.primes) prod *= C2k * std::pow(static_cast<long double>(p), kl) * std::pow(kl, kl);
      const long double Q1 = static_cast<long double>(modulus);
      r.bound = std::pow(Ml / Q1, 2 * kl) * prod;
      r.bound_closed = std::pow(Ml, 2 * kl) / std::pow(Q1, kl / 3);
      add("sqrt(M) < Q_1", sqrtM, Q1);
      add("Q_1 < M", Q1, Ml);
      add("max p | Q_1 <= sqrt(M)", static_cast<long double>(fm.largest_prime), sqrtM + 1e-18L);
      add("k < min p^(1/3)", kl, std::cbrt(static_cast<long double>(min_p)));
      break;
    }
    case TupleCase::C: {
      r.primes = fm.primes();
      r.count = detail::enumerate_bad_tuples(r.primes, M, k, true);
      const long double Q = static_cast<long double>(modulus);
      r.bound = std::pow(Ml, 2 * kl) / std::pow(Q, kl / 3);
      r.bound_closed = r.bound;
      add("Q < M", Q, Ml);
      add("k < min p^(1/3)", kl, std::cbrt(static_cast<long double>(min_p)));
      break;
    }
  }
  r.within_bound = static_cast<long double>(r.count) <= r.bound;
  r.preconditions_hold = all_satisfied(r.preconditions);
  return r;
}

// ---------------------------------------------------------------------------
// Selector for a fixed-point-free map sigma on {1..2k}: |S| = k, each element of S has
// at most one preimage, S1 in S with |S1| = k/2 and sigma(S1) disjoint from S1.

struct MapSelection {
  std::vector<int> S;
  std::vector<int> S1;
};

inline MapSelection select_for_map(const std::vector<int>& sigma) {
  const int n = static_cast<int>(sigma.size());
  if (n == 0 || n % 2 != 0) fail(ErrorCode::InvalidArgument, "sigma must act on {1..2k}");
  for (int i = 0; i < n; ++i) {
    if (sigma[i] < 1 || sigma[i] > n)
      fail(ErrorCode::InvalidArgument, "sigma(" + std::to_string(i + 1) + ") = " + std::to_string(sigma[i]) + " is out of range");
    if (sigma[i] == i + 1) fail(ErrorCode::FixedPointPresent, "sigma fixes " + std::to_string(i + 1));
  }
  const int k = n / 2;
  if (k % 2 != 0) fail(ErrorCode::OddK, "k = " + std::to_string(k) + " is odd, so |S1| = k/2 is not an integer");

  std::vector<int> preimages(n + 1, 0);
  for (int v : sigma) ++preimages[v];
  std::vector<bool> in_u(n + 1, false);
  for (int v = 1; v <= n; ++v) in_u[v] = preimages[v] <= 1;

  // Inside U every vertex has at most one successor and one predecessor, so the
  // components are paths and cycles; take every other vertex along each.
  auto next = [&](int v) { return in_u[sigma[v - 1]] ? sigma[v - 1] : 0; };
  std::vector<int> prev(n + 1, 0);
  for (int v = 1; v <= n; ++v)
    if (in_u[v] && next(v)) prev[next(v)] = v;
  std::vector<bool> visited(n + 1, false), chosen(n + 1, false);
  for (int v = 1; v <= n; ++v) {
    if (!in_u[v] || visited[v] || prev[v]) continue;
    bool take = true;
    for (int w = v; w && !visited[w]; w = next(w)) {
      visited[w] = true;
      chosen[w] = take;
      take = !take;
    }
  }
  for (int v = 1; v <= n; ++v) {
    if (!in_u[v] || visited[v]) continue;
    std::vector<int> cycle;
    for (int w = v; !visited[w]; w = next(w)) {
      visited[w] = true;
      cycle.push_back(w);
    }
    for (std::size_t i = 0; i + 1 < cycle.size(); i += 2) chosen[cycle[i]] = true;
  }

  MapSelection out;
  for (int v = 1; v <= n && static_cast<int>(out.S1.size()) < k / 2; ++v)
    if (chosen[v]) out.S1.push_back(v);
  if (static_cast<int>(out.S1.size()) < k / 2)
    fail(ErrorCode::InvalidArgument, "no independent set of size k/2 among elements with at most one preimage");
  std::vector<bool> in_s1(n + 1, false);
  for (int v : out.S1) in_s1[v] = true;
  out.S = out.S1;
  // Pad with the remaining independent vertices first, then the rest of U.
  for (int pass = 0; pass < 2; ++pass)
    for (int v = 1; v <= n && static_cast<int>(out.S.size()) < k; ++v)
      if (in_u[v] && !in_s1[v] && (pass == 1 || chosen[v])) {
        out.S.push_back(v);
        in_s1[v] = true;
      }
  std::sort(out.S.begin(), out.S.end());
  return out;
}

// ---------------------------------------------------------------------------
// Modulus factorisation q = Q_1 ... Q_{r-1} q_r with q | q_1^{m_1} ... q_{r-1}^{m_{r-1}} q_r.

struct ModulusSplit {
  u64 q = 1;
  u64 N = 0;
  std::vector<u64> blocks;    // Q_s
  std::vector<u64> bases;     // q_s
  std::vector<int> exponents; // m_s
  std::vector<int> exponents_literal;
  u64 q0 = 1;
  int m = 1;
  u64 q_r = 1;
  int r = 1;
  int r_literal = 1;
  long double kappa = 1e-3L;
  std::vector<Condition> flags;
  bool divides = true;        // q | prod q_s^{m_s} * q_r
  bool coprime = true;
  bool bases_below_sqrt_n = true;
};

struct ClaimOptions {
  long double kappa = 1e-3L;
  std::optional<int> exponent_class;  // force the m of q_r = q0^m
};

namespace detail {

// Largest t with N^t <= Q.
inline int floor_log_ratio(u64 Q, u64 N) {
  if (N < 2) return 0;
  int t = 0;
  BigInt acc = N;
  while (acc <= BigInt(Q)) {
    ++t;
    acc *= N;
  }
  return t;
}

// Smallest t with Q^{10} <= N^t, i.e. ceil(10 log Q / log N).
inline int ceil_ten_log_ratio(u64 Q, u64 N) {
  if (Q <= 1) return 0;
  BigInt lhs = boost::multiprecision::pow(BigInt(Q), 10);
  BigInt acc = 1;
  int t = 0;
  while (acc < lhs) {
    ++t;
    acc *= N;
  }
  return t;
}

inline int valuation(u64 n, u64 p) {
  int v = 0;
  while (n % p == 0) {
    n /= p;
    ++v;
  }
  return v;
}

inline void finish_block(ModulusSplit& s, u64 Q) {
  int lit = 10 * floor_log_ratio(Q, s.N);
  int ms = lit > 0 ? lit : std::max(1, ceil_ten_log_ratio(Q, s.N));
  u64 base = 1;
  for (auto& [p, nu] : factor(Q).factors) {
    int nb = nu > ms ? nu / ms + 1 : 1;
    base *= ipow(p, static_cast<unsigned>(nb));
  }
  s.blocks.push_back(Q);
  s.bases.push_back(base);
  s.exponents.push_back(ms);
  s.exponents_literal.push_back(lit);
}

inline void verify_split(ModulusSplit& s) {
  std::vector<u64> all = s.blocks;
  all.push_back(s.q_r);
  s.coprime = true;
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j)
      if (std::gcd(all[i], all[j]) != 1) s.coprime = false;
  for (std::size_t i = 0; i < s.bases.size(); ++i)
    for (std::size_t j = i + 1; j < s.bases.size(); ++j)
      if (std::gcd(s.bases[i], s.bases[j]) != 1 || std::gcd(s.bases[i], s.q_r) != 1) s.coprime = false;
  if (s.bases.size() == 1 && std::gcd(s.bases[0], s.q_r) != 1) s.coprime = false;

  // q | prod q_s^{m_s} q_r checked prime by prime on valuations.
  s.divides = true;
  for (auto& [p, nu] : factor(s.q).factors) {
    long long have = valuation(s.q_r, p);
    for (std::size_t i = 0; i < s.bases.size(); ++i)
      have += static_cast<long long>(valuation(s.bases[i], p)) * s.exponents[i];
    if (have < nu) s.divides = false;
  }
  s.bases_below_sqrt_n = true;
  for (u64 b : s.bases)
    if (u128(b) * b >= s.N) s.bases_below_sqrt_n = false;

  const long double lN = std::log(static_cast<long double>(s.N));
  auto add = [&](const std::string& label, bool ok, long double lhs, long double rhs) {
    s.flags.push_back({label, true, ok, lhs, rhs});
  };
  s.flags.clear();
  const u64 core = factor(s.q).core;
  add("q' > N^(1/100)", boost::multiprecision::pow(BigInt(core), 100) > BigInt(s.N),
      std::log(static_cast<long double>(core)), lN / 100);
  {
    long double lq0 = std::log(static_cast<long double>(s.q0));
    bool lower = std::pow(lN, 0.75L) < lq0;
    bool upper = boost::multiprecision::pow(BigInt(s.q0), 10) < BigInt(s.N);
    add("exp((log N)^(3/4)) < q0", lower, std::pow(lN, 0.75L), lq0);
    add("q0 < N^(1/10)", upper, lq0, lN / 10);
  }
  add("m <= (log N)^(3 kappa)", s.m <= std::pow(lN, 3 * s.kappa), s.m, std::pow(lN, 3 * s.kappa));
  {
    bool ok = true;
    long double worst = 0;
    for (u64 Q : s.blocks) {
      u64 c = factor(Q).core;
      worst = std::max(worst, std::log(static_cast<long double>(c)));
      if (boost::multiprecision::pow(BigInt(c), 5) >= BigInt(s.N)) ok = false;
    }
    add("Q_s' < N^(1/5)", ok, worst, lN / 5);
  }
  add("r = 1 + 10[log Q'/log N]", s.r == s.r_literal, s.r, s.r_literal);
  add("q | q_1^m_1 ... q_r", s.divides, 0, 0);
  {
    long double worst = 0;
    for (u64 b : s.bases) worst = std::max(worst, std::log(static_cast<long double>(b)));
    add("max q_s < N^(1/2)", s.bases_below_sqrt_n, worst, lN / 2);
  }
  {
    bool same = true;
    for (std::size_t i = 0; i < s.exponents.size(); ++i) same = same && s.exponents[i] == s.exponents_literal[i];
    add("m_s = 10[log Q_s/log N]", same, 0, 0);
  }
}

}  // namespace detail

inline ModulusSplit factorize_claim(const FactoredModulus& fq, u64 N, const ClaimOptions& opt = {}) {
  const u64 q = fq.value;
  if (q <= 1) fail(ErrorCode::NoValidClass, "q = 1 has no exponent class");
  if (N < 2 || N >= q) fail(ErrorCode::InvalidArgument, "factorize_claim needs 2 <= N < q");
  ModulusSplit s;
  s.q = q;
  s.N = N;
  s.kappa = opt.kappa;

  std::map<int, u64> classes;
  for (auto& [p, nu] : fq.factors) {
    auto [it, inserted] = classes.emplace(nu, 1);
    it->second *= p;
  }
  if (opt.exponent_class) {
    auto it = classes.find(*opt.exponent_class);
    if (it == classes.end())
      fail(ErrorCode::NoValidClass, "no prime has exponent " + std::to_string(*opt.exponent_class));
    s.m = it->first;
    s.q0 = it->second;
  } else {
    // Largest class product; ties go to the smaller exponent (map order).
    for (auto& [m, prod] : classes)
      if (prod > s.q0) {
        s.q0 = prod;
        s.m = m;
      }
  }
  s.q_r = ipow(s.q0, static_cast<unsigned>(s.m));
  const u64 Q = q / s.q_r;

  if (Q == 1) {
    s.r = 1;
    s.r_literal = 1;
    detail::verify_split(s);
    return s;
  }
  FactoredModulus fQ = factor(Q);
  s.r_literal = 1 + 10 * detail::floor_log_ratio(fQ.core, N);
  int nblocks = std::max(2, s.r_literal) - 1;

  // Longest-processing-time packing of the primes of Q' by log p.
  std::vector<u64> primes = fQ.primes();
  std::sort(primes.rbegin(), primes.rend());
  auto pack = [](const std::vector<u64>& ps, int bins) {
    std::vector<std::vector<u64>> out(bins);
    std::vector<long double> load(bins, 0);
    for (u64 p : ps) {
      int best = 0;
      for (int b = 1; b < bins; ++b)
        if (load[b] < load[best]) best = b;
      out[best].push_back(p);
      load[best] += std::log(static_cast<long double>(p));
    }
    std::vector<std::vector<u64>> nonempty;
    for (auto& v : out)
      if (!v.empty()) nonempty.push_back(v);
    return nonempty;
  };
  auto block_value = [&](const std::vector<u64>& ps) {
    u64 v = 1;
    for (u64 p : ps) v *= ipow(p, static_cast<unsigned>(fQ.factors.at(p)));
    return v;
  };
  std::vector<std::vector<u64>> groups = pack(primes, nblocks);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      if (groups[i].size() < 2) continue;
      ModulusSplit probe;
      probe.N = N;
      detail::finish_block(probe, block_value(groups[i]));
      if (u128(probe.bases[0]) * probe.bases[0] < N) continue;
      auto halves = pack(groups[i], 2);
      groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(i));
      groups.insert(groups.end(), halves.begin(), halves.end());
      changed = true;
      break;
    }
  }
  std::sort(groups.begin(), groups.end(), [&](auto& a, auto& b) { return block_value(a) < block_value(b); });
  for (auto& g : groups) detail::finish_block(s, block_value(g));
  s.r = static_cast<int>(s.blocks.size()) + 1;
  detail::verify_split(s);
  return s;
}

inline ModulusSplit factorize_claim(u64 q, u64 N, const ClaimOptions& opt = {}) {
  require(q >= 1, ErrorCode::InvalidArgument, "q must be positive");
  return factorize_claim(factor(q), N, opt);
}

// A split with caller-chosen blocks; q_r must have the shape q0^m with q0 squarefree.
inline ModulusSplit make_split(u64 q, const std::vector<u64>& blocks, u64 q_r, u64 N) {
  require(q_r >= 1 && N >= 2, ErrorCode::InvalidArgument, "make_split: need q_r >= 1 and N >= 2");
  ModulusSplit s;
  s.q = q;
  s.N = N;
  s.q_r = q_r;
  FactoredModulus fr = factor(q_r);
  s.q0 = fr.core;
  s.m = fr.factors.empty() ? 1 : fr.factors.begin()->second;
  for (auto& [p, e] : fr.factors)
    if (e != s.m) fail(ErrorCode::InvalidSplit, "q_r = " + std::to_string(q_r) + " is not a power of a squarefree number");
  u64 prod = q_r;
  for (u64 b : blocks) {
    require(b >= 2, ErrorCode::InvalidSplit, "blocks must exceed 1");
    if (prod > q / b + 1) fail(ErrorCode::InvalidSplit, "blocks and q_r do not multiply to q");
    prod *= b;
    detail::finish_block(s, b);
  }
  if (prod != q) fail(ErrorCode::InvalidSplit, "blocks and q_r do not multiply to q");
  s.r = static_cast<int>(blocks.size()) + 1;
  u64 rest = q / q_r;
  s.r_literal = rest == 1 ? 1 : 1 + 10 * detail::floor_log_ratio(factor(rest).core, N);
  detail::verify_split(s);
  if (!s.coprime) fail(ErrorCode::InvalidSplit, "blocks and q_r are not pairwise coprime");
  return s;
}

// ---------------------------------------------------------------------------
// M schedule: M_1^{-1/12} = M^{-1} and each later leading term equal to M_1^{-1/12}.

struct MSchedule {
  std::vector<long double> log_M;
  std::vector<long double> log_cap;  // 6^{s-1} 12^s m_1^2 ... m_{s-1}^2 log M
  std::vector<bool> within_cap;
};

inline MSchedule iterated_m_schedule(long double log_M, const std::vector<int>& m) {
  MSchedule out;
  const std::size_t levels = m.size() + 1;
  long double weighted = 0;  // sum_{i<s} e_i log M_i
  long double msq = 1;       // m_1^2 ... m_{s-1}^2
  for (std::size_t s = 1; s <= levels && s <= m.size() + 1; ++s) {
    long double L;
    if (s == 1) {
      L = 12 * log_M;
    } else {
      L = 12 * std::pow(60.0L, static_cast<long double>(s - 1)) * msq * (weighted + out.log_M[0] / 12);
    }
    long double cap = std::pow(6.0L, static_cast<long double>(s - 1)) * std::pow(12.0L, static_cast<long double>(s)) * msq * log_M;
    out.log_M.push_back(L);
    out.log_cap.push_back(cap);
    out.within_cap.push_back(L <= cap * (1 + 1e-12L));
    weighted += L / (std::pow(60.0L, static_cast<long double>(s)) * msq);
    if (s <= m.size()) msq *= static_cast<long double>(m[s - 1]) * m[s - 1];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shift-and-Cauchy-Schwarz pipeline.

struct LevelRecord {
  int level = 0;
  u64 shift = 1;
  u64 M = 0;
  u64 char_modulus = 1;  // modulus of chi_s ... chi_r used inside the level
  std::string f_in;
  i64 degree_in = 0;
  long double measured = 0;  // (1/N) |sum chi'_{s-1}(f_{s-1}(x))|
  long double averaged = 0;  // (1/NM) sum_x |sum_y chi'_{s-1}(f_{s-1}(x + y h))|
  long double slack = 0;     // (1/NM) sum_y 2 min(y h, N)
  bool averaging_holds = false;
  long double cs_rhs = 0;    // [ (1/NM^2) sum_{y,y'} |sum_x ...| ]^{1/2}
  bool cauchy_schwarz_holds = false;
  u64 q_bar_in = 1;
  u64 admissible_pairs = 0;
  u64 bad_pairs = 0;
  ExactRational bad_bound = 0;
  bool bad_within_bound = true;
  std::optional<std::pair<u64, u64>> chosen;
  long double chosen_inner = 0;  // (1/N) |sum_x| for the chosen pair
  std::string f_out;
  i64 degree_out = 0;
  u64 q_bar_out = 1;
};

struct FinalRecord {
  bool reached = false;
  int m = 1;
  u64 q_r = 1;
  std::string f;
  i64 degree = 0;
  long double measured = 0;  // (1/N) |sum_{x=1}^N chi_r(f(x))|
  // m = 1
  u64 q_bar = 1;
  std::optional<long double> complete_sum;
  long double admissible_bound = 0;  // q_bar^{7/10} q_r^{3 tau / 10}
  long double weil_bound = 0;    // q_bar / sqrt(q_1) d^{omega(q_1)}
  u64 good_product = 1;
  bool log_degree_condition = false;  // log d < 1/tau
  bool admissible_bound_holds = false;
  bool weil_holds = false;
  // m > 1
  std::optional<ExpansionReport> expansion;
  std::optional<ExpSumResult> vinogradov;
  std::string note;
};

struct ReductionTrace {
  std::string character;
  ModulusSplit split;
  u64 N = 0;
  long double tau = 0;
  long double threshold = 0;  // q_r^tau
  std::vector<LevelRecord> levels;
  FinalRecord final_level;
  bool truncated = false;
  std::string truncation_reason;
};

struct ReductionOptions {
  std::optional<long double> tau;
  u64 max_work = 50000000ULL;  // cap on M * N phase evaluations per level
};

namespace detail {

inline u64 default_level_m(u64 N, u64 shift) {
  u64 M = static_cast<u64>(std::sqrt(static_cast<long double>(N)));
  M = std::min<u64>(M, 32);
  while (M > 1 && M * shift >= N) --M;
  return std::max<u64>(M, 1);
}

inline u64 product(const std::vector<u64>& v, std::size_t from, std::size_t to) {
  u64 p = 1;
  for (std::size_t i = from; i < to; ++i) p *= v[i];
  return p;
}

// Row y holds the phase numerators of chi(f(x + y h)) for x = 1..N.
inline std::vector<std::vector<std::optional<u64>>> shifted_phases(const DirichletCharacter& chi, const FactoredRational& f,
                                                                   u64 N, u64 M, u64 h) {
  std::vector<std::vector<std::optional<u64>>> rows(M + 1);
  for (u64 y = 1; y <= M; ++y) {
    auto& row = rows[y];
    row.resize(N);
    parallel_chunks<int>(0, N, kChunk, [&](u64 lo, u64 hi) {
      for (u64 i = lo; i < hi; ++i) row[i] = chi_of(chi, f, static_cast<i64>(i + 1 + y * h));
      return 0;
    });
  }
  return rows;
}

}  // namespace detail

inline ReductionTrace run_reduction(const DirichletCharacter& chi, const ModulusSplit& split, u64 N,
                                    std::vector<u64> M_schedule = {}, const ReductionOptions& opt = {}) {
  require(chi.q() == split.q, ErrorCode::InvalidSplit, "character modulus differs from the split's q");
  require(N >= 2, ErrorCode::InvalidArgument, "N must be at least 2");
  ReductionTrace tr;
  tr.character = chi.token();
  tr.split = split;
  tr.N = N;
  tr.tau = opt.tau ? *opt.tau : default_tau(split.q_r);
  tr.threshold = std::pow(static_cast<long double>(split.q_r), tr.tau);

  std::vector<u64> parts = split.blocks;
  parts.push_back(split.q_r);
  const std::size_t nb = split.blocks.size();
  auto tail_character = [&](std::size_t from) {
    if (from == 0) return chi;
    auto d = decompose(chi, {detail::product(parts, 0, from), detail::product(parts, from, parts.size())});
    return d[1];
  };

  FactoredRational f = FactoredRational::identity();
  u64 q_bar = split.q0;
  const long double Nl = static_cast<long double>(N);

  for (std::size_t s = 0; s < nb; ++s) {
    LevelRecord L;
    L.level = static_cast<int>(s + 1);
    L.shift = split.blocks[s];
    L.M = s < M_schedule.size() ? M_schedule[s] : (M_schedule.empty() ? detail::default_level_m(N, L.shift) : M_schedule.back());
    const u64 M = L.M, h = L.shift;
    require(M >= 1, ErrorCode::InvalidArgument, "M must be positive");
    if (u128(M) * h >= N)
      fail(ErrorCode::InvalidArgument, "level " + std::to_string(L.level) + ": M * shift = " + std::to_string(M * h) +
                                           " is not below N");
    if (u128(M) * N > opt.max_work) fail(ErrorCode::InstanceTooLarge, "M * N exceeds the per-level work cap");

    DirichletCharacter outer = tail_character(s);      // chi_s ... chi_r
    DirichletCharacter inner = tail_character(s + 1);  // chi_{s+1} ... chi_r
    L.char_modulus = inner.q();
    L.f_in = f.to_string();
    L.degree_in = f.degree();
    L.q_bar_in = q_bar;

    SumResult base = detail::accumulate_phases(outer.order, 1, N, [&](i64 x) { return chi_of(outer, f, x); });
    base.finish(Nl);
    L.measured = base.magnitude / Nl;

    auto outer_rows = detail::shifted_phases(outer, f, N, M, h);
    auto inner_rows = detail::shifted_phases(inner, f, N, M, h);

    {
      auto parts_avg = parallel_chunks<long double>(0, N, detail::kChunk, [&](u64 lo, u64 hi) {
        std::vector<cplx> v;
        v.reserve(hi - lo);
        for (u64 i = lo; i < hi; ++i) {
          cplx acc{0, 0};
          for (u64 y = 1; y <= M; ++y)
            if (outer_rows[y][i]) acc += detail::unit_phase(*outer_rows[y][i], outer.order);
          v.push_back({std::abs(acc), 0});
        }
        return detail::pairwise_sum(v).real();
      });
      long double total = 0;
      for (auto x : parts_avg) total += x;
      L.averaged = total / (Nl * M);
      long double out_terms = 0;
      for (u64 y = 1; y <= M; ++y) out_terms += 2.0L * static_cast<long double>(std::min<u64>(y * h, N));
      L.slack = out_terms / (Nl * M);
      L.averaging_holds = L.measured <= (L.averaged + L.slack) * (1 + 1e-12L) + 1e-15L;
    }

    // Inner sums sum_x chi'(f(x + y h)) conj chi'(f(x + y' h)) for all pairs.
    const u64 n = inner.order;
    std::vector<long double> inner_abs((M + 1) * (M + 1), 0);
    auto pair_rows = parallel_chunks<std::vector<long double>>(1, M + 1, 1, [&](u64 lo, u64 hi) {
      std::vector<long double> out;
      for (u64 y = lo; y < hi; ++y)
        for (u64 yp = 1; yp <= M; ++yp) {
          PhaseCounts pc(n);
          for (u64 i = 0; i < N; ++i) {
            auto& a = inner_rows[y][i];
            auto& b = inner_rows[yp][i];
            if (a && b) pc.add((*a + n - *b) % n);
          }
          out.push_back(std::abs(pc.value()));
        }
      return out;
    });
    long double cs_sum = 0;
    for (u64 y = 1; y <= M; ++y)
      for (u64 yp = 1; yp <= M; ++yp) {
        inner_abs[y * (M + 1) + yp] = pair_rows[y - 1][yp - 1];
        cs_sum += pair_rows[y - 1][yp - 1];
      }
    L.cs_rhs = std::sqrt(cs_sum / (Nl * M * M));
    L.cauchy_schwarz_holds = L.averaged <= L.cs_rhs * (1 + 1e-9L) + 1e-15L;

    // Admissibility of (f_{y,y'}, q_bar) and the maximiser among admissible pairs.
    std::optional<std::pair<u64, u64>> best;
    long double best_val = -1;
    u64 best_good = 1;
    FactoredRational best_f;
    for (u64 y = 1; y <= M; ++y)
      for (u64 yp = 1; yp <= M; ++yp) {
        FactoredRational g = shift_quotient(f, static_cast<i64>(h), static_cast<i64>(y), static_cast<i64>(yp));
        AdmissibilityReport ar = admissible(g, q_bar, split.q_r, tr.tau);
        if (!ar.admissible) {
          ++L.bad_pairs;
          continue;
        }
        ++L.admissible_pairs;
        long double v = inner_abs[y * (M + 1) + yp];
        if (!best || v > best_val * (1 + 1e-12L) + 1e-12L) {
          best = std::make_pair(y, yp);
          best_val = v;
          best_good = ar.good_product;
          best_f = g;
        }
      }
    {
      FactoredModulus fb = factor(q_bar);
      std::vector<u64> qs = detail::divisors_above(fb, tr.threshold);
      L.bad_bound = detail::pair_bound(qs, M, std::max<i64>(1, f.degree()));
      L.bad_within_bound = ExactRational(L.bad_pairs) <= L.bad_bound;
    }
    if (!best) {
      tr.levels.push_back(L);
      tr.truncated = true;
      tr.truncation_reason = std::string(to_string(ErrorCode::NoAdmissiblePair)) + ": no admissible pair at level " +
                             std::to_string(L.level) + "; the trivial bound applies";
      return tr;
    }
    L.chosen = best;
    L.chosen_inner = best_val / Nl;
    f = best_f;
    q_bar = best_good;
    L.f_out = f.to_string();
    L.degree_out = f.degree();
    L.q_bar_out = q_bar;
    tr.levels.push_back(L);
  }

  // Final level: chi_r against f_{r-1}.
  FinalRecord& F = tr.final_level;
  F.reached = true;
  F.m = split.m;
  F.q_r = split.q_r;
  F.f = f.to_string();
  F.degree = f.degree();
  DirichletCharacter chir = tail_character(nb);
  {
    SumResult S = detail::accumulate_phases(chir.order, 1, N, [&](i64 x) { return chi_of(chir, f, x); });
    S.finish(Nl);
    F.measured = S.magnitude / Nl;
  }
  const long double d = static_cast<long double>(std::max<i64>(1, F.degree));
  if (split.m == 1) {
    F.q_bar = q_bar;
    F.log_degree_condition = std::log(d) < 1 / tr.tau;
    F.admissible_bound = std::pow(static_cast<long double>(q_bar), 0.7L) * std::pow(static_cast<long double>(split.q_r), 0.3L * tr.tau);
    if (q_bar > 1) {
      DirichletCharacter cb = q_bar == split.q_r ? chir : decompose(chir, {q_bar, split.q_r / q_bar})[0];
      SumResult cs = complete_twisted_sum(cb, f);
      F.complete_sum = cs.magnitude;
      F.good_product = 1;
      int omega = 0;
      for (u64 p : factor(q_bar).primes())
        if (satisfies_star(f, p)) {
          F.good_product *= p;
          ++omega;
        }
      F.weil_bound = static_cast<long double>(q_bar) / std::sqrt(static_cast<long double>(F.good_product)) * std::pow(d, omega);
      F.admissible_bound_holds = cs.magnitude <= F.admissible_bound * (1 + 1e-12L);
      F.weil_holds = !cb.primitive() || cs.magnitude <= F.weil_bound * (1 + 1e-9L);
      if (!cb.primitive()) F.note = "character is not primitive modulo q_bar; the Weil form is not asserted";
    } else {
      F.note = "q_bar = 1: no good primes remain";
    }
  } else {
    try {
      F.expansion = verify_expansion_identity(chir, split.q0, split.m, f, Truncation::Complete);
      const u64 q0 = split.q0;
      const u64 qm = split.q_r;
      std::optional<i64> x0;
      for (u64 x = 1; x <= q0 && !x0; ++x) {
        bool unit = true;
        for (auto& t : f.terms())
          if (std::gcd(mod_floor(static_cast<i64>(x) - t.root, q0), q0) != 1) unit = false;
        if (unit) x0 = static_cast<i64>(x);
      }
      if (x0) {
        PostnikovData pd = solve_postnikov(chir, q0, false);
        auto js = expansion_indices(q0, split.m, Truncation::Complete);
        QjFamily fam = qj_coefficients(f, split.m, js.back());
        std::vector<u64> T = expansion_terms(fam, js, BigInt(pd.B) * pd.D, q0, split.m, *x0);
        int k = 0;
        for (int j = static_cast<int>(T.size()) - 1; j >= 1 && k == 0; --j)
          if (T[j] != 0) k = j;
        if (k > 0) {
          std::vector<long double> lower(k, 0);
          for (int j = 1; j < k; ++j) lower[j] = static_cast<long double>(T[j]) / static_cast<long double>(qm);
          u64 P = std::max<u64>(1, std::min<u64>(N / q0, 10000000ULL));
          F.vinogradov = exp_sum(static_cast<i64>(T[k]), qm, k, lower, P, 1);
        } else {
          F.note = "all expansion coefficients vanish at x = " + std::to_string(*x0);
        }
      } else {
        F.note = "no x in [1, q0] makes every factor a unit";
      }
    } catch (const Error& e) {
      F.note = std::string(e.code_name()) + ": " + e.what();
    }
  }
  return tr;
}

}  // namespace charsum
