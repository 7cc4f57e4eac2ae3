#pragma once

#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "charsum/arith.hpp"
#include "charsum/characters.hpp"
#include "charsum/error.hpp"
#include "charsum/parallel.hpp"
#include "charsum/polynomial.hpp"
#include "charsum/ratfunc.hpp"

namespace charsum {

// e(a/b) == e(c/d) exactly.
inline bool same_phase(u64 a, u64 b, u64 c, u64 d) {
  i128 lhs = static_cast<i128>(a) * d - static_cast<i128>(c) * b;
  i128 mod = static_cast<i128>(b) * d;
  return lhs % mod == 0;
}

// m with q0^m == q, or nullopt.
inline std::optional<int> exact_exponent(u64 q, u64 q0) {
  if (q0 < 2) return std::nullopt;
  int m = 0;
  u64 v = 1;
  while (v < q) {
    if (v > q / q0) return std::nullopt;
    v *= q0;
    ++m;
  }
  if (v != q) return std::nullopt;
  return m;
}

// prod of k <= m_prime with gcd(k, q0) = 1.
inline BigInt postnikov_D(u64 q0, int m_prime) {
  BigInt d = 1;
  for (int k = 1; k <= m_prime; ++k)
    if (std::gcd(static_cast<u64>(k), q0) == 1) d *= k;
  return d;
}

struct PostnikovData {
  u64 q0 = 0;
  int m = 0;
  u64 q = 0;
  int m_prime = 0;
  BigInt D = 1;
  u64 B = 1;
  u64 B_modulus = 1;      // solutions are B + k * B_modulus
  std::vector<u64> B_solutions;  // all B in [1, q] solving the congruence with gcd(B, q0) = 1
  u64 a = 0;              // chi(1 + q0) = e(a/q)
  u64 L = 0;              // sum of u_coeffs mod q
  // F(q0 u) = B * sum_s u_coeffs[s-1] u^s (mod q).
  std::vector<u64> u_coeffs;
  // F(x) = sum_s F_coeffs[s-1] x^s with F_coeffs[s-1] = B D (-1)^{s-1} / s.
  std::vector<ExactRational> F_coeffs;
  u64 checked = 0;
  std::vector<u64> failures;

  std::string B_class() const { return std::to_string(B) + " mod " + std::to_string(B_modulus); }

  // F(q0 u) mod q.
  u64 lift_value(u64 u) const {
    u64 acc = 0;
    for (std::size_t s = u_coeffs.size(); s-- > 0;) acc = mulmod(acc + u_coeffs[s], u % q, q);
    return mulmod(acc, B % q, q);
  }
};

// D (-1)^{s-1} q0^s / s mod q for s = 1..m_prime.
inline std::vector<u64> postnikov_u_coeffs(u64 q0, u64 q, int m_prime, const BigInt& D) {
  std::vector<u64> out;
  BigInt q0s = 1;
  for (int s = 1; s <= m_prime; ++s) {
    q0s *= q0;
    ExactRational term(D * q0s, BigInt(s));
    BigInt num = boost::multiprecision::numerator(term);
    BigInt den = boost::multiprecision::denominator(term);
    if (boost::multiprecision::gcd(den, BigInt(q)) != 1)
      fail(ErrorCode::NonIntegralTerm, "D q0^" + std::to_string(s) + "/" + std::to_string(s) + " is not integral mod " +
                                           std::to_string(q));
    u64 v = mulmod(big_mod(num, q), inverse_mod(big_mod(den, q), q), q);
    if (s % 2 == 0) v = (q - v) % q;
    out.push_back(v);
  }
  return out;
}

// Solves for B without the exhaustive check. Primitivity is optional here so the
// expansion identity can reuse the construction for imprimitive components.
inline PostnikovData solve_postnikov(const DirichletCharacter& chi, u64 q0, bool require_primitive = true) {
  const u64 q = chi.q();
  if (q0 % 2 == 0) fail(ErrorCode::InvalidArgument, "even q0 is not supported");
  auto m = exact_exponent(q, q0);
  if (!m) fail(ErrorCode::InvalidArgument, "modulus " + std::to_string(q) + " is not a power of q0 = " + std::to_string(q0));
  if (require_primitive && !chi.primitive())
    fail(ErrorCode::NotPrimitive, "character " + chi.token() + " is not primitive (conductor " +
                                      std::to_string(chi.conductor) + ")");
  PostnikovData d;
  d.q0 = q0;
  d.m = *m;
  d.q = q;
  d.m_prime = 2 * d.m;
  d.D = postnikov_D(q0, d.m_prime);
  d.u_coeffs = postnikov_u_coeffs(q0, q, d.m_prime, d.D);
  for (u64 c : d.u_coeffs) d.L = (d.L + c) % q;

  auto ph = chi.phase(static_cast<i64>((1 + q0) % q));
  if (!ph) fail(ErrorCode::NotAUnit, "1 + q0 is not a unit");
  // e(ph/order) = e(a/q) requires order | q on this subgroup; a = ph * q / order.
  u64 scaled = mulmod(*ph, q, chi.order * q);
  if (scaled % chi.order != 0) fail(ErrorCode::NoSolution, "chi(1 + q0) is not a q-th root of unity");
  d.a = (scaled / chi.order) % q;

  u64 g = std::gcd(d.L, q);
  if (d.a % g != 0)
    fail(ErrorCode::NoSolution, "B * " + std::to_string(d.L) + " = " + std::to_string(d.a) + " mod " + std::to_string(q) +
                                    " has no solution");
  d.B_modulus = q / g;
  u64 b0 = d.B_modulus == 1 ? 0 : mulmod(d.a / g, inverse_mod((d.L / g) % d.B_modulus, d.B_modulus), d.B_modulus);
  for (u64 b = b0 == 0 ? d.B_modulus : b0; b <= q; b += d.B_modulus)
    if (std::gcd(b, q0) == 1) d.B_solutions.push_back(b);
  if (d.B_solutions.empty() && !require_primitive) {
    // Imprimitive characters may force q0 | B; the identity still holds with such B.
    for (u64 b = b0 == 0 ? d.B_modulus : b0; b <= q; b += d.B_modulus) d.B_solutions.push_back(b);
  }
  if (d.B_solutions.empty())
    fail(ErrorCode::NoSolution, "no solution B coprime to q0 = " + std::to_string(q0));
  d.B = d.B_solutions.front();

  for (int s = 1; s <= d.m_prime; ++s) {
    ExactRational c(BigInt(d.B) * d.D, BigInt(s));
    d.F_coeffs.push_back(s % 2 ? c : -c);
  }
  return d;
}

// Checks chi(1 + q0 u) = e_q(F(q0 u)) for every u in [0, q0^{m-1}).
inline void verify_postnikov(const DirichletCharacter& chi, PostnikovData& d) {
  const u64 range = d.q / d.q0;
  auto chunks = parallel_chunks<std::vector<u64>>(0, range, 4096, [&](u64 lo, u64 hi) {
    std::vector<u64> bad;
    for (u64 u = lo; u < hi; ++u) {
      auto ph = chi.phase(static_cast<i64>((1 + d.q0 * u) % d.q));
      if (!ph || !same_phase(*ph, chi.order, d.lift_value(u), d.q)) bad.push_back(u);
    }
    return bad;
  });
  d.checked = range;
  d.failures.clear();
  for (auto& c : chunks) d.failures.insert(d.failures.end(), c.begin(), c.end());
}

inline PostnikovData build_postnikov(const DirichletCharacter& chi, u64 q0) {
  PostnikovData d = solve_postnikov(chi, q0, true);
  verify_postnikov(chi, d);
  return d;
}

// ---------------------------------------------------------------------------
// Expansion coefficients Q_j(x) of F((f(x+t) - f(x)) / f(x)) in powers of t.

struct QjTerm {
  int j = 0;
  // Q_j = numerator / prod_a (x - a)^{den_exponent[a]} (without the B*D scale).
  RatPoly numerator;
  std::map<i64, int> den_exponent;
  // numerator = content * primitive, primitive an integer polynomial with positive leading coefficient.
  ExactRational content = 0;
  std::vector<BigInt> primitive;

  bool is_zero() const { return numerator.is_zero(); }
  int pole_order(i64 a) const {
    auto it = den_exponent.find(a);
    return it == den_exponent.end() ? 0 : it->second;
  }
  // Q_j(x) as an exact rational; PoleAtExpansionPoint when x hits a pole.
  ExactRational eval(i64 x) const {
    ExactRational den = 1;
    for (auto& [a, e] : den_exponent) {
      if (x == a) fail(ErrorCode::PoleAtExpansionPoint, "Q_" + std::to_string(j) + " has a pole at x = " + std::to_string(x));
      for (int i = 0; i < e; ++i) den *= (x - a);
    }
    return numerator.eval(ExactRational(x)) / den;
  }
  std::string denominator_string() const {
    std::string s;
    for (auto& [a, e] : den_exponent) {
      if (!s.empty()) s += " ";
      s += a == 0 ? "(x)" : (a > 0 ? "(x-" + std::to_string(a) + ")" : "(x+" + std::to_string(-a) + ")");
      if (e != 1) s += "^" + std::to_string(e);
    }
    return s.empty() ? "1" : s;
  }
};

struct QjFamily {
  FactoredRational f;
  int m = 0;
  int m_prime = 0;
  std::vector<QjTerm> terms;  // terms[j-1] = Q_j
  std::vector<int> min_t_degree;  // min_t_degree[s-1] = lowest t-power present in z^s
};

namespace detail {

inline ExactRational general_binomial(i64 d, int n) {
  ExactRational r = 1;
  for (int i = 0; i < n; ++i) r = r * ExactRational(d - i) / ExactRational(i + 1);
  return r;
}

// Truncated series in t whose j-th coefficient is poly_j / L(x)^j.
using Series = std::vector<RatPoly>;

inline Series series_mul(const Series& a, const Series& b, int order) {
  Series r(order + 1);
  for (int i = 0; i <= order; ++i) {
    if (a[i].is_zero()) continue;
    for (int j = 0; i + j <= order; ++j) {
      if (b[j].is_zero()) continue;
      r[i + j] = r[i + j] + a[i] * b[j];
    }
  }
  return r;
}

}  // namespace detail

// Q_j for j = 1..max_j with F truncated at degree m_prime (default 2m).
inline QjFamily qj_coefficients(const FactoredRational& f, int m, int max_j = -1, int m_prime = -1) {
  require(m >= 1, ErrorCode::InvalidArgument, "qj_coefficients: m must be positive");
  if (max_j < 0) max_j = m - 1;
  if (m_prime < 0) m_prime = 2 * m;
  QjFamily fam;
  fam.f = f;
  fam.m = m;
  fam.m_prime = m_prime;
  const int J = max_j;
  if (J <= 0) return fam;

  const auto& terms = f.terms();
  RatPoly L = RatPoly::constant(1);
  for (auto& t : terms) L = L * RatPoly::linear_root(t.root);

  // prod_a (1 + t/(x - a))^{d_a}; coefficient of t^n of one factor is C(d,n) (L/(x-a))^n / L^n.
  detail::Series prod(J + 1);
  prod[0] = RatPoly::constant(1);
  for (auto& t : terms) {
    RatPoly others = RatPoly::constant(1);
    for (auto& u : terms)
      if (u.root != t.root) others = others * RatPoly::linear_root(u.root);
    detail::Series fac(J + 1);
    RatPoly pw = RatPoly::constant(1);
    for (int n = 0; n <= J; ++n) {
      fac[n] = pw * detail::general_binomial(t.mult, n);
      pw = pw * others;
    }
    prod = detail::series_mul(prod, fac, J);
  }
  detail::Series z = prod;
  z[0] = z[0] - RatPoly::constant(1);
  if (!z[0].is_zero()) fail(ErrorCode::PoleAtExpansionPoint, "series has a nonzero constant term");

  detail::Series acc(J + 1);
  detail::Series zs = z;
  for (int s = 1; s <= std::min(J, m_prime); ++s) {
    int low = J + 1;
    for (int i = 0; i <= J; ++i)
      if (!zs[i].is_zero()) {
        low = i;
        break;
      }
    if (low < s) fail(ErrorCode::PoleAtExpansionPoint, "internal: z^s has a term below t^s");
    fam.min_t_degree.push_back(low);
    ExactRational coef = ExactRational(s % 2 ? 1 : -1) / ExactRational(s);
    for (int i = 0; i <= J; ++i)
      if (!zs[i].is_zero()) acc[i] = acc[i] + zs[i] * coef;
    zs = detail::series_mul(zs, z, J);
  }

  for (int j = 1; j <= J; ++j) {
    QjTerm q;
    q.j = j;
    q.numerator = acc[j];
    if (!q.numerator.is_zero()) {
      for (auto& t : terms) {
        int e = j;
        while (e > 0 && q.numerator.divide_by_root(t.root)) --e;
        if (e > 0) q.den_exponent[t.root] = e;
      }
      auto [content, prim] = primitive_part(q.numerator);
      q.content = content;
      q.primitive = std::move(prim);
    }
    fam.terms.push_back(std::move(q));
  }
  return fam;
}

struct QjZeroCount {
  u64 modulus = 0;      // p or squarefree q0_bar
  int j = 0;
  i64 degree = 0;
  u64 count = 0;        // x in [1, modulus] with Q_j(x) = 0 mod every prime of modulus
  long double bound = 0;
  bool within_bound = true;
};

// Zeros of Q_j modulo p (or modulo each prime of a squarefree q0_bar), poles excluded.
// For composite q0_bar the count runs over x in [1, q0] and the bound is (dj)^omega q0/q0_bar.
inline QjZeroCount qj_zero_count(const QjTerm& qj, i64 degree, u64 q0_bar, std::optional<u64> q0 = std::nullopt) {
  FactoredModulus fm = factor(q0_bar);
  if (!fm.squarefree()) fail(ErrorCode::NotSquarefree, "modulus for Q_j zero count must be squarefree");
  u64 range = q0.value_or(q0_bar);
  if (range % q0_bar != 0) fail(ErrorCode::InvalidArgument, "q0_bar must divide q0");
  QjZeroCount r;
  r.modulus = q0_bar;
  r.j = qj.j;
  r.degree = degree;
  for (auto& [p, e] : fm.factors) {
    if (!qj.primitive.empty() && eval_int_poly_mod(qj.primitive, 0, p) == 0)
      fail(ErrorCode::NormalizationViolated, "P_" + std::to_string(qj.j) + "(0) = 0 mod " + std::to_string(p));
  }
  long double dj = static_cast<long double>(degree) * qj.j;
  r.bound = std::pow(dj, static_cast<long double>(fm.omega)) * static_cast<long double>(range / q0_bar);
  for (u64 x = 1; x <= range; ++x) {
    bool all_zero = true;
    for (auto& [p, e] : fm.factors) {
      bool pole = false;
      for (auto& [a, k] : qj.den_exponent)
        if (mod_floor(static_cast<i64>(x) - a, p) == 0) pole = true;
      if (pole || (!qj.primitive.empty() && eval_int_poly_mod(qj.primitive, static_cast<i64>(x), p) != 0)) {
        all_zero = false;
        break;
      }
    }
    if (all_zero) ++r.count;
  }
  r.within_bound = static_cast<long double>(r.count) <= r.bound;
  return r;
}

// ---------------------------------------------------------------------------
// The identity chi(f(x + t q1)) = chi1(f(x)) chi'(f(x + t q1)) e_{q1^m}(sum_j Q_j(x) q1^j t^j).

enum class Truncation { Literal, Complete };

// j-range needed so that every omitted term vanishes mod q1^m.
inline std::vector<int> expansion_indices(u64 q1, int m, Truncation mode) {
  std::vector<int> js;
  if (mode == Truncation::Literal) {
    for (int j = 1; j < m; ++j) js.push_back(j);
    return js;
  }
  FactoredModulus fm = factor(q1);
  auto vp = [](u64 n, u64 p) {
    int v = 0;
    while (n % p == 0) {
      n /= p;
      ++v;
    }
    return v;
  };
  for (int j = 1;; ++j) {
    bool needed = false, any_future = false;
    for (auto& [p, e] : fm.factors) {
      int maxv = 0;
      for (int s = 1; s <= std::min(j, 2 * m); ++s) maxv = std::max(maxv, vp(static_cast<u64>(s), p));
      if (j - maxv < m) needed = true;
      int cap = 0;
      for (int s = 1; s <= 2 * m; ++s) cap = std::max(cap, vp(static_cast<u64>(s), p));
      if (j + 1 - cap < m) any_future = true;
    }
    if (needed) js.push_back(j);
    if (!any_future) break;
  }
  return js;
}

// T_j(x) = scale * q1^j * Q_j(x) mod q1^m for j in js (index j of the result).
inline std::vector<u64> expansion_terms(const QjFamily& fam, const std::vector<int>& js, const BigInt& scale, u64 q1,
                                        int m, i64 x) {
  u64 q1m = ipow(q1, static_cast<unsigned>(m));
  int J = js.empty() ? 0 : js.back();
  std::vector<u64> T(J + 1, 0);
  for (int j : js) {
    ExactRational v = fam.terms[j - 1].eval(x) * ExactRational(scale) *
                      ExactRational(boost::multiprecision::pow(BigInt(q1), static_cast<unsigned>(j)));
    BigInt num = boost::multiprecision::numerator(v), den = boost::multiprecision::denominator(v);
    if (boost::multiprecision::gcd(den, BigInt(q1)) != 1)
      fail(ErrorCode::NonIntegralTerm, "Q_" + std::to_string(j) + "(x) q1^j is not integral at x = " + std::to_string(x));
    T[j] = mulmod(big_mod(num, q1m), inverse_mod(big_mod(den, q1m), q1m), q1m);
  }
  return T;
}

struct ExpansionReport {
  u64 q1 = 0;
  int m = 0;
  u64 q_prime = 1;
  Truncation mode = Truncation::Literal;
  std::vector<int> js;
  u64 B = 0;
  BigInt D = 1;
  u64 x_checked = 0;
  u64 points_checked = 0;
  bool holds = true;
  std::optional<std::pair<i64, i64>> counterexample;  // (x, t)
};

struct SampleSpec {
  bool exhaustive = true;
  u64 samples = 0;
  u64 seed = 0;
};

inline ExpansionReport verify_expansion_identity(const DirichletCharacter& chi, u64 q1, int m, const FactoredRational& f,
                                                 Truncation mode = Truncation::Literal, SampleSpec sample = {}) {
  const u64 q = chi.q();
  if (q1 < 2 || m < 1) fail(ErrorCode::BadSplit, "q1 must be at least 2 and m positive");
  u64 q1m = 1;
  for (int i = 0; i < m; ++i) {
    if (q1m > q / q1) fail(ErrorCode::BadSplit, "q1^m does not divide the modulus");
    q1m *= q1;
  }
  if (q % q1m != 0) fail(ErrorCode::BadSplit, "q1^m does not divide the modulus");
  const u64 qp = q / q1m;
  if (std::gcd(q1, qp) != 1) fail(ErrorCode::BadSplit, "q1 and q' are not coprime");

  auto parts = decompose(chi, {q1m, qp});
  const DirichletCharacter& chi1 = parts[0];
  const DirichletCharacter& chip = parts[1];
  PostnikovData pd = solve_postnikov(chi1, q1, false);

  ExpansionReport rep;
  rep.q1 = q1;
  rep.m = m;
  rep.q_prime = qp;
  rep.mode = mode;
  rep.js = expansion_indices(q1, m, mode);
  rep.B = pd.B;
  rep.D = pd.D;
  const int J = rep.js.empty() ? 0 : rep.js.back();
  QjFamily fam = qj_coefficients(f, m, J);
  const BigInt scale = BigInt(pd.B) * pd.D;

  std::vector<i64> xs;
  if (sample.exhaustive) {
    for (u64 x = 0; x < q; ++x) xs.push_back(static_cast<i64>(x));
  } else {
    std::mt19937_64 rng(sample.seed);
    for (u64 i = 0; i < sample.samples; ++i) xs.push_back(static_cast<i64>(rng() % q));
  }
  const u64 t_max = q / q1;

  struct Partial {
    u64 x_checked = 0, points = 0;
    std::optional<std::pair<i64, i64>> bad;
  };
  auto chunks = parallel_chunks<Partial>(0, xs.size(), 64, [&](u64 lo, u64 hi) {
    Partial out;
    for (u64 i = lo; i < hi && !out.bad; ++i) {
      const i64 x = xs[i];
      bool unit = true;
      for (auto& t : f.terms())
        if (std::gcd(mod_floor(x - t.root, q1), q1) != 1) unit = false;
      if (!unit) continue;
      ++out.x_checked;
      std::vector<u64> T = expansion_terms(fam, rep.js, scale, q1, m, x);
      auto c1 = chi_of(chi1, f, x);
      for (u64 t = 1; t <= t_max; ++t) {
        const i64 xt = x + static_cast<i64>(t * q1);
        ++out.points;
        auto lhs = chi_of(chi, f, xt);
        auto cp = chi_of(chip, f, xt);
        if (!lhs || !cp || !c1) {
          if (lhs.has_value() != (cp.has_value() && c1.has_value())) {
            out.bad = std::make_pair(x, static_cast<i64>(t));
            break;
          }
          continue;
        }
        u64 s = 0, tp = 1;
        for (int j = 1; j <= J; ++j) {
          tp = mulmod(tp, t % q1m, q1m);
          if (T[j]) s = (s + mulmod(T[j], tp, q1m)) % q1m;
        }
        // rhs phase = c1/ord1 + cp/ordp + s/q1m, combined over a common denominator.
        const u64 n1 = chi1.order, np = chip.order;
        const u64 den = std::lcm(std::lcm(n1, np), q1m);
        u64 rhs = (mulmod(*c1, den / n1, den) + mulmod(*cp, den / np, den) + mulmod(s, den / q1m, den)) % den;
        if (!same_phase(*lhs, chi.order, rhs, den)) {
          out.bad = std::make_pair(x, static_cast<i64>(t));
          break;
        }
      }
    }
    return out;
  });
  for (auto& c : chunks) {
    rep.x_checked += c.x_checked;
    rep.points_checked += c.points;
    if (c.bad && !rep.counterexample) rep.counterexample = c.bad;
  }
  rep.holds = !rep.counterexample.has_value();
  return rep;
}

}  // namespace charsum
