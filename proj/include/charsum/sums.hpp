#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "charsum/arith.hpp"
#include "charsum/characters.hpp"
#include "charsum/error.hpp"
#include "charsum/parallel.hpp"
#include "charsum/phase.hpp"
#include "charsum/ratfunc.hpp"

namespace charsum {

using cplx = std::complex<long double>;

struct SumResult {
  cplx value{0, 0};
  std::optional<PhaseCounts> counts;
  long double magnitude = 0;
  long double trivial_bound = 0;
  long double ratio = 0;
  bool wrapped = false;

  void finish(long double n) {
    if (counts) value = counts->value();
    magnitude = std::abs(value);
    trivial_bound = n;
    ratio = n > 0 ? magnitude / n : 0;
  }
};

struct RealPolynomial {
  std::vector<long double> coeffs;  // alpha_0 .. alpha_d

  int degree() const {
    for (std::size_t i = coeffs.size(); i-- > 0;)
      if (coeffs[i] != 0) return static_cast<int>(i);
    return coeffs.empty() ? -1 : 0;
  }
  bool is_zero() const {
    for (auto c : coeffs)
      if (c != 0) return false;
    return true;
  }
  long double operator()(long double x) const {
    long double r = 0;
    for (std::size_t i = coeffs.size(); i-- > 0;) r = r * x + coeffs[i];
    return r;
  }
};

namespace detail {

constexpr u64 kExactOrderCap = u64{1} << 22;
constexpr u64 kChunk = u64{1} << 14;
constexpr long double kTwoPi = 6.283185307179586476925286766559L;

inline cplx unit_phase(u64 k, u64 n) {
  long double ang = kTwoPi * static_cast<long double>(k) / static_cast<long double>(n);
  return {std::cos(ang), std::sin(ang)};
}

// Fixed-shape pairwise reduction: the tree depends only on the vector length.
inline cplx pairwise_sum(const std::vector<cplx>& v, std::size_t lo, std::size_t hi) {
  if (hi - lo == 0) return {0, 0};
  if (hi - lo == 1) return v[lo];
  std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}
inline cplx pairwise_sum(const std::vector<cplx>& v) { return pairwise_sum(v, 0, v.size()); }

// Sums phase(x) over x in [lo, hi) where phase returns the numerator over n or nullopt.
template <class PhaseFn>
SumResult accumulate_phases(u64 n, i64 lo, u64 len, PhaseFn phase) {
  SumResult r;
  if (n <= kExactOrderCap) {
    u64 chunk = std::max<u64>(kChunk, n);
    auto parts = parallel_chunks<PhaseCounts>(0, len, chunk, [&](u64 a, u64 b) {
      PhaseCounts pc(n);
      for (u64 i = a; i < b; ++i) {
        auto ph = phase(lo + static_cast<i64>(i));
        if (ph) ++pc.counts[*ph];
      }
      return pc;
    });
    PhaseCounts total(n);
    for (auto& p : parts) total.merge(p);
    r.counts = std::move(total);
  } else {
    auto parts = parallel_chunks<cplx>(0, len, kChunk, [&](u64 a, u64 b) {
      std::vector<cplx> v;
      v.reserve(b - a);
      for (u64 i = a; i < b; ++i) {
        auto ph = phase(lo + static_cast<i64>(i));
        v.push_back(ph ? unit_phase(*ph, n) : cplx{0, 0});
      }
      return pairwise_sum(v);
    });
    r.value = pairwise_sum(parts);
  }
  return r;
}

template <class TermFn>
cplx accumulate_complex(i64 lo, u64 len, TermFn term) {
  auto parts = parallel_chunks<cplx>(0, len, kChunk, [&](u64 a, u64 b) {
    std::vector<cplx> v;
    v.reserve(b - a);
    for (u64 i = a; i < b; ++i) v.push_back(term(lo + static_cast<i64>(i)));
    return pairwise_sum(v);
  });
  return pairwise_sum(parts);
}

}  // namespace detail

// sum_{start <= x < start + N} chi(x); full periods are folded by periodicity.
inline SumResult interval_char_sum(const DirichletCharacter& chi, i64 start, u64 N) {
  require(N >= 1, ErrorCode::InvalidArgument, "interval length must be at least 1");
  const u64 q = chi.q();
  const u64 full = N / q, rest = N % q;
  auto phase = [&](i64 x) { return chi.phase(x); };
  SumResult r;
  SumResult partial = detail::accumulate_phases(chi.order, start, rest, phase);
  if (full > 0) {
    SumResult period = detail::accumulate_phases(chi.order, 0, q, phase);
    if (partial.counts && period.counts) {
      for (u64 k = 0; k < chi.order; ++k) partial.counts->counts[k] += period.counts->counts[k] * static_cast<i64>(full);
    } else {
      partial.value += period.value * static_cast<long double>(full);
    }
  }
  r = std::move(partial);
  r.wrapped = N > q;
  r.finish(static_cast<long double>(N));
  return r;
}

// sum_{x=1}^{q} chi(f(x)), with points where some factor is a non-unit contributing 0.
inline SumResult complete_twisted_sum(const DirichletCharacter& chi, const FactoredRational& f) {
  SumResult r = detail::accumulate_phases(chi.order, 1, chi.q(), [&](i64 x) { return chi_of(chi, f, x); });
  r.finish(static_cast<long double>(chi.q()));
  return r;
}

// Same sum for an integer polynomial given by coefficients (constant term first).
inline SumResult complete_twisted_sum(const DirichletCharacter& chi, const std::vector<i64>& poly) {
  const u64 q = chi.q();
  SumResult r = detail::accumulate_phases(chi.order, 1, q, [&](i64 x) -> std::optional<u64> {
    u64 xr = mod_floor(x, q), v = 0;
    for (std::size_t i = poly.size(); i-- > 0;) v = (mulmod(v, xr, q) + mod_floor(poly[i], q)) % q;
    return chi.phase(static_cast<i64>(v));
  });
  r.finish(static_cast<long double>(q));
  return r;
}

// Generic form: phase_fn(x) returns chi(f(x)) as a numerator over chi.order.
template <class PhaseFn>
SumResult complete_twisted_sum_with(const DirichletCharacter& chi, PhaseFn phase_fn) {
  SumResult r = detail::accumulate_phases(chi.order, 1, chi.q(), phase_fn);
  r.finish(static_cast<long double>(chi.q()));
  return r;
}

inline SumResult mixed_sum(const DirichletCharacter& chi, const RealPolynomial& P, i64 start, u64 N) {
  require(N >= 1, ErrorCode::InvalidArgument, "interval length must be at least 1");
  if (P.is_zero()) return interval_char_sum(chi, start, N);
  SumResult r;
  r.value = detail::accumulate_complex(start, N, [&](i64 n) -> cplx {
    auto ph = chi.phase(n);
    if (!ph) return {0, 0};
    long double ang = detail::kTwoPi * static_cast<long double>(*ph) / static_cast<long double>(chi.order) +
                      P(static_cast<long double>(n));
    return {std::cos(ang), std::sin(ang)};
  });
  r.wrapped = N > chi.q();
  r.finish(static_cast<long double>(N));
  return r;
}

// sum chi(n) n^{it}.
inline SumResult twisted_t_sum(const DirichletCharacter& chi, long double t, i64 start, u64 N) {
  require(start >= 1, ErrorCode::InvalidArgument, "n^{it} twist requires start >= 1");
  require(N >= 1, ErrorCode::InvalidArgument, "interval length must be at least 1");
  if (t == 0) return interval_char_sum(chi, start, N);
  SumResult r;
  r.value = detail::accumulate_complex(start, N, [&](i64 n) -> cplx {
    auto ph = chi.phase(n);
    if (!ph) return {0, 0};
    long double ang = detail::kTwoPi * static_cast<long double>(*ph) / static_cast<long double>(chi.order) +
                      t * std::log(static_cast<long double>(n));
    return {std::cos(ang), std::sin(ang)};
  });
  r.wrapped = N > chi.q();
  r.finish(static_cast<long double>(N));
  return r;
}

struct ExpSumResult {
  SumResult sum;
  int k = 0;
  u64 b = 1;
  bool window_ok = false;  // 2 < P <= b <= P^{k-1}
};

// sum_{n=start}^{start+P-1} e(a n^k / b + sum_{i<k} lower[i] n^i); the leading phase is exact.
inline ExpSumResult exp_sum(i64 a, u64 b, int k, const std::vector<long double>& lower, u64 P, i64 start = 1) {
  require(b >= 1 && k >= 1 && P >= 1, ErrorCode::InvalidArgument, "exp_sum: need b >= 1, k >= 1, P >= 1");
  ExpSumResult out;
  out.k = k;
  const u64 g = std::gcd(mod_floor(a, b), b);
  const u64 bb = b / (g == 0 ? b : g);
  const i64 aa = mod_floor(a, b) == 0 ? 0 : static_cast<i64>(mod_floor(a, b) / g);
  out.b = mod_floor(a, b) == 0 ? 1 : bb;
  {
    long double lp = std::log(static_cast<long double>(P));
    long double lb = std::log(static_cast<long double>(out.b));
    out.window_ok = P > 2 && P <= out.b && lb <= (k - 1) * lp + 1e-15L;
  }
  auto lead = [&](i64 n) -> u64 {
    u64 nr = mod_floor(n, out.b);
    return mulmod(mod_floor(aa, out.b), powmod(nr, static_cast<u64>(k), out.b), out.b);
  };
  bool has_lower = false;
  for (auto c : lower)
    if (c != 0) has_lower = true;
  if (!has_lower) {
    out.sum = detail::accumulate_phases(out.b, start, P, [&](i64 n) -> std::optional<u64> { return lead(n); });
  } else {
    out.sum.value = detail::accumulate_complex(start, P, [&](i64 n) -> cplx {
      long double frac = static_cast<long double>(lead(n)) / static_cast<long double>(out.b);
      long double rest = 0, pw = 1;
      for (std::size_t i = 0; i < lower.size(); ++i) {
        rest += lower[i] * pw;
        pw *= static_cast<long double>(n);
      }
      rest -= std::floor(rest);
      long double ang = detail::kTwoPi * (frac + rest);
      return {std::cos(ang), std::sin(ang)};
    });
  }
  out.sum.finish(static_cast<long double>(P));
  return out;
}

struct PartialSumMax {
  long double max_partial = 0;
  u64 argmax = 1;
};

// max over x in [1, q] of |sum_{n < x} chi(n)|, first maximiser reported.
inline PartialSumMax polya_vinogradov_max(const DirichletCharacter& chi) {
  if (chi.principal()) fail(ErrorCode::PrincipalCharacter, "Polya-Vinogradov scan needs a non-principal character");
  const u64 q = chi.q(), n = chi.order;
  std::vector<cplx> table;
  if (n <= detail::kExactOrderCap) {
    table.resize(n);
    for (u64 k = 0; k < n; ++k) table[k] = detail::unit_phase(k, n);
  }
  PartialSumMax best;
  cplx s{0, 0};
  long double best_sq = -1;
  for (u64 x = 1; x <= q; ++x) {
    long double m2 = std::norm(s);
    if (m2 > best_sq + 1e-12L) {
      best_sq = m2;
      best.argmax = x;
    }
    auto ph = chi.phase(static_cast<i64>(x));
    if (ph) s += table.empty() ? detail::unit_phase(*ph, n) : table[*ph];
  }
  best.max_partial = std::sqrt(std::max<long double>(best_sq, 0));
  return best;
}

struct MultiplicativityCheck {
  bool exact_equal = false;
  long double product_magnitude = 0;
  long double full_magnitude = 0;
  std::vector<long double> component_magnitudes;
};

// For squarefree q: sum mod q of chi(f) against the product of the component sums mod each prime.
inline MultiplicativityCheck weil_prime_multiplicativity(const DirichletCharacter& chi, const FactoredRational& f) {
  require(chi.modulus.squarefree(), ErrorCode::NotSquarefree, "multiplicativity check needs a squarefree modulus");
  MultiplicativityCheck out;
  SumResult full = complete_twisted_sum(chi, f);
  auto parts = decompose(chi, chi.modulus.primes());
  std::optional<PhaseCounts> prod;
  for (auto& c : parts) {
    SumResult s = complete_twisted_sum(c, f);
    out.component_magnitudes.push_back(s.magnitude);
    if (!s.counts || !full.counts) {
      prod.reset();
      break;
    }
    prod = prod ? convolve(*prod, *s.counts) : *s.counts;
  }
  out.full_magnitude = full.magnitude;
  out.product_magnitude = 1;
  for (auto m : out.component_magnitudes) out.product_magnitude *= m;
  if (prod && full.counts) out.exact_equal = exactly_equal(*prod, *full.counts);
  return out;
}

}  // namespace charsum
