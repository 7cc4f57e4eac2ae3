#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <vector>

#include "charsum/arith.hpp"

namespace charsum {

// Integer multiset of roots of unity e(k/n), stored as counts[k].
struct PhaseCounts {
  u64 n = 1;
  std::vector<i64> counts;

  PhaseCounts() : counts(1, 0) {}
  explicit PhaseCounts(u64 order) : n(order), counts(order, 0) {}

  void add(u64 k, i64 c = 1) { counts[k % n] += c; }

  void merge(const PhaseCounts& other) {
    for (u64 k = 0; k < n; ++k) counts[k] += other.counts[k];
  }

  i64 total() const {
    i64 t = 0;
    for (i64 c : counts) t += c;
    return t;
  }

  // Re-expresses the counts over a multiple of the current order.
  PhaseCounts lifted(u64 multiple_order) const {
    PhaseCounts out(multiple_order);
    u64 scale = multiple_order / n;
    for (u64 k = 0; k < n; ++k) out.counts[k * scale] += counts[k];
    return out;
  }

  // Coordinates in the tensor-product power basis of Z[zeta_n]. Two count
  // vectors represent the same cyclotomic integer iff their reductions agree.
  std::vector<i64> reduced() const {
    std::vector<i64> v = counts;
    FactoredModulus fm = factor(n);
    for (auto& [p, e] : fm.factors) {
      const u64 pe = ipow(p, static_cast<unsigned>(e));
      const u64 step = pe / p;              // p^{e-1}
      const u64 cut = (p - 1) * step;       // coordinates >= cut are reduced
      const u64 other = n / pe;
      // index k <-> (k mod pe, k mod other); the axis coordinate c has CRT lift.
      const u64 e_pe = crt_combine({{1, pe}, {0, other}});  // idempotent for this axis
      for (u64 k = 0; k < n; ++k) {
        u64 c = k % pe;
        if (c < cut || v[k] == 0) continue;
        i64 val = v[k];
        v[k] = 0;
        u64 base = (k + n - mulmod(c, e_pe, n)) % n;  // same other-coordinate, axis coordinate 0
        u64 j = c - cut;
        for (u64 l = 0; l + 1 < p; ++l) {
          u64 target = (base + mulmod(l * step + j, e_pe, n)) % n;
          v[target] -= val;
        }
      }
    }
    return v;
  }

  bool is_exact_zero() const {
    for (i64 c : reduced())
      if (c != 0) return false;
    return true;
  }

  std::complex<long double> value() const {
    if (is_exact_zero()) return {0.0L, 0.0L};
    const long double two_pi = 6.283185307179586476925286766559L;
    long double re = 0, im = 0;
    for (u64 k = 0; k < n; ++k) {
      if (counts[k] == 0) continue;
      long double ang = two_pi * static_cast<long double>(k) / static_cast<long double>(n);
      re += counts[k] * std::cos(ang);
      im += counts[k] * std::sin(ang);
    }
    return {re, im};
  }
};

inline PhaseCounts convolve(const PhaseCounts& a, const PhaseCounts& b) {
  u64 n = std::lcm(a.n, b.n);
  PhaseCounts out(n);
  u64 sa = n / a.n, sb = n / b.n;
  for (u64 i = 0; i < a.n; ++i) {
    if (a.counts[i] == 0) continue;
    for (u64 j = 0; j < b.n; ++j) {
      if (b.counts[j] == 0) continue;
      out.counts[(i * sa + j * sb) % n] += a.counts[i] * b.counts[j];
    }
  }
  return out;
}

inline bool exactly_equal(const PhaseCounts& a, const PhaseCounts& b) {
  u64 n = std::lcm(a.n, b.n);
  PhaseCounts d = a.lifted(n);
  PhaseCounts lb = b.lifted(n);
  for (u64 k = 0; k < n; ++k) d.counts[k] -= lb.counts[k];
  return d.is_exact_zero();
}

}  // namespace charsum
