#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "charsum/arith.hpp"
#include "charsum/characters.hpp"
#include "charsum/parallel.hpp"

namespace charsum {

struct WeilWorst {
  u64 p = 0;
  int degree = 0;
  std::vector<u64> coeffs;  // constant term first, monic
  u64 char_index = 0;
  long double ratio = 0;
};

struct WeilScanReport {
  u64 pmax = 0;
  int degmax = 0;
  bool full = false;
  u64 primes = 0;
  u64 polynomials_checked = 0;   // polynomials whose sums were evaluated
  u64 monic_covered = 0;         // monic polynomials represented by those evaluations
  u64 character_instances = 0;   // (f, chi) pairs tested against the bound
  u64 skipped_rth_powers = 0;    // (f, chi) pairs excluded because f is an r-th power
  u64 violations = 0;
  long double max_ratio = 0;     // max |S| / (d sqrt p)
  WeilWorst worst;
};

namespace detail {

inline u64 encode_poly(const std::vector<u64>& c, u64 p) {
  u64 code = 0;
  for (std::size_t i = c.size(); i-- > 0;) code = code * p + c[i];
  return code;
}

// Coefficients (constant first, monic of degree e) of g^r for every monic g of degree e.
inline std::unordered_set<u64> rth_powers(u64 p, int e, int r) {
  std::unordered_set<u64> out;
  std::vector<u64> g(e + 1, 0);
  g[e] = 1;
  u64 total = ipow(p, static_cast<unsigned>(e));
  for (u64 code = 0; code < total; ++code) {
    u64 c = code;
    for (int i = 0; i < e; ++i) {
      g[i] = c % p;
      c /= p;
    }
    std::vector<u64> acc{1};
    for (int k = 0; k < r; ++k) {
      std::vector<u64> nxt(acc.size() + e, 0);
      for (std::size_t i = 0; i < acc.size(); ++i)
        for (int j = 0; j <= e; ++j) nxt[i + j] = (nxt[i + j] + acc[i] * g[j]) % p;
      acc = std::move(nxt);
    }
    out.insert(encode_poly(acc, p));
  }
  return out;
}

struct PolyBatchStats {
  u64 polys = 0, covered = 0, instances = 0, skipped = 0, violations = 0;
  long double max_ratio = 0;
  WeilWorst worst;
};

}  // namespace detail

// Representatives of monic degree-d polynomials over F_p under x -> x + c and
// f(x) -> lambda^{-d} f(lambda x). Both maps preserve |sum chi(f(x))| and being an
// r-th power, so every monic polynomial is equivalent to one in this list.
// Shifting kills the x^{d-1} coefficient (needs p not dividing d); scaling moves
// the next nonzero coefficient a_j into a fixed coset of the (d-j)-th powers.
inline std::vector<std::vector<u64>> weil_orbit_representatives(u64 p, int d) {
  std::vector<std::vector<u64>> reps;
  // top = index of the highest nonzero coefficient below x^{d-1}; -1 when none.
  for (int top = d - 2; top >= -1; --top) {
    std::vector<u64> lead_reps;
    if (top >= 0) {
      u64 e = static_cast<u64>(d - top);
      std::vector<char> seen(p, 0);
      std::vector<u64> powers;
      for (u64 y = 1; y < p; ++y) powers.push_back(powmod(y, e, p));
      std::sort(powers.begin(), powers.end());
      powers.erase(std::unique(powers.begin(), powers.end()), powers.end());
      for (u64 a = 1; a < p; ++a) {
        if (seen[a]) continue;
        lead_reps.push_back(a);
        for (u64 h : powers) seen[mulmod(a, h, p)] = 1;
      }
    }
    u64 free_count = top >= 0 ? ipow(p, static_cast<unsigned>(top)) : 1;
    std::vector<u64> c(d + 1, 0);
    c[d] = 1;
    auto emit_lower = [&](u64 code) {
      for (int i = 0; i < top; ++i) {
        c[i] = code % p;
        code /= p;
      }
      reps.push_back(c);
    };
    if (top < 0) {
      reps.push_back(c);
      continue;
    }
    for (u64 a : lead_reps) {
      std::fill(c.begin(), c.end() - 1, 0);
      c[top] = a;
      for (u64 code = 0; code < free_count; ++code) emit_lower(code);
    }
  }
  return reps;
}

inline std::vector<std::vector<u64>> all_monic(u64 p, int d) {
  std::vector<std::vector<u64>> out;
  u64 total = ipow(p, static_cast<unsigned>(d));
  std::vector<u64> c(d + 1, 0);
  c[d] = 1;
  for (u64 code = 0; code < total; ++code) {
    u64 v = code;
    for (int i = 0; i < d; ++i) {
      c[i] = v % p;
      v /= p;
    }
    out.push_back(c);
  }
  return out;
}

// Checks |sum_x chi(f(x))| <= d sqrt p for every non-principal chi mod p and the
// given monic polynomials of degree d, skipping (f, chi) when f = g^r with r = ord chi.
inline detail::PolyBatchStats weil_check_polys(u64 p, int d, const std::vector<std::vector<u64>>& polys) {
  detail::PolyBatchStats total;
  if (p < 3) {
    total.polys = polys.size();
    return total;  // no non-principal character mod 2
  }
  auto table = log_table(p, 1);
  const u64 n = p - 1;
  const int nchars = static_cast<int>(n - 1);  // indices 1..p-2
  Eigen::MatrixXd C(n, nchars), S(n, nchars);
  for (u64 k = 0; k < n; ++k)
    for (int c = 1; c <= nchars; ++c) {
      double ang = 6.283185307179586 * static_cast<double>((k * c) % n) / static_cast<double>(n);
      C(k, c - 1) = std::cos(ang);
      S(k, c - 1) = std::sin(ang);
    }
  std::vector<int> rs;
  for (int r = 2; r <= d; ++r)
    if (d % r == 0 && n % r == 0) rs.push_back(r);
  std::vector<std::unordered_set<u64>> powsets;
  for (int r : rs) powsets.push_back(detail::rth_powers(p, d / r, r));
  std::vector<u64> char_r(nchars + 1);
  for (int c = 1; c <= nchars; ++c) char_r[c] = n / std::gcd(static_cast<u64>(c), n);
  const double bound_sq = static_cast<double>(d) * d * static_cast<double>(p) * (1.0 + 1e-9);
  const double bound = d * std::sqrt(static_cast<double>(p));

  const u64 batch = std::max<u64>(1, std::min<u64>(4096, (u64{1} << 22) / std::max<u64>(n, 1)));
  auto parts = parallel_chunks<detail::PolyBatchStats>(0, polys.size(), batch, [&](u64 lo, u64 hi) {
    detail::PolyBatchStats st;
    const int rows = static_cast<int>(hi - lo);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(rows, n);
    std::vector<std::vector<char>> is_power(rows, std::vector<char>(rs.size(), 0));
    for (int i = 0; i < rows; ++i) {
      const auto& f = polys[lo + i];
      for (u64 x = 0; x < p; ++x) {
        u64 v = 0;
        for (std::size_t k = f.size(); k-- > 0;) v = (v * x + f[k]) % p;
        if (v) H(i, table->log[v]) += 1.0;
      }
      u64 code = detail::encode_poly(f, p);
      for (std::size_t j = 0; j < rs.size(); ++j) is_power[i][j] = powsets[j].count(code) ? 1 : 0;
    }
    Eigen::MatrixXd Re = H * C;
    Eigen::MatrixXd Im = H * S;
    for (int i = 0; i < rows; ++i) {
      ++st.polys;
      for (int c = 1; c <= nchars; ++c) {
        bool skip = false;
        for (std::size_t j = 0; j < rs.size(); ++j)
          if (static_cast<u64>(rs[j]) == char_r[c] && is_power[i][j]) skip = true;
        if (skip) {
          ++st.skipped;
          continue;
        }
        ++st.instances;
        double mag2 = Re(i, c - 1) * Re(i, c - 1) + Im(i, c - 1) * Im(i, c - 1);
        if (mag2 > bound_sq) ++st.violations;
        long double ratio = std::sqrt(std::max(mag2, 0.0)) / bound;
        if (ratio > st.max_ratio) {
          st.max_ratio = ratio;
          st.worst = {p, d, polys[lo + i], static_cast<u64>(c), ratio};
        }
      }
    }
    return st;
  });
  for (auto& st : parts) {
    total.polys += st.polys;
    total.instances += st.instances;
    total.skipped += st.skipped;
    total.violations += st.violations;
    if (st.max_ratio > total.max_ratio) {
      total.max_ratio = st.max_ratio;
      total.worst = st.worst;
    }
  }
  return total;
}

inline WeilScanReport weil_scan(u64 pmax, int degmax, bool full = false, u64 pmin = 2) {
  WeilScanReport rep;
  rep.pmax = pmax;
  rep.degmax = degmax;
  rep.full = full;
  for (u64 p = std::max<u64>(2, pmin); p <= pmax; ++p) {
    if (!is_prime(p)) continue;
    ++rep.primes;
    for (int d = 1; d <= degmax; ++d) {
      std::vector<std::vector<u64>> polys;
      u64 covered = ipow(p, static_cast<unsigned>(d));
      if (full || d % static_cast<int>(p) == 0)
        polys = all_monic(p, d);
      else
        polys = weil_orbit_representatives(p, d);
      auto st = weil_check_polys(p, d, polys);
      rep.polynomials_checked += st.polys;
      rep.monic_covered += covered;
      rep.character_instances += st.instances;
      rep.skipped_rth_powers += st.skipped;
      rep.violations += st.violations;
      if (st.max_ratio > rep.max_ratio) {
        rep.max_ratio = st.max_ratio;
        rep.worst = st.worst;
      }
    }
  }
  return rep;
}

}  // namespace charsum
