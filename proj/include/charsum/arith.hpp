#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "charsum/error.hpp"

namespace charsum {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;
using i128 = __int128;

using BigInt = boost::multiprecision::cpp_int;
using ExactRational = boost::multiprecision::cpp_rational;

inline u64 mulmod(u64 a, u64 b, u64 m) {
  return static_cast<u64>(static_cast<u128>(a) * b % m);
}

inline u64 powmod(u64 base, u64 exp, u64 m) {
  if (m == 1) return 0;
  u64 result = 1;
  base %= m;
  while (exp) {
    if (exp & 1) result = mulmod(result, base, m);
    base = mulmod(base, base, m);
    exp >>= 1;
  }
  return result;
}

// Reduce a signed value into [0, m).
inline u64 mod_floor(i64 a, u64 m) {
  i128 r = static_cast<i128>(a) % static_cast<i128>(m);
  if (r < 0) r += m;
  return static_cast<u64>(r);
}

inline u64 ipow(u64 base, unsigned exp) {
  u64 r = 1;
  while (exp--) r *= base;
  return r;
}

// Returns the inverse of a mod m, or throws NotAUnit.
inline u64 inverse_mod(u64 a, u64 m) {
  if (m == 1) return 0;
  i128 old_r = static_cast<i128>(a % m), r = m;
  i128 old_s = 1, s = 0;
  while (r != 0) {
    i128 q = old_r / r;
    i128 t = old_r - q * r;
    old_r = r;
    r = t;
    t = old_s - q * s;
    old_s = s;
    s = t;
  }
  if (old_r != 1) fail(ErrorCode::NotAUnit, std::to_string(a) + " is not a unit mod " + std::to_string(m));
  old_s %= static_cast<i128>(m);
  if (old_s < 0) old_s += m;
  return static_cast<u64>(old_s);
}

inline bool is_prime(u64 n) {
  if (n < 2) return false;
  static constexpr u64 small[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  for (u64 p : small) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : small) {
    u64 x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

namespace detail {

// Brent's variant of Pollard rho. n must be odd and composite.
inline u64 pollard_brent(u64 n) {
  for (u64 c = 1;; ++c) {
    u64 y = 2, x = 2, g = 1, q = 1, ys = 2;
    const u64 block = 128;
    u64 r = 1;
    auto f = [&](u64 v) { return (mulmod(v, v, n) + c) % n; };
    do {
      x = y;
      for (u64 i = 0; i < r; ++i) y = f(y);
      u64 k = 0;
      do {
        ys = y;
        for (u64 i = 0; i < std::min(block, r - k); ++i) {
          y = f(y);
          q = mulmod(q, x > y ? x - y : y - x, n);
        }
        g = std::gcd(q, n);
        k += block;
      } while (k < r && g == 1);
      r <<= 1;
    } while (g == 1);
    if (g == n) {
      do {
        ys = f(ys);
        g = std::gcd(x > ys ? x - ys : ys - x, n);
      } while (g == 1);
    }
    if (g != n) return g;
  }
}

inline void factor_into(u64 n, std::map<u64, int>& out) {
  if (n == 1) return;
  if (is_prime(n)) {
    ++out[n];
    return;
  }
  u64 d = pollard_brent(n);
  factor_into(d, out);
  factor_into(n / d, out);
}

}  // namespace detail

struct FactoredModulus {
  u64 value = 1;
  std::map<u64, int> factors;
  u64 core = 1;
  int omega = 0;
  u64 tau = 1;
  u64 largest_prime = 1;
  u64 phi = 1;

  u64 prime_power(u64 p) const {
    auto it = factors.find(p);
    return it == factors.end() ? 1 : ipow(p, static_cast<unsigned>(it->second));
  }
  bool squarefree() const { return core == value; }
  std::vector<u64> primes() const {
    std::vector<u64> ps;
    for (auto& [p, e] : factors) ps.push_back(p);
    return ps;
  }
};

inline FactoredModulus from_factors(const std::map<u64, int>& factors) {
  FactoredModulus fm;
  fm.factors = factors;
  for (auto& [p, e] : factors) {
    u64 pk = ipow(p, static_cast<unsigned>(e));
    fm.value *= pk;
    fm.core *= p;
    fm.omega += 1;
    fm.tau *= static_cast<u64>(e + 1);
    fm.largest_prime = std::max(fm.largest_prime, p);
    fm.phi *= pk / p * (p - 1);
  }
  return fm;
}

inline FactoredModulus factor(u64 n) {
  require(n >= 1, ErrorCode::InvalidArgument, "factor: n must be positive");
  std::map<u64, int> f;
  u64 m = n;
  while ((m & 1) == 0) {
    ++f[2];
    m >>= 1;
  }
  for (u64 p = 3; p <= 1000000 && p * p <= m; p += 2) {
    while (m % p == 0) {
      ++f[p];
      m /= p;
    }
  }
  if (m > 1) detail::factor_into(m, f);
  return from_factors(f);
}

inline u64 euler_phi(u64 n) { return factor(n).phi; }

inline u64 radical(u64 n) { return factor(n).core; }

inline bool is_squarefree(u64 n) { return factor(n).squarefree(); }

inline std::vector<u64> divisors(const FactoredModulus& fm) {
  std::vector<u64> ds{1};
  for (auto& [p, e] : fm.factors) {
    std::size_t n = ds.size();
    u64 pk = 1;
    for (int i = 1; i <= e; ++i) {
      pk *= p;
      for (std::size_t j = 0; j < n; ++j) ds.push_back(ds[j] * pk);
    }
  }
  std::sort(ds.begin(), ds.end());
  return ds;
}

// Chinese remaindering of (residue, modulus) pairs with pairwise-coprime moduli.
inline u64 crt_combine(const std::vector<std::pair<u64, u64>>& parts) {
  u64 x = 0, mod = 1;
  for (auto [r, m] : parts) {
    require(m >= 1, ErrorCode::InvalidArgument, "crt_combine: modulus must be positive");
    if (std::gcd(mod, m) != 1)
      fail(ErrorCode::NonCoprimeModuli,
           "crt_combine: moduli " + std::to_string(mod) + " and " + std::to_string(m) + " are not coprime");
    r %= m;
    // x' = x + mod * ((r - x) * mod^{-1} mod m)
    u64 inv = inverse_mod(mod % m, m);
    u64 diff = (r + m - x % m) % m;
    u64 k = mulmod(diff, inv, m);
    x = x + mod * k;
    mod *= m;
  }
  return x % mod;
}

inline u64 multiplicative_order(u64 a, u64 modulus) {
  require(modulus >= 1, ErrorCode::InvalidArgument, "multiplicative_order: modulus must be positive");
  if (modulus == 1) return 1;
  a %= modulus;
  if (std::gcd(a, modulus) != 1)
    fail(ErrorCode::NotAUnit, std::to_string(a) + " is not a unit mod " + std::to_string(modulus));
  FactoredModulus ph = factor(euler_phi(modulus));
  u64 order = ph.value;
  for (auto& [p, e] : ph.factors) {
    for (int i = 0; i < e; ++i) {
      if (powmod(a, order / p, modulus) == 1)
        order /= p;
      else
        break;
    }
  }
  return order;
}

// Least primitive root mod p^k for odd p.
inline u64 primitive_root(u64 p, int k) {
  require(p > 2 && is_prime(p), ErrorCode::NoGenerator, "primitive_root: modulus must be an odd prime power");
  u64 q = ipow(p, static_cast<unsigned>(k));
  u64 phi = q / p * (p - 1);
  FactoredModulus ph = factor(phi);
  for (u64 g = 2; g < q; ++g) {
    if (g % p == 0) continue;
    bool ok = true;
    for (auto& [r, e] : ph.factors) {
      if (powmod(g, phi / r, q) == 1) {
        ok = false;
        break;
      }
    }
    if (ok) return g;
  }
  fail(ErrorCode::NoGenerator, "no primitive root found");
}

// Pohlig-Hellman discrete logarithms to a fixed generator of (Z/p^k)^*, p odd.
// Construction validates the generator; log() then costs O(sum sqrt(r)) per call.
class DiscreteLog {
 public:
  DiscreteLog(u64 g, u64 modulus) : mod_(modulus) {
    require(modulus >= 2, ErrorCode::NoGenerator, "discrete_log: modulus must be an odd prime power");
    FactoredModulus fm = factor(modulus);
    if (fm.omega != 1 || fm.largest_prime == 2)
      fail(ErrorCode::NoGenerator,
           "discrete_log: modulus must be an odd prime power (use the (-1,5) decomposition for powers of 2)");
    g_ = g % modulus;
    n_ = fm.phi;
    if (std::gcd(g_, modulus) != 1 || multiplicative_order(g_, modulus) != n_)
      fail(ErrorCode::NoGenerator, std::to_string(g) + " does not generate the unit group mod " + std::to_string(modulus));
    g_inv_ = inverse_mod(g_, mod_);
    for (auto& [r, e] : factor(n_).factors) {
      Part part;
      part.r = r;
      part.e = e;
      part.gamma = powmod(g_, n_ / r, mod_);
      part.step = 1;
      while (part.step * part.step < r) ++part.step;
      u64 cur = 1;
      part.baby.reserve(part.step * 2);
      for (u64 j = 0; j < part.step; ++j) {
        part.baby.emplace(cur, j);
        cur = mulmod(cur, part.gamma, mod_);
      }
      part.giant = powmod(inverse_mod(part.gamma, mod_), part.step, mod_);
      parts_.push_back(std::move(part));
    }
  }

  u64 group_order() const { return n_; }

  u64 log(u64 y) const {
    y %= mod_;
    if (std::gcd(y, mod_) != 1)
      fail(ErrorCode::NotAUnit, std::to_string(y) + " is not a unit mod " + std::to_string(mod_));
    std::vector<std::pair<u64, u64>> residues;
    for (const auto& part : parts_) {
      u64 x = 0, rpow = 1;
      for (int i = 0; i < part.e; ++i) {
        u64 h = mulmod(powmod(g_inv_, x, mod_), y, mod_);
        h = powmod(h, n_ / (rpow * part.r), mod_);
        x += solve(part, h) * rpow;
        rpow *= part.r;
      }
      residues.emplace_back(x % rpow, rpow);
    }
    return crt_combine(residues);
  }

 private:
  struct Part {
    u64 r = 0;
    int e = 0;
    u64 gamma = 1;
    u64 step = 1;
    u64 giant = 1;
    std::unordered_map<u64, u64> baby;
  };

  // x in [0, r) with gamma^x = h, gamma of order r.
  u64 solve(const Part& part, u64 h) const {
    u64 cur = h;
    for (u64 i = 0; i <= part.step; ++i) {
      auto it = part.baby.find(cur);
      if (it != part.baby.end()) return (i * part.step + it->second) % part.r;
      cur = mulmod(cur, part.giant, mod_);
    }
    fail(ErrorCode::NoGenerator, "discrete_log: element not in subgroup");
  }

  u64 mod_;
  u64 g_ = 1;
  u64 n_ = 1;
  u64 g_inv_ = 1;
  std::vector<Part> parts_;
};

// Discrete logarithm of y to base g in (Z/p^k)^*, p odd.
inline u64 discrete_log(u64 g, u64 y, u64 modulus) {
  require(modulus >= 2, ErrorCode::NoGenerator, "discrete_log: modulus must be an odd prime power");
  FactoredModulus fm = factor(modulus);
  if (fm.omega == 1 && fm.largest_prime != 2 && std::gcd(y % modulus, modulus) != 1)
    fail(ErrorCode::NotAUnit, std::to_string(y) + " is not a unit mod " + std::to_string(modulus));
  return DiscreteLog(g, modulus).log(y);
}

inline ExactRational make_rational(const BigInt& num, const BigInt& den) { return ExactRational(num, den); }

inline BigInt to_big(u64 v) { return BigInt(v); }

inline u64 big_mod(const BigInt& v, u64 m) {
  BigInt r = v % m;
  if (r < 0) r += m;
  return static_cast<u64>(r);
}

}  // namespace charsum
