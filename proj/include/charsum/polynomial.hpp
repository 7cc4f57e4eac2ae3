#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "charsum/arith.hpp"

namespace charsum {

// Dense polynomial over Q, coefficients from the constant term upward.
class RatPoly {
 public:
  RatPoly() = default;
  explicit RatPoly(std::vector<ExactRational> c) : c_(std::move(c)) { trim(); }
  static RatPoly constant(const ExactRational& v) { return RatPoly({v}); }
  // x - a
  static RatPoly linear_root(i64 a) { return RatPoly({ExactRational(-a), ExactRational(1)}); }

  const std::vector<ExactRational>& coeffs() const { return c_; }
  bool is_zero() const { return c_.empty(); }
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  ExactRational coeff(std::size_t i) const { return i < c_.size() ? c_[i] : ExactRational(0); }

  RatPoly operator+(const RatPoly& o) const {
    std::vector<ExactRational> r(std::max(c_.size(), o.c_.size()));
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = coeff(i) + o.coeff(i);
    return RatPoly(std::move(r));
  }
  RatPoly operator-(const RatPoly& o) const { return *this + o * ExactRational(-1); }
  RatPoly operator*(const RatPoly& o) const {
    if (is_zero() || o.is_zero()) return {};
    std::vector<ExactRational> r(c_.size() + o.c_.size() - 1);
    for (std::size_t i = 0; i < c_.size(); ++i)
      for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
    return RatPoly(std::move(r));
  }
  RatPoly operator*(const ExactRational& s) const {
    std::vector<ExactRational> r = c_;
    for (auto& v : r) v *= s;
    return RatPoly(std::move(r));
  }

  ExactRational eval(const ExactRational& x) const {
    ExactRational r = 0;
    for (std::size_t i = c_.size(); i-- > 0;) r = r * x + c_[i];
    return r;
  }

  // Exact division by (x - a); returns false (leaving *this untouched) when a is not a root.
  bool divide_by_root(i64 a) {
    if (is_zero() || eval(ExactRational(a)) != 0) return false;
    std::vector<ExactRational> q(c_.size() - 1);
    ExactRational carry = 0;
    for (std::size_t i = c_.size(); i-- > 1;) {
      carry = c_[i] + carry * a;
      q[i - 1] = carry;
    }
    c_ = std::move(q);
    trim();
    return true;
  }

  std::string to_string() const {
    if (c_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (std::size_t i = c_.size(); i-- > 0;) {
      if (c_[i] == 0) continue;
      ExactRational v = c_[i];
      if (!first) os << (v < 0 ? " - " : " + ");
      else if (v < 0) os << "-";
      if (v < 0) v = -v;
      first = false;
      bool unit = v == 1;
      if (!unit || i == 0) os << v;
      if (i > 0) os << (unit ? "" : "*") << "x";
      if (i > 1) os << "^" << i;
    }
    return os.str();
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }
  std::vector<ExactRational> c_;
};

inline RatPoly pow(const RatPoly& p, unsigned e) {
  RatPoly r = RatPoly::constant(1);
  for (unsigned i = 0; i < e; ++i) r = r * p;
  return r;
}

// Primitive integer polynomial and rational content with poly = content * primitive.
inline std::pair<ExactRational, std::vector<BigInt>> primitive_part(const RatPoly& poly) {
  if (poly.is_zero()) return {ExactRational(0), {}};
  BigInt den_lcm = 1;
  for (auto& c : poly.coeffs()) {
    BigInt d = boost::multiprecision::denominator(c);
    den_lcm = den_lcm / boost::multiprecision::gcd(den_lcm, d) * d;
  }
  std::vector<BigInt> ints;
  BigInt g = 0;
  for (auto& c : poly.coeffs()) {
    BigInt v = boost::multiprecision::numerator(c) * (den_lcm / boost::multiprecision::denominator(c));
    ints.push_back(v);
    g = boost::multiprecision::gcd(g, v);
  }
  if (ints.back() < 0) g = -g;
  for (auto& v : ints) v /= g;
  return {ExactRational(g, den_lcm), ints};
}

inline u64 eval_int_poly_mod(const std::vector<BigInt>& coeffs, i64 x, u64 p) {
  u64 xr = mod_floor(x, p);
  u64 r = 0;
  for (std::size_t i = coeffs.size(); i-- > 0;) r = (mulmod(r, xr, p) + big_mod(coeffs[i], p)) % p;
  return r;
}

}  // namespace charsum
