#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "charsum/arith.hpp"
#include "charsum/characters.hpp"
#include "charsum/error.hpp"

namespace charsum {

struct Term {
  i64 root = 0;
  i64 mult = 0;
  bool operator==(const Term&) const = default;
};

// f(x) = prod (x - a)^d with distinct integer roots, sorted by root.
// `degree()` is the formal degree: for a quotient of shifts it doubles even if
// integer roots happen to cancel; `reduced_degree()` is sum |d| of the stored terms.
class FactoredRational {
 public:
  FactoredRational() = default;

  explicit FactoredRational(const std::vector<Term>& terms) {
    std::map<i64, i64> merged;
    for (const auto& t : terms) merged[t.root] += t.mult;
    for (auto& [a, d] : merged)
      if (d != 0) terms_.push_back({a, d});
    formal_degree_ = reduced_degree();
  }

  static FactoredRational identity() { return FactoredRational({{0, 1}}); }

  const std::vector<Term>& terms() const { return terms_; }
  bool is_constant() const { return terms_.empty(); }

  i64 reduced_degree() const {
    i64 d = 0;
    for (auto& t : terms_) d += std::llabs(t.mult);
    return d;
  }
  i64 degree() const { return formal_degree_; }
  void set_formal_degree(i64 d) { formal_degree_ = d; }

  std::optional<i64> multiplicity_at(i64 root) const {
    for (auto& t : terms_)
      if (t.root == root) return t.mult;
    return std::nullopt;
  }

  // The polynomial part's degree minus the pole part's degree.
  i64 net_degree() const {
    i64 d = 0;
    for (auto& t : terms_) d += t.mult;
    return d;
  }

  // f(x + h) has roots a - h.
  FactoredRational translated(i64 h) const {
    std::vector<Term> ts;
    for (auto& t : terms_) ts.push_back({t.root - h, t.mult});
    FactoredRational out(ts);
    out.formal_degree_ = formal_degree_;
    return out;
  }

  FactoredRational reciprocal() const {
    std::vector<Term> ts;
    for (auto& t : terms_) ts.push_back({t.root, -t.mult});
    FactoredRational out(ts);
    out.formal_degree_ = formal_degree_;
    return out;
  }

  // Evaluates f(x) mod m when every factor x - a is a unit mod m.
  std::optional<u64> eval_mod(i64 x, u64 m) const {
    u64 num = 1 % m, den = 1 % m;
    for (auto& t : terms_) {
      u64 v = mod_floor(x - t.root, m);
      if (std::gcd(v, m) != 1) return std::nullopt;
      u64 pw = powmod(v, static_cast<u64>(std::llabs(t.mult)), m);
      if (t.mult > 0)
        num = mulmod(num, pw, m);
      else
        den = mulmod(den, pw, m);
    }
    return mulmod(num, inverse_mod(den, m), m);
  }

  std::string to_string() const {
    if (terms_.empty()) return "1";
    std::ostringstream os;
    bool first = true;
    for (auto& t : terms_) {
      if (!first) os << ' ';
      first = false;
      if (t.root == 0)
        os << "(x)";
      else if (t.root > 0)
        os << "(x-" << t.root << ")";
      else
        os << "(x+" << -t.root << ")";
      if (t.mult != 1) os << '^' << t.mult;
    }
    return os.str();
  }

  bool operator==(const FactoredRational& o) const { return terms_ == o.terms_; }

 private:
  std::vector<Term> terms_;
  i64 formal_degree_ = 0;
};

inline FactoredRational operator*(const FactoredRational& a, const FactoredRational& b) {
  std::vector<Term> ts = a.terms();
  ts.insert(ts.end(), b.terms().begin(), b.terms().end());
  FactoredRational out(ts);
  out.set_formal_degree(a.degree() + b.degree());
  return out;
}

// Phase numerator of chi(f(x)) = prod chi(x - a)^d over chi.order, or nullopt
// when some factor x - a shares a prime with the modulus.
inline std::optional<u64> chi_of(const DirichletCharacter& chi, const FactoredRational& f, i64 x) {
  const u64 n = chi.order;
  u64 total = 0;
  for (auto& t : f.terms()) {
    auto ph = chi.phase(x - t.root);
    if (!ph) return std::nullopt;
    u64 d = mod_floor(t.mult, n);
    total = (total + mulmod(*ph, d, n)) % n;
  }
  return total;
}

inline FactoredRational parse_rational(const std::string& text) {
  std::vector<Term> terms;
  std::size_t i = 0;
  auto skip = [&] {
    while (i < text.size() && (std::isspace(static_cast<unsigned char>(text[i])) || text[i] == '*')) ++i;
  };
  auto bad = [&](const std::string& why) -> void {
    fail(ErrorCode::ParseError, "cannot parse rational function '" + text + "': " + why);
  };
  auto read_int = [&]() -> i64 {
    std::size_t start = i;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) ++i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    if (start == i || (i == start + 1 && !std::isdigit(static_cast<unsigned char>(text[start])))) bad("expected integer");
    return std::stoll(text.substr(start, i - start));
  };
  skip();
  if (i == text.size()) return FactoredRational();
  if (text.substr(i) == "1") return FactoredRational();
  while (i < text.size()) {
    i64 root = 0;
    bool paren = text[i] == '(';
    if (paren) ++i;
    skip();
    if (i >= text.size() || text[i] != 'x') bad("expected 'x'");
    ++i;
    while (i < text.size() && text[i] == ' ') ++i;
    if (paren) {
      if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
        bool neg = text[i] == '-';
        ++i;
        while (i < text.size() && text[i] == ' ') ++i;
        std::size_t start = i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
        if (start == i) bad("expected root");
        i64 a = std::stoll(text.substr(start, i - start));
        root = neg ? a : -a;
      }
      while (i < text.size() && text[i] == ' ') ++i;
      if (i >= text.size() || text[i] != ')') bad("expected ')'");
      ++i;
    }
    i64 mult = 1;
    if (i < text.size() && text[i] == '^') {
      ++i;
      if (i < text.size() && text[i] == '(') {
        ++i;
        mult = read_int();
        if (i >= text.size() || text[i] != ')') bad("expected ')' after exponent");
        ++i;
      } else {
        mult = read_int();
      }
    }
    terms.push_back({root, mult});
    skip();
  }
  return FactoredRational(terms);
}

// Roots merged by residue class mod p, multiplicities summed, zeros dropped.
inline FactoredRational reduce_mod_p(const FactoredRational& f, u64 p) {
  std::vector<Term> ts;
  for (auto& t : f.terms()) ts.push_back({static_cast<i64>(mod_floor(t.root, p)), t.mult});
  return FactoredRational(ts);
}

inline bool satisfies_star(const FactoredRational& f, u64 p) {
  const FactoredRational r = reduce_mod_p(f, p);
  for (auto& t : r.terms())
    if (t.mult == 1 || t.mult == -1) return true;
  return false;
}

struct AdmissibilityReport {
  u64 q_bar = 1;
  u64 q_r = 1;
  long double tau = 0;
  bool tau_defaulted = false;
  std::vector<u64> good_primes;
  u64 good_product = 1;
  long double threshold = 0;  // q_bar / q_r^tau
  bool admissible = false;
};

inline long double default_tau(u64 q_r) {
  long double l = std::log(static_cast<long double>(q_r));
  if (q_r < 3 || l <= 1.0L)
    fail(ErrorCode::LogLogUndefined, "log log q_r is undefined for q_r = " + std::to_string(q_r) + "; supply tau explicitly");
  return 10.0L / std::log(l);
}

inline AdmissibilityReport admissible(const FactoredRational& f, u64 q_bar, u64 q_r,
                                      std::optional<long double> tau = std::nullopt) {
  require(q_bar >= 1 && q_r >= 1, ErrorCode::InvalidArgument, "admissible: moduli must be positive");
  FactoredModulus fb = factor(q_bar);
  if (!fb.squarefree()) fail(ErrorCode::NotSquarefree, "q_bar = " + std::to_string(q_bar) + " is not squarefree");
  if (q_r % q_bar != 0)
    fail(ErrorCode::InvalidArgument, "q_bar = " + std::to_string(q_bar) + " does not divide q_r = " + std::to_string(q_r));
  AdmissibilityReport r;
  r.q_bar = q_bar;
  r.q_r = q_r;
  if (tau) {
    r.tau = *tau;
  } else {
    r.tau = default_tau(q_r);
    r.tau_defaulted = true;
  }
  for (auto& [p, e] : fb.factors) {
    if (satisfies_star(f, p)) {
      r.good_primes.push_back(p);
      r.good_product *= p;
    }
  }
  long double log_thr = std::log(static_cast<long double>(q_bar)) - r.tau * std::log(static_cast<long double>(q_r));
  r.threshold = std::exp(log_thr);
  r.admissible = std::log(static_cast<long double>(r.good_product)) > log_thr;
  return r;
}

}  // namespace charsum
