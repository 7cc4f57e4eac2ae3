#pragma once

#include <complex>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "charsum/arith.hpp"
#include "charsum/error.hpp"

namespace charsum {

// e(num/den), kept reduced with num in [0, den).
struct RootOfUnity {
  u64 num = 0;
  u64 den = 1;

  static RootOfUnity make(i64 num, u64 den) {
    u64 r = mod_floor(num, den);
    u64 g = std::gcd(r, den);
    if (r == 0) return {0, 1};
    return {r / g, den / g};
  }
  RootOfUnity operator*(const RootOfUnity& o) const {
    u64 n = std::lcm(den, o.den);
    u64 a = mulmod(num, n / den, n) + mulmod(o.num, n / o.den, n);
    return make(static_cast<i64>(a % n), n);
  }
  RootOfUnity conj() const { return make(-static_cast<i64>(num), den); }
  bool operator==(const RootOfUnity& o) const { return num == o.num && den == o.den; }
  std::complex<double> value() const {
    const double ang = 6.283185307179586 * static_cast<double>(num) / static_cast<double>(den);
    return {std::cos(ang), std::sin(ang)};
  }
};

// Discrete-log table for (Z/p^k)^*. Entry x holds the code of x or kNoLog for
// non-units. Odd p: code e with g^e = x. p = 2, k >= 3: x = (-1)^a 5^b has code
// a*2^{k-2} + b. p = 2, k = 2: code a. p = 2, k = 1: code 0.
struct LogTable {
  static constexpr std::uint32_t kNoLog = 0xffffffffu;
  u64 p = 0;
  int k = 0;
  u64 pk = 0;
  u64 phi = 0;
  u64 generator = 0;
  std::vector<std::uint32_t> log;
  std::shared_ptr<const DiscreteLog> dlog;  // used instead of `log` above the table cap
};

namespace detail {

constexpr u64 kTableCap = u64{1} << 22;

inline std::mutex& cache_dir_mutex() {
  static std::mutex m;
  return m;
}
inline std::optional<std::string>& cache_dir_slot() {
  static std::optional<std::string> dir;
  return dir;
}

inline std::optional<std::string> effective_cache_dir() {
  std::lock_guard<std::mutex> lock(cache_dir_mutex());
  if (cache_dir_slot()) return cache_dir_slot();
  if (const char* env = std::getenv("CHARSUM_CACHE"); env && *env) return std::string(env);
  return std::nullopt;
}

inline u64 two_power_log5(u64 x, int k) {
  // b with 5^b = x mod 2^k, x = 1 mod 4, via bit-by-bit lifting in the cyclic 2-group.
  const u64 mod = u64{1} << k;
  const u64 order = u64{1} << (k - 2);
  const u64 inv5 = inverse_mod(5, mod);
  u64 b = 0;
  for (u64 bit = 1; bit < order; bit <<= 1) {
    u64 rest = mulmod(x, powmod(inv5, b, mod), mod);
    if (powmod(rest, order / (bit << 1), mod) != 1) b |= bit;
  }
  return b;
}

inline u64 compute_code(const LogTable& t, u64 x) {
  const u64 p = t.p, pk = t.pk;
  const int k = t.k;
  x %= pk;
  if (p == 2) {
    if (k == 1) return 0;
    u64 a = (x % 4 == 3) ? 1 : 0;
    if (k == 2) return a;
    u64 y = a ? (pk - x) : x;
    return a * (u64{1} << (k - 2)) + two_power_log5(y, k);
  }
  return t.dlog->log(x);
}

inline std::shared_ptr<LogTable> build_table(u64 p, int k) {
  auto t = std::make_shared<LogTable>();
  t->p = p;
  t->k = k;
  t->pk = ipow(p, static_cast<unsigned>(k));
  t->phi = t->pk / p * (p - 1);
  t->generator = p == 2 ? 5 : primitive_root(p, k);
  if (t->pk > kTableCap) {
    if (p != 2) t->dlog = std::make_shared<DiscreteLog>(t->generator, t->pk);
    return t;
  }

  auto dir = effective_cache_dir();
  std::filesystem::path file;
  if (dir) {
    file = std::filesystem::path(*dir) / ("dlog_" + std::to_string(p) + "_" + std::to_string(k) + ".bin");
    std::ifstream in(file, std::ios::binary);
    if (in) {
      std::vector<std::uint32_t> data(t->pk);
      in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(std::uint32_t)));
      if (in.gcount() == static_cast<std::streamsize>(data.size() * sizeof(std::uint32_t)) &&
          in.peek() == std::char_traits<char>::eof() && data[1 % t->pk] == (t->pk == 1 ? data[0] : 0)) {
        t->log = std::move(data);
        return t;
      }
    }
  }

  t->log.assign(t->pk, LogTable::kNoLog);
  if (p == 2) {
    if (k == 1) {
      t->log[1 % t->pk] = 0;
    } else {
      const u64 half = k >= 3 ? (u64{1} << (k - 2)) : 1;
      for (u64 a = 0; a < 2; ++a) {
        u64 x = a ? t->pk - 1 : 1;
        for (u64 b = 0; b < half; ++b) {
          t->log[x] = static_cast<std::uint32_t>(a * (k >= 3 ? half : 1) + b);
          if (k >= 3) x = mulmod(x, 5, t->pk);
        }
      }
    }
  } else {
    u64 x = 1;
    for (u64 e = 0; e < t->phi; ++e) {
      t->log[x] = static_cast<std::uint32_t>(e);
      x = mulmod(x, t->generator, t->pk);
    }
  }

  if (dir) {
    std::error_code ec;
    std::filesystem::create_directories(*dir, ec);
    std::filesystem::path tmp = file;
    tmp += ".tmp" + std::to_string(reinterpret_cast<std::uintptr_t>(t.get()));
    std::ofstream out(tmp, std::ios::binary);
    if (out) {
      out.write(reinterpret_cast<const char*>(t->log.data()), static_cast<std::streamsize>(t->log.size() * sizeof(std::uint32_t)));
      out.close();
      if (out) std::filesystem::rename(tmp, file, ec);
      if (ec || !out) std::filesystem::remove(tmp, ec);
    }
  }
  return t;
}

}  // namespace detail

inline void set_cache_dir(std::optional<std::string> dir) {
  std::lock_guard<std::mutex> lock(detail::cache_dir_mutex());
  detail::cache_dir_slot() = std::move(dir);
}

inline std::shared_ptr<const LogTable> log_table(u64 p, int k) {
  static std::mutex mutex;
  static std::map<std::pair<u64, int>, std::shared_ptr<const LogTable>> registry;
  std::lock_guard<std::mutex> lock(mutex);
  auto key = std::make_pair(p, k);
  auto it = registry.find(key);
  if (it != registry.end()) return it->second;
  auto t = detail::build_table(p, k);
  registry.emplace(key, t);
  return t;
}

struct ComponentCharacter {
  u64 p = 2;
  int k = 0;
  u64 pk = 1;
  u64 phi = 1;
  u64 index = 0;
  u64 order = 1;
  std::shared_ptr<const LogTable> table;

  // Code of x in the table encoding, or nullopt when p | x.
  std::optional<u64> code(u64 x) const {
    x %= pk;
    if (x % p == 0) return std::nullopt;
    if (!table->log.empty()) return table->log[x];
    return detail::compute_code(*table, x);
  }

  // Numerator of the phase over phi for a unit with the given code.
  u64 numerator_from_code(u64 c) const {
    if (p != 2) return mulmod(index, c, phi);
    if (k == 1) return 0;
    if (k == 2) return (index * c) % 2;
    const u64 half = u64{1} << (k - 2);
    u64 ia = index / half, ib = index % half;
    u64 a = c / half, b = c % half;
    return (ia * a * half + 2 * mulmod(ib, b, half)) % phi;
  }

  std::optional<RootOfUnity> evaluate(u64 x) const {
    auto c = code(x);
    if (!c) return std::nullopt;
    return RootOfUnity::make(static_cast<i64>(numerator_from_code(*c)), phi);
  }

  bool principal() const { return order == 1; }

  // Exponent j of the conductor p^j of this component.
  int conductor_exponent() const {
    if (principal()) return 0;
    int start = p == 2 ? 2 : 1;
    for (int j = start; j < k; ++j) {
      u64 y = (1 + ipow(p, static_cast<unsigned>(j))) % pk;
      if (numerator_from_code(*code(y)) == 0) return j;
    }
    return k;
  }
};

inline ComponentCharacter make_component(u64 p, int k, u64 index) {
  ComponentCharacter c;
  c.p = p;
  c.k = k;
  c.pk = ipow(p, static_cast<unsigned>(k));
  c.phi = c.pk / p * (p - 1);
  if (index >= c.phi)
    fail(ErrorCode::IndexOutOfRange, "component index " + std::to_string(index) + " out of range for modulus " +
                                         std::to_string(c.pk) + " (group order " + std::to_string(c.phi) + ")");
  c.index = index;
  c.table = log_table(p, k);
  u64 g;
  if (p != 2) {
    g = std::gcd(index, c.phi);
  } else if (k == 1) {
    g = 1;
  } else if (k == 2) {
    g = std::gcd(index, c.phi);
  } else {
    const u64 half = u64{1} << (k - 2);
    g = std::gcd(c.phi, std::gcd((index / half) * half, 2 * (index % half)));
  }
  c.order = c.phi / std::gcd(g, c.phi);
  if (g == 0) c.order = 1;
  return c;
}

struct DirichletCharacter {
  FactoredModulus modulus;
  std::vector<ComponentCharacter> components;
  u64 order = 1;
  u64 conductor = 1;

  u64 q() const { return modulus.value; }
  bool principal() const { return order == 1; }
  bool primitive() const { return conductor == modulus.value; }

  std::vector<u64> indices() const {
    std::vector<u64> v;
    for (auto& c : components) v.push_back(c.index);
    return v;
  }

  // Phase numerator k with chi(x) = e(k / order), or nullopt when gcd(x, q) > 1.
  std::optional<u64> phase(i64 x_signed) const {
    u64 x = mod_floor(x_signed, modulus.value);
    u64 total = 0;
    for (auto& c : components) {
      auto code = c.code(x);
      if (!code) return std::nullopt;
      u64 num = c.numerator_from_code(*code);
      u64 unit = c.phi / c.order;
      total = (total + mulmod(num / unit, order / c.order, order)) % order;
    }
    return total;
  }

  std::optional<RootOfUnity> evaluate(i64 x) const {
    auto ph = phase(x);
    if (!ph) return std::nullopt;
    return RootOfUnity::make(static_cast<i64>(*ph), order);
  }

  std::complex<double> value(i64 x) const {
    auto r = evaluate(x);
    return r ? r->value() : std::complex<double>{0.0, 0.0};
  }

  std::string token() const {
    std::ostringstream os;
    os << "q=" << modulus.value << ";idx=";
    for (std::size_t i = 0; i < components.size(); ++i) os << (i ? "," : "") << components[i].index;
    return os.str();
  }
};

inline DirichletCharacter build_character(const FactoredModulus& modulus, const std::vector<u64>& indices) {
  if (indices.size() != modulus.factors.size())
    fail(ErrorCode::IndexOutOfRange, "expected " + std::to_string(modulus.factors.size()) + " component indices, got " +
                                         std::to_string(indices.size()));
  DirichletCharacter chi;
  chi.modulus = modulus;
  std::size_t i = 0;
  for (auto& [p, e] : modulus.factors) {
    chi.components.push_back(make_component(p, e, indices[i++]));
    const auto& c = chi.components.back();
    chi.order = std::lcm(chi.order, c.order);
    chi.conductor *= ipow(p, static_cast<unsigned>(c.conductor_exponent()));
  }
  return chi;
}

inline DirichletCharacter build_character(u64 q, const std::vector<u64>& indices) {
  return build_character(factor(q), indices);
}

inline DirichletCharacter principal_character(u64 q) {
  FactoredModulus fm = factor(q);
  return build_character(fm, std::vector<u64>(fm.factors.size(), 0));
}

inline u64 conductor(const DirichletCharacter& chi) { return chi.conductor; }

inline DirichletCharacter parse_character(const std::string& token) {
  auto semi = token.find(';');
  if (token.rfind("q=", 0) != 0 || semi == std::string::npos || token.compare(semi + 1, 4, "idx=") != 0)
    fail(ErrorCode::ParseError, "character token must look like q=<int>;idx=<i1,...>: " + token);
  u64 q = 0;
  std::vector<u64> idx;
  try {
    std::size_t used = 0;
    std::string qs = token.substr(2, semi - 2);
    q = std::stoull(qs, &used);
    if (used != qs.size() || q == 0) throw std::invalid_argument("q");
    std::string rest = token.substr(semi + 5);
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      std::size_t u = 0;
      idx.push_back(std::stoull(item, &u));
      if (u != item.size()) throw std::invalid_argument("idx");
    }
  } catch (const std::logic_error&) {
    fail(ErrorCode::ParseError, "malformed character token: " + token);
  }
  return build_character(q, idx);
}

// Number of characters mod q equals phi(q); ranks are mixed-radix with the
// first component most significant.
inline DirichletCharacter character_by_rank(const FactoredModulus& modulus, u64 rank) {
  std::vector<u64> radix;
  for (auto& [p, e] : modulus.factors) radix.push_back(ipow(p, static_cast<unsigned>(e)) / p * (p - 1));
  std::vector<u64> idx(radix.size());
  for (std::size_t i = radix.size(); i-- > 0;) {
    idx[i] = rank % radix[i];
    rank /= radix[i];
  }
  return build_character(modulus, idx);
}

inline std::vector<DirichletCharacter> all_characters(u64 q) {
  FactoredModulus fm = factor(q);
  std::vector<DirichletCharacter> out;
  for (u64 r = 0; r < fm.phi; ++r) out.push_back(character_by_rank(fm, r));
  return out;
}

inline std::vector<DirichletCharacter> primitive_characters(u64 q) {
  std::vector<DirichletCharacter> out;
  for (auto& chi : all_characters(q))
    if (chi.primitive()) out.push_back(std::move(chi));
  return out;
}

// Characters with order dividing 2, built component-wise without enumerating phi(q) characters.
inline std::vector<DirichletCharacter> real_characters(u64 q) {
  FactoredModulus fm = factor(q);
  std::vector<std::vector<u64>> choices;
  for (auto& [p, e] : fm.factors) {
    u64 phi = ipow(p, static_cast<unsigned>(e)) / p * (p - 1);
    std::vector<u64> c{0};
    if (p != 2) {
      c.push_back(phi / 2);
    } else if (e == 2) {
      c.push_back(1);
    } else if (e >= 3) {
      u64 half = u64{1} << (e - 2);
      c.push_back(half);               // nontrivial on -1 only
      c.push_back(half / 2);           // nontrivial on 5 only
      c.push_back(half + half / 2);    // both
    }
    choices.push_back(c);
  }
  std::vector<DirichletCharacter> out;
  std::vector<u64> idx(choices.size(), 0);
  std::vector<std::size_t> pos(choices.size(), 0);
  for (;;) {
    for (std::size_t i = 0; i < choices.size(); ++i) idx[i] = choices[i][pos[i]];
    out.push_back(build_character(fm, idx));
    std::size_t i = choices.size();
    while (i > 0) {
      --i;
      if (++pos[i] < choices[i].size()) break;
      pos[i] = 0;
      if (i == 0) return out;
    }
    if (choices.empty()) return out;
  }
}

inline std::vector<DirichletCharacter> decompose(const DirichletCharacter& chi, const std::vector<u64>& split) {
  u64 prod = 1;
  for (std::size_t i = 0; i < split.size(); ++i) {
    if (split[i] == 0) fail(ErrorCode::InvalidSplit, "split factors must be positive");
    for (std::size_t j = i + 1; j < split.size(); ++j)
      if (std::gcd(split[i], split[j]) != 1)
        fail(ErrorCode::InvalidSplit, "split factors " + std::to_string(split[i]) + " and " + std::to_string(split[j]) +
                                          " are not coprime");
    if (prod > chi.q() / split[i] + 1) fail(ErrorCode::InvalidSplit, "split does not multiply to the modulus");
    prod *= split[i];
  }
  if (prod != chi.q()) fail(ErrorCode::InvalidSplit, "split does not multiply to the modulus");
  std::vector<DirichletCharacter> out;
  for (u64 f : split) {
    FactoredModulus fm = factor(f);
    std::vector<u64> idx;
    for (auto& c : chi.components)
      if (f % c.p == 0) idx.push_back(c.index);
    out.push_back(build_character(fm, idx));
  }
  return out;
}

}  // namespace charsum
