#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "charsum/arith.hpp"
#include "charsum/condition.hpp"
#include "charsum/error.hpp"
#include "charsum/parallel.hpp"
#include "charsum/reduction.hpp"
#include "charsum/sums.hpp"

namespace charsum {

enum class BoundName {
  ShortSumCore,           // N e^{-sqrt(log N)} under the (log q)^{9/10} condition
  PolyaVinogradov,        // sqrt(q) sqrt(log q) sqrt(M)
  ZeroFreeRegion,         // theta with the (log qT)^{9/10} term
  ZeroFreeRegionRefined,  // theta with the (log qT)^{1-c'} term
  ZeroFreeRegionIwaniec,
  MixedSumPrime,
  MixedSumSquarefree,
  PostnikovMixed,
  GrahamRingrose,
  AdmissibleCompleteSum,
  GrahamRingroseMixed,
  GrahamRingrosePostnikov,
  IteratedSquarefree,
  ShortSumGeneral,
  IwaniecKowalskiRange,
  VinogradovLemma,
  VinogradovPostnikov,
  ClaimExponentProduct,
  ClaimBlockCount,
  CompositeDegree,
  Weil,                   // d^{omega(q1)} q / sqrt(q1) for squarefree q
};

struct BoundNameInfo {
  BoundName name;
  const char* id;
  bool has_bound;
};

inline const std::vector<BoundNameInfo>& bound_names() {
  static const std::vector<BoundNameInfo> table = {
      {BoundName::ShortSumCore, "short-sum-core", true},
      {BoundName::PolyaVinogradov, "polya-vinogradov", true},
      {BoundName::ZeroFreeRegion, "zero-free-region", true},
      {BoundName::ZeroFreeRegionRefined, "zero-free-region-refined", true},
      {BoundName::ZeroFreeRegionIwaniec, "zero-free-region-iwaniec", true},
      {BoundName::MixedSumPrime, "mixed-sum-prime", true},
      {BoundName::MixedSumSquarefree, "mixed-sum-squarefree", true},
      {BoundName::PostnikovMixed, "postnikov-mixed", true},
      {BoundName::GrahamRingrose, "graham-ringrose", true},
      {BoundName::AdmissibleCompleteSum, "admissible-complete-sum", true},
      {BoundName::GrahamRingroseMixed, "graham-ringrose-mixed", true},
      {BoundName::GrahamRingrosePostnikov, "graham-ringrose-postnikov", true},
      {BoundName::IteratedSquarefree, "iterated-squarefree", true},
      {BoundName::ShortSumGeneral, "short-sum-general", true},
      {BoundName::IwaniecKowalskiRange, "iwaniec-kowalski-range", true},
      {BoundName::VinogradovLemma, "vinogradov-lemma", true},
      {BoundName::VinogradovPostnikov, "vinogradov-postnikov", true},
      {BoundName::ClaimExponentProduct, "claim-exponent-product", false},
      {BoundName::ClaimBlockCount, "claim-block-count", false},
      {BoundName::CompositeDegree, "composite-degree", false},
      {BoundName::Weil, "weil", true},
  };
  return table;
}

inline std::string to_string(BoundName n) {
  for (auto& e : bound_names())
    if (e.name == n) return e.id;
  return "?";
}

inline BoundName parse_bound_name(const std::string& s) {
  for (auto& e : bound_names())
    if (s == e.id) return e.name;
  fail(ErrorCode::ParseError, "unknown bound name '" + s + "'");
}

struct BoundParams {
  long double c = 1;
  long double C = 1;
  long double kappa = 1e-3L;
  long double T = 1;
  long double c_prime = 0.5L;
  std::optional<long double> tau;
};

using BoundInputs = std::map<std::string, long double>;

struct BoundReport {
  std::string name;
  BoundInputs inputs;  // after derivation of p, q', K, ... from q
  BoundParams params;
  std::vector<Condition> conditions;
  bool has_bound = true;
  long double bound_value = 0;
  std::map<std::string, long double> extras;  // intermediate quantities such as M or theta terms
  std::optional<long double> measured;
  std::optional<long double> ratio;
};

namespace detail {

inline long double need(const BoundInputs& in, const std::string& key, const std::string& bound) {
  auto it = in.find(key);
  if (it == in.end()) fail(ErrorCode::MissingInput, "bound '" + bound + "' needs input '" + key + "'");
  return it->second;
}

inline bool is_integral(long double v) { return v >= 1 && v < 1.8e19L && std::floor(v) == v; }

// Fills p (largest prime), q_prime (core), K = log q / log q', tau_q (divisor count),
// omega_q and p_min from q when q is an integer and these are absent.
inline BoundInputs derive_inputs(BoundInputs in) {
  auto fill_from = [&](const std::string& key, const std::string& prefix) {
    auto it = in.find(key);
    if (it == in.end() || !is_integral(it->second)) return;
    FactoredModulus fm = factor(static_cast<u64>(it->second));
    if (fm.factors.empty()) return;
    in.emplace(prefix + "p", static_cast<long double>(fm.largest_prime));
    in.emplace(prefix + "p_min", static_cast<long double>(fm.factors.begin()->first));
    in.emplace(prefix + "q_prime", static_cast<long double>(fm.core));
    in.emplace(prefix + "omega", static_cast<long double>(fm.omega));
    in.emplace(prefix + "tau", static_cast<long double>(fm.tau));
    in.emplace(prefix + "squarefree", fm.squarefree() ? 1.0L : 0.0L);
  };
  fill_from("q", "");
  fill_from("q_r", "q_r_");
  fill_from("q1", "q1_");
  if (in.count("q") && in.count("q_prime") && !in.count("K")) {
    long double lq = std::log(in["q"]), lqp = std::log(in["q_prime"]);
    if (lqp > 0) in["K"] = lq / lqp;
  }
  return in;
}

struct Builder {
  BoundReport& r;
  void cond(const std::string& label, long double lhs, long double rhs, bool strict = true) {
    bool ok = strict ? lhs < rhs : lhs <= rhs;
    r.conditions.push_back({label, std::isfinite(lhs) && std::isfinite(rhs), ok, lhs, rhs});
  }
  void undefined(const std::string& label) { r.conditions.push_back({label, false, false, 0, 0}); }
};

// log log x, or nullopt when x <= e.
inline std::optional<long double> loglog(long double x) {
  if (!(x > std::exp(1.0L))) return std::nullopt;
  return std::log(std::log(x));
}

}  // namespace detail

inline BoundReport eval_bound(BoundName name, const BoundInputs& raw, const BoundParams& prm = {}) {
  require(prm.c > 0 && prm.C > 0, ErrorCode::InvalidArgument, "constants c and C must be positive");
  BoundReport r;
  r.name = to_string(name);
  r.params = prm;
  r.inputs = detail::derive_inputs(raw);
  const BoundInputs& in = r.inputs;
  const std::string& id = r.name;
  auto get = [&](const std::string& k) { return detail::need(in, k, id); };
  auto opt = [&](const std::string& k) -> std::optional<long double> {
    auto it = in.find(k);
    if (it == in.end()) return std::nullopt;
    return it->second;
  };
  detail::Builder b{r};
  const long double c = prm.c, C = prm.C;
  using std::exp;
  using std::log;
  using std::pow;
  using std::sqrt;
  auto ll = [&](long double x, const std::string& what) {
    auto v = detail::loglog(x);
    if (!v) fail(ErrorCode::UndefinedLogLog, "log log " + what + " is undefined for " + what + " <= e");
    return *v;
  };

  switch (name) {
    case BoundName::ShortSumCore: {
      const long double q = get("q"), N = get("N"), p = get("p"), qp = get("q_prime"), K = get("K");
      b.cond("N < q", N, q);
      b.cond("p^C < N", C * log(p), log(N));
      auto l2 = detail::loglog(qp);
      if (l2) {
        long double rhs = pow(log(q), 0.9L) + C * log(2 * K) * log(qp) / *l2;
        b.cond("(log q)^(9/10) + C log(2K) log q'/log log q' < log N", rhs, log(N));
      } else {
        b.undefined("(log q)^(9/10) + C log(2K) log q'/log log q' < log N");
      }
      auto l1 = detail::loglog(q);
      if (l1)
        b.cond("C (log p + log q/log log q) < log N", C * (log(p) + log(q) / *l1), log(N));
      else
        b.undefined("C (log p + log q/log log q) < log N");
      r.bound_value = N * exp(-sqrt(log(N)));
      break;
    }
    case BoundName::PolyaVinogradov: {
      const long double q = get("q"), p = get("p"), qp = get("q_prime"), K = get("K");
      long double M = pow(log(q), 0.9L) + log(2 * K) * log(qp) / ll(qp, "q'") + log(p);
      r.extras["M"] = M;
      r.bound_value = C * sqrt(q) * sqrt(log(q)) * sqrt(M);
      break;
    }
    case BoundName::ZeroFreeRegion: {
      const long double q = get("q"), p = get("p"), qp = get("q_prime"), K = get("K");
      const long double T = opt("T").value_or(prm.T);
      long double t1 = 1 / log(p);
      long double t2 = ll(qp, "q'") / (log(qp) * log(2 * K));
      long double t3 = 1 / pow(log(q * T), 0.9L);
      r.extras["term_p"] = t1;
      r.extras["term_core"] = t2;
      r.extras["term_qT"] = t3;
      r.bound_value = c * std::min({t1, t2, t3});
      break;
    }
    case BoundName::ZeroFreeRegionRefined: {
      const long double q = get("q"), p = get("p"), qp = get("q_prime"), K = get("K");
      const long double T = opt("T").value_or(prm.T);
      long double t1 = 1 / log(p);
      long double t2 = ll(q, "q") / (log(qp) * log(2 * K));
      long double t3 = 1 / pow(log(q * T), 1 - prm.c_prime);
      r.extras["term_p"] = t1;
      r.extras["term_core"] = t2;
      r.extras["term_qT"] = t3;
      r.bound_value = c * std::min({t1, t2, t3});
      break;
    }
    case BoundName::ZeroFreeRegionIwaniec: {
      const long double q = get("q"), qp = get("q_prime");
      const long double T = opt("T").value_or(prm.T);
      long double qT = q * T;
      long double t1 = c / (pow(log(qT), 2.0L / 3) * pow(ll(qT, "qT"), 1.0L / 3));
      long double t2 = 1 / log(qp);
      r.extras["term_qT"] = t1;
      r.extras["term_core"] = t2;
      r.bound_value = std::min(t1, t2);
      break;
    }
    case BoundName::MixedSumPrime:
    case BoundName::MixedSumSquarefree: {
      const long double q = get("q"), N = get("N"), d = get("d");
      long double kappa = log(N) / log(q) - 0.25L;
      r.extras["kappa"] = kappa;
      b.cond("q^(1/4) < |I|", 0.25L * log(q), log(N));
      b.cond("1 <= d", 1, d, false);
      r.bound_value = N * exp(-c * kappa * kappa / (d * d) * log(q));
      if (name == BoundName::MixedSumSquarefree) {
        const long double tq = get("tau");
        if (auto sf = opt("squarefree")) b.cond("q squarefree", 0, *sf);
        r.bound_value *= exp(4 * log(d) / (d * d) * log(tq));
      }
      break;
    }
    case BoundName::PostnikovMixed: {
      const long double q0 = get("q0"), m = get("m"), q1 = get("q1"), N = get("N");
      const long double tq1 = opt("q1_tau").value_or(opt("tau_q1").value_or(0));
      if (tq1 <= 0) fail(ErrorCode::MissingInput, "bound '" + id + "' needs input 'q1' as an integer or 'tau_q1'");
      long double kappa = log(N / q0) / log(q1) - 0.25L;
      r.extras["kappa"] = kappa;
      b.cond("q0 q1^(1/4) < |I|", log(q0) + 0.25L * log(q1), log(N));
      r.bound_value = N * exp(-c * kappa * kappa / (m * m) * log(q1)) * exp(c * log(m) / (m * m) * log(tq1));
      break;
    }
    case BoundName::GrahamRingrose: {
      const long double q = get("q"), N = get("N"), qr = get("q_r"), r_ = get("r");
      const long double pmin = opt("q_r_p_min") ? *opt("q_r_p_min") : get("p_min_qr");
      b.cond("sqrt(log q) < min p | q_r", sqrt(log(q)), pmin);
      if (auto mq = opt("max_qi")) b.cond("max q_i < N^(1/3)", 3 * log(*mq), log(N));
      b.cond("r < c log log q", r_, c * ll(q, "q"));
      r.bound_value = N * exp(-sqrt(log(qr)));
      break;
    }
    case BoundName::AdmissibleCompleteSum: {
      const long double qbar = get("q_bar"), qr = get("q_r"), d = get("d");
      const long double tau = prm.tau ? *prm.tau : 10 / ll(qr, "q_r");
      r.extras["tau"] = tau;
      b.cond("log d < 1/tau", log(d), 1 / tau);
      r.bound_value = pow(qbar, 0.7L) * pow(qr, 0.3L * tau);
      break;
    }
    case BoundName::GrahamRingroseMixed: {
      const long double N = get("N"), qr = get("q_r"), d = get("d");
      b.cond("d < (log q_r)^(1/16) / 10", d, pow(log(qr), 1.0L / 16) / 10);
      r.bound_value = C * N * exp(-sqrt(log(qr)) / (200 * d * d));
      break;
    }
    case BoundName::GrahamRingrosePostnikov: {
      const long double N = get("N"), qr = get("q_r"), m = get("m");
      b.cond("m < (log q_r)^(1/16) / 20", m, pow(log(qr), 1.0L / 16) / 20);
      r.bound_value = C * N * exp(-sqrt(log(qr)) / (800 * m * m));
      break;
    }
    case BoundName::IteratedSquarefree: {
      const long double q = get("q"), N = get("N"), qr = get("q_r"), r_ = get("r"), pm = get("prod_m");
      const long double pmin = opt("q_r_p_min") ? *opt("q_r_p_min") : get("p_min_qr");
      b.cond("prod m_i < (log q_r)^(1/75)", pm, pow(log(qr), 1.0L / 75));
      b.cond("sqrt(log q) < min p | q_r", sqrt(log(q)), pmin);
      if (auto mq = opt("max_qi")) b.cond("max q_i^2 < N", 2 * log(*mq), log(N));
      b.cond("N < q", N, q);
      b.cond("r < 10^-3 log log q_r", r_, 1e-3L * ll(qr, "q_r"));
      r.bound_value = N * exp(-pow(log(qr), 0.8L));
      break;
    }
    case BoundName::ShortSumGeneral: {
      const long double q = get("q"), N = get("N"), p = get("p"), qp = get("q_prime");
      b.cond("N < q", N, q);
      b.cond("max p^1000 < N", 1000 * log(p), log(N));
      const long double lq = log(q), lN = log(N), lqp = log(qp);
      {
        auto l1 = detail::loglog(q);
        if (l1 && lqp > 0) {
          long double rhs = pow(lq, 1 - c) + C * log(2 * lq / lqp) * lqp / *l1;
          b.cond("log form: (log q)^(1-c) + C log(2 log q/log q') log q'/log log q < log N", rhs, lN);
        } else {
          b.undefined("log form: (log q)^(1-c) + C log(2 log q/log q') log q'/log log q < log N");
        }
      }
      {
        auto l3 = detail::loglog(N);
        long double base = 3 * lq / (lqp + lN);
        long double expo = 10 * (lN + lqp) / lN;
        if (l3 && base > 0)
          b.cond("power form: (3 log q/log(q'N))^(10 log(Nq')/log N) < (log N)^c", expo * log(base), c * *l3);
        else
          b.undefined("power form: (3 log q/log(q'N))^(10 log(Nq')/log N) < (log N)^c");
      }
      if (opt("squarefree").value_or(0) == 1 || q == qp) {
        auto l1 = detail::loglog(q);
        if (l1)
          b.cond("squarefree form: log q/log log q < c log N", lq / *l1, c * lN);
        else
          b.undefined("squarefree form: log q/log log q < c log N");
      }
      r.bound_value = N * exp(-sqrt(lN));
      break;
    }
    case BoundName::IwaniecKowalskiRange: {
      const long double q = get("q"), N = get("N");
      long double rr = log(q) / log(N);
      r.extras["r"] = rr;
      if (auto qp = opt("q_prime")) b.cond("q'^100 < N", 100 * log(*qp), log(N));
      long double l = ll(rr, "r");
      r.bound_value = exp(rr * l * log(C)) * pow(N, 1 - c / (rr * rr * log(rr)));
      break;
    }
    case BoundName::VinogradovLemma: {
      const long double k = get("k"), P = get("P");
      b.cond("2 <= k", 2, k, false);
      if (auto bb = opt("b")) {
        b.cond("2 < P", 2, P);
        b.cond("P <= b", P, *bb, false);
        b.cond("b <= P^(k-1)", log(*bb), (k - 1) * log(P), false);
      }
      if (!(k > 1)) fail(ErrorCode::InvalidArgument, "k must exceed 1");
      r.bound_value = exp(k * pow(log(k), 2) * log(C)) * pow(P, 1 - c / (k * k * log(k)));
      break;
    }
    case BoundName::VinogradovPostnikov: {
      const long double N = get("N"), m = get("m"), q0 = get("q0");
      if (!(m > 1)) fail(ErrorCode::InvalidArgument, "m must exceed 1");
      r.bound_value = N * exp(m * pow(log(m), 2) * log(C)) * pow(q0, -c / (m * m * log(m)));
      break;
    }
    case BoundName::ClaimExponentProduct: {
      const long double pm = get("prod_m"), q0 = get("q0");
      b.cond("prod m_i < (log q0)^(1/75)", pm, pow(log(q0), 1.0L / 75));
      r.has_bound = false;
      break;
    }
    case BoundName::ClaimBlockCount: {
      const long double r_ = get("r"), q0 = get("q0");
      b.cond("r < 10^-3 log log q0", r_, 1e-3L * ll(q0, "q0"));
      r.has_bound = false;
      break;
    }
    case BoundName::CompositeDegree: {
      const long double d = get("d"), qr = get("q_r");
      b.cond("d < (log q_r)^(1/8)", d, pow(log(qr), 0.125L));
      r.has_bound = false;
      break;
    }
    case BoundName::Weil: {
      const long double q = get("q"), d = get("d");
      const long double q1 = opt("q1").value_or(q);
      const long double w = opt("q1_omega").value_or(opt("omega").value_or(1));
      if (auto sf = opt("squarefree")) b.cond("q squarefree", 0, *sf);
      b.cond("q1 | q", std::fmod(q, q1), 0.5L);
      r.bound_value = pow(d, w) * q / sqrt(q1);
      break;
    }
  }
  if (r.has_bound && !(r.bound_value >= 0)) r.bound_value = 0;
  return r;
}

inline std::vector<Condition> check_conditions(BoundName name, const BoundInputs& in, const BoundParams& prm = {}) {
  return eval_bound(name, in, prm).conditions;
}

// Joint product/block-count check on a split; m_i runs over the block exponents.
inline std::vector<Condition> split_conditions(const ModulusSplit& s, const BoundParams& prm = {}) {
  long double pm = 1;
  for (int m : s.exponents) pm *= m;
  BoundInputs in{{"prod_m", pm}, {"q0", static_cast<long double>(s.q0)}, {"r", static_cast<long double>(s.r)}};
  std::vector<Condition> out;
  for (BoundName n : {BoundName::ClaimExponentProduct, BoundName::ClaimBlockCount}) {
    try {
      auto cs = check_conditions(n, in, prm);
      out.insert(out.end(), cs.begin(), cs.end());
    } catch (const Error& e) {
      out.push_back({to_string(n) + ": " + e.what(), false, false, 0, 0});
    }
  }
  return out;
}

// Records measured / bound without asserting anything.
inline BoundReport compare(BoundReport report, const SumResult& measured) {
  report.measured = measured.magnitude;
  if (report.has_bound && report.bound_value > 0) report.ratio = measured.magnitude / report.bound_value;
  return report;
}

inline BoundReport compare(BoundReport report, long double measured) {
  report.measured = measured;
  if (report.has_bound && report.bound_value > 0) report.ratio = measured / report.bound_value;
  return report;
}

struct PvScanRow {
  u64 q = 0;
  std::string character;
  long double max_partial = 0;
  u64 argmax = 1;
  long double classical = 0;        // sqrt(q) ln q
  long double classical_ratio = 0;
  std::optional<long double> bound;  // polya-vinogradov evaluator, when defined
  std::optional<long double> bound_ratio;
};

struct PvScanReport {
  u64 qmin = 3;
  u64 qmax = 0;
  u64 characters = 0;
  u64 violations = 0;  // max partial sum above sqrt(q) ln q
  long double max_classical_ratio = 0;
  long double max_bound_ratio = 0;
  std::vector<PvScanRow> rows;
};

// Primitive quadratic characters for qmin <= q <= qmax against sqrt(q) ln q and the
// polya-vinogradov evaluator (ratios recorded, not asserted).
inline PvScanReport pv_scan(u64 qmax, u64 qmin = 3, const BoundParams& prm = {}) {
  PvScanReport rep;
  rep.qmin = std::max<u64>(qmin, 3);
  rep.qmax = qmax;
  auto chunks = parallel_chunks<std::vector<PvScanRow>>(rep.qmin, qmax + 1, 64, [&](u64 lo, u64 hi) {
    std::vector<PvScanRow> rows;
    for (u64 q = lo; q < hi; ++q) {
      std::optional<long double> bound;
      for (auto& chi : real_characters(q)) {
        if (chi.principal() || !chi.primitive()) continue;
        if (!bound) {
          try {
            bound = eval_bound(BoundName::PolyaVinogradov, {{"q", static_cast<long double>(q)}}, prm).bound_value;
          } catch (const Error&) {
            bound = -1;
          }
        }
        PartialSumMax pm = polya_vinogradov_max(chi);
        PvScanRow row;
        row.q = q;
        row.character = chi.token();
        row.max_partial = pm.max_partial;
        row.argmax = pm.argmax;
        row.classical = std::sqrt(static_cast<long double>(q)) * std::log(static_cast<long double>(q));
        row.classical_ratio = row.max_partial / row.classical;
        if (*bound > 0) {
          row.bound = *bound;
          row.bound_ratio = row.max_partial / *bound;
        }
        rows.push_back(std::move(row));
      }
    }
    return rows;
  });
  for (auto& c : chunks)
    for (auto& row : c) {
      ++rep.characters;
      if (row.max_partial > row.classical) ++rep.violations;
      rep.max_classical_ratio = std::max(rep.max_classical_ratio, row.classical_ratio);
      if (row.bound_ratio) rep.max_bound_ratio = std::max(rep.max_bound_ratio, *row.bound_ratio);
      rep.rows.push_back(std::move(row));
    }
  return rep;
}

}  // namespace charsum
