#pragma once

#include <json.hpp>

#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "charsum/charsum.hpp"

namespace charsum::report {

using Json = nlohmann::ordered_json;

inline std::string str(const ExactRational& r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

inline std::string str(const BigInt& v) { return v.str(); }

// Integers that fit in 64 bits are written as JSON numbers, larger ones as decimal strings.
inline Json big(const BigInt& v) {
  if (v >= 0 && v <= BigInt(std::numeric_limits<u64>::max())) return Json(static_cast<u64>(v));
  if (v < 0 && v >= BigInt(std::numeric_limits<i64>::min())) return Json(static_cast<i64>(v));
  return Json(v.str());
}

inline double num(long double v) { return static_cast<double>(v); }

template <class T>
Json opt(const std::optional<T>& v) {
  return v ? Json(num(*v)) : Json(nullptr);
}

inline Json to_json(const FactoredModulus& fm) {
  Json factors = Json::array();
  for (auto& [p, e] : fm.factors) factors.push_back({{"p", p}, {"e", e}});
  return {{"value", fm.value}, {"factors", factors}, {"core", fm.core}, {"omega", fm.omega}, {"tau", fm.tau},
          {"largest_prime", fm.largest_prime}};
}

inline Json to_json(const SumResult& s) {
  Json j{{"re", s.value.real()},
         {"im", s.value.imag()},
         {"magnitude", num(s.magnitude)},
         {"trivial_bound", num(s.trivial_bound)},
         {"ratio", num(s.ratio)}};
  if (s.counts) j["exact_zero"] = s.counts->is_exact_zero();
  return j;
}

inline Json to_json(const Condition& c) {
  return {{"label", c.label}, {"defined", c.defined}, {"satisfied", c.satisfied}, {"lhs", num(c.lhs)}, {"rhs", num(c.rhs)}};
}

inline Json to_json(const std::vector<Condition>& cs) {
  Json a = Json::array();
  for (auto& c : cs) a.push_back(to_json(c));
  return a;
}

inline Json to_json(const PostnikovData& d) {
  Json F = Json::array();
  for (auto& c : d.F_coeffs) F.push_back(str(c));
  return {{"q0", d.q0},
          {"m", d.m},
          {"q", d.q},
          {"m_prime", d.m_prime},
          {"B", d.B_class()},
          {"B_solutions", d.B_solutions},
          {"D", big(d.D)},
          {"a", d.a},
          {"F_coeffs", F},
          {"u_coeffs", d.u_coeffs},
          {"checked", d.checked},
          {"failures", d.failures}};
}

inline Json to_json(const QjTerm& t) {
  Json prim = Json::array();
  for (auto& c : t.primitive) prim.push_back(str(c));
  return {{"j", t.j},
          {"numerator", t.numerator.to_string()},
          {"denominator", t.denominator_string()},
          {"content", str(t.content)},
          {"primitive", prim}};
}

inline Json to_json(const QjZeroCount& z) {
  return {{"modulus", z.modulus}, {"j", z.j},         {"degree", z.degree},
          {"count", z.count},     {"bound", num(z.bound)}, {"within_bound", z.within_bound}};
}

inline Json to_json(const AdmissibilityReport& a) {
  return {{"q_bar", a.q_bar},
          {"q_r", a.q_r},
          {"tau", num(a.tau)},
          {"tau_defaulted", a.tau_defaulted},
          {"good_primes", a.good_primes},
          {"good_product", a.good_product},
          {"threshold", num(a.threshold)},
          {"admissible", a.admissible}};
}

inline Json to_json(const ExpansionReport& e) {
  Json j{{"q1", e.q1},
         {"m", e.m},
         {"q_prime", e.q_prime},
         {"mode", e.mode == Truncation::Literal ? "literal" : "complete"},
         {"js", e.js},
         {"B", e.B},
         {"D", big(e.D)},
         {"x_checked", e.x_checked},
         {"points_checked", e.points_checked},
         {"holds", e.holds}};
  j["counterexample"] = e.counterexample ? Json{{"x", e.counterexample->first}, {"t", e.counterexample->second}} : Json(nullptr);
  return j;
}

inline Json to_json(const ExpSumResult& e) {
  return {{"sum", to_json(e.sum)}, {"k", e.k}, {"b", e.b}, {"window_ok", e.window_ok}};
}

inline Json to_json(const BadPairReport& r) {
  return {{"mode", r.mode == BadPairMode::FirstStep ? "first-step" : "general"},
          {"q_bar", r.q_bar},
          {"M", r.M},
          {"threshold", num(r.threshold)},
          {"degree", r.degree},
          {"qualifying", r.qualifying},
          {"count", r.count},
          {"per_divisor_total", r.per_divisor_total},
          {"bound", str(r.bound)},
          {"bound_value", static_cast<double>(r.bound)},
          {"within_bound", r.within_bound},
          {"m_exceeds_divisors", r.m_exceeds_divisors}};
}

inline Json to_json(const BadTupleReport& r) {
  return {{"case", to_string(r.kase)},
          {"modulus", r.modulus},
          {"primes", r.primes},
          {"M", r.M},
          {"k", r.k},
          {"total", r.total},
          {"count", r.count},
          {"bound", num(r.bound)},
          {"bound_closed", num(r.bound_closed)},
          {"within_bound", r.within_bound},
          {"preconditions", to_json(r.preconditions)},
          {"preconditions_hold", r.preconditions_hold}};
}

inline Json to_json(const ModulusSplit& s) {
  return {{"q", s.q},
          {"N", s.N},
          {"blocks", s.blocks},
          {"bases", s.bases},
          {"exponents", s.exponents},
          {"exponents_literal", s.exponents_literal},
          {"q0", s.q0},
          {"m", s.m},
          {"q_r", s.q_r},
          {"r", s.r},
          {"r_literal", s.r_literal},
          {"kappa", num(s.kappa)},
          {"divides", s.divides},
          {"coprime", s.coprime},
          {"bases_below_sqrt_n", s.bases_below_sqrt_n},
          {"flags", to_json(s.flags)}};
}

inline Json to_json(const LevelRecord& L) {
  Json j{{"level", L.level},
         {"shift", L.shift},
         {"M", L.M},
         {"char_modulus", L.char_modulus},
         {"f_in", L.f_in},
         {"degree_in", L.degree_in},
         {"measured", num(L.measured)},
         {"averaged", num(L.averaged)},
         {"slack", num(L.slack)},
         {"averaging_holds", L.averaging_holds},
         {"cs_rhs", num(L.cs_rhs)},
         {"cauchy_schwarz_holds", L.cauchy_schwarz_holds},
         {"q_bar_in", L.q_bar_in},
         {"admissible_pairs", L.admissible_pairs},
         {"bad_pairs", L.bad_pairs},
         {"bad_bound", str(L.bad_bound)},
         {"bad_within_bound", L.bad_within_bound}};
  j["chosen"] = L.chosen ? Json::array({L.chosen->first, L.chosen->second}) : Json(nullptr);
  j["chosen_inner"] = num(L.chosen_inner);
  j["f_out"] = L.f_out;
  j["degree_out"] = L.degree_out;
  j["q_bar_out"] = L.q_bar_out;
  return j;
}

inline Json to_json(const FinalRecord& F) {
  Json j{{"reached", F.reached}, {"m", F.m}, {"q_r", F.q_r}, {"f", F.f}, {"degree", F.degree}, {"measured", num(F.measured)}};
  if (F.m == 1) {
    j["q_bar"] = F.q_bar;
    j["complete_sum"] = opt(F.complete_sum);
    j["admissible_bound"] = num(F.admissible_bound);
    j["weil_bound"] = num(F.weil_bound);
    j["good_product"] = F.good_product;
    j["log_degree_condition"] = F.log_degree_condition;
    j["admissible_bound_holds"] = F.admissible_bound_holds;
    j["weil_holds"] = F.weil_holds;
  } else {
    j["expansion"] = F.expansion ? to_json(*F.expansion) : Json(nullptr);
    j["vinogradov"] = F.vinogradov ? to_json(*F.vinogradov) : Json(nullptr);
  }
  j["note"] = F.note;
  return j;
}

inline Json to_json(const ReductionTrace& t) {
  Json levels = Json::array();
  for (auto& L : t.levels) levels.push_back(to_json(L));
  return {{"character", t.character},
          {"split", to_json(t.split)},
          {"N", t.N},
          {"tau", num(t.tau)},
          {"threshold", num(t.threshold)},
          {"levels", levels},
          {"final", to_json(t.final_level)},
          {"truncated", t.truncated},
          {"truncation_reason", t.truncation_reason}};
}

inline Json to_json(const BoundParams& p) {
  return {{"c", num(p.c)}, {"C", num(p.C)}, {"kappa", num(p.kappa)}, {"T", num(p.T)}, {"c_prime", num(p.c_prime)},
          {"tau", opt(p.tau)}};
}

inline Json to_json(const BoundReport& r) {
  Json in = Json::object();
  for (auto& [k, v] : r.inputs) in[k] = num(v);
  Json ex = Json::object();
  for (auto& [k, v] : r.extras) ex[k] = num(v);
  return {{"name", r.name},
          {"inputs", in},
          {"params", to_json(r.params)},
          {"conditions", to_json(r.conditions)},
          {"has_bound", r.has_bound},
          {"bound", r.has_bound ? Json(num(r.bound_value)) : Json(nullptr)},
          {"extras", ex},
          {"measured", opt(r.measured)},
          {"ratio", opt(r.ratio)}};
}

inline Json to_json(const PvScanRow& r) {
  return {{"q", r.q},
          {"character", r.character},
          {"max_partial", num(r.max_partial)},
          {"argmax", r.argmax},
          {"classical", num(r.classical)},
          {"classical_ratio", num(r.classical_ratio)},
          {"bound", opt(r.bound)},
          {"bound_ratio", opt(r.bound_ratio)}};
}

inline Json to_json(const WeilScanReport& r) {
  return {{"pmax", r.pmax},
          {"degmax", r.degmax},
          {"full", r.full},
          {"primes", r.primes},
          {"polynomials_checked", r.polynomials_checked},
          {"monic_covered", r.monic_covered},
          {"instances", r.character_instances},
          {"skipped_rth_powers", r.skipped_rth_powers},
          {"violations", r.violations},
          {"max_ratio", num(r.max_ratio)},
          {"worst",
           {{"p", r.worst.p},
            {"degree", r.worst.degree},
            {"coeffs", r.worst.coeffs},
            {"char_index", r.worst.char_index},
            {"ratio", num(r.worst.ratio)}}}};
}

// CSV: a top-level "rows" array becomes one line per row, anything else a single line.
// Nested objects flatten to dotted column names; arrays are written as JSON text.
inline void flatten(const Json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    return;
  }
  if (j.is_string()) {
    out.emplace_back(prefix, j.get<std::string>());
  } else if (j.is_null()) {
    out.emplace_back(prefix, "");
  } else {
    out.emplace_back(prefix, j.dump());
  }
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

inline std::string to_csv(const Json& doc) {
  std::vector<Json> rows;
  if (doc.is_object() && doc.contains("rows") && doc["rows"].is_array() && !doc["rows"].empty())
    for (auto& r : doc["rows"]) rows.push_back(r);
  else
    rows.push_back(doc);
  std::vector<std::string> header;
  std::vector<std::vector<std::pair<std::string, std::string>>> flat;
  for (auto& r : rows) {
    flat.emplace_back();
    flatten(r, "", flat.back());
    for (auto& [k, v] : flat.back())
      if (std::find(header.begin(), header.end(), k) == header.end()) header.push_back(k);
  }
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << csv_field(header[i]);
  os << "\r\n";
  for (auto& f : flat) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      std::string v;
      for (auto& [k, val] : f)
        if (k == header[i]) v = val;
      os << (i ? "," : "") << csv_field(v);
    }
    os << "\r\n";
  }
  return os.str();
}

}  // namespace charsum::report
