#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "report_json.hpp"

using namespace charsum;
using report::Json;
using report::to_json;

namespace {

template <class T>
std::vector<T> parse_list(const std::string& text, const std::string& flag) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream is(item);
    T v{};
    if (!(is >> v) || !(is >> std::ws).eof()) throw CLI::ValidationError(flag, "cannot parse '" + item + "' in '" + text + "'");
    out.push_back(v);
  }
  if (out.empty()) throw CLI::ValidationError(flag, "empty list");
  return out;
}

void emit(const Json& doc, const std::string& format) {
  if (format == "csv")
    std::cout << report::to_csv(doc);
  else
    std::cout << doc.dump(2) << "\n";
}

int error_out(const std::string& code, const std::string& message, int status) {
  Json e{{"error", {{"code", code}, {"message", message}}}};
  std::cerr << e.dump() << "\n";
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dirichlet character sums, reductions and bound evaluators"};
  app.require_subcommand(1);
  app.fallthrough();

  unsigned threads = 0;
  std::uint64_t seed = 0;
  std::string cache_dir;
  std::string format = "json";
  app.add_option("--threads", threads, "Worker cap for parallel scans (0 = available parallelism)");
  app.add_option("--seed", seed, "Seed for randomized inputs");
  app.add_option("--cache-dir", cache_dir, "Discrete-log table cache (overrides CHARSUM_CACHE)");
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}));

  std::function<Json()> run;

  // Shared option values; each subcommand reads the ones it declares.
  std::string chi_tok, f_text, poly_text, idx_text, sigma_text, blocks_text, m_text, name, kind = "pairs", kase = "a";
  i64 start = 1;
  u64 len = 0, q0 = 0, q = 0, N = 0, M = 0, qbar = 0, qr = 0, shift = 1, modulus = 0, pmax = 0, pmin = 2, qmax = 0, qmin = 3,
      zero_mod = 0, range = 0, random_n = 0, max_work = 50000000ULL;
  int m = 0, jmax = -1, k = 1, degmax = 0, exponent_class = 0;
  long double t = 0, thr = 0, tau = 0, measured = 0;
  bool full = false, rows = false;
  std::vector<std::string> inputs;
  BoundParams prm;

  auto need_chi = [&](CLI::App* s) { s->add_option("--chi", chi_tok, "Character token, e.g. q=15;idx=1,2")->required(); };

  {
    auto* s = app.add_subcommand("char-sum", "Interval character sum");
    need_chi(s);
    s->add_option("--start", start);
    s->add_option("--len", len)->required();
    s->callback([&] { run = [&] { return Json{{"character", chi_tok}, {"start", start}, {"len", len}, {"sum", to_json(interval_char_sum(parse_character(chi_tok), start, len))}}; }; });
  }
  {
    auto* s = app.add_subcommand("complete-sum", "Complete sum of chi(f(x)) over a full period");
    need_chi(s);
    auto* fo = s->add_option("--f", f_text, "Factored rational function, e.g. (x-1)(x-2)^-1");
    auto* po = s->add_option("--poly", poly_text, "Integer polynomial coefficients, constant term first");
    fo->excludes(po);
    s->callback([&, fo, po] {
      if (!*fo && !*po) throw CLI::RequiredError("--f or --poly");
      run = [&, fo] {
        auto chi = parse_character(chi_tok);
        SumResult r = *fo ? complete_twisted_sum(chi, parse_rational(f_text)) : complete_twisted_sum(chi, parse_list<i64>(poly_text, "--poly"));
        return Json{{"character", chi_tok}, {"f", *fo ? f_text : poly_text}, {"sum", to_json(r)}};
      };
    });
  }
  {
    auto* s = app.add_subcommand("mixed-sum", "Sum of chi(x) e(P(x)) over an interval");
    need_chi(s);
    s->add_option("--poly", poly_text, "Real coefficients of P, constant term first")->required();
    s->add_option("--start", start);
    s->add_option("--len", len)->required();
    s->callback([&] {
      run = [&] {
        RealPolynomial P{parse_list<long double>(poly_text, "--poly")};
        return Json{{"character", chi_tok}, {"poly", poly_text}, {"start", start}, {"len", len}, {"sum", to_json(mixed_sum(parse_character(chi_tok), P, start, len))}};
      };
    });
  }
  {
    auto* s = app.add_subcommand("twisted-sum", "Sum of chi(n) n^{it} over an interval");
    need_chi(s);
    s->add_option("--t", t)->required();
    s->add_option("--start", start);
    s->add_option("--len", len)->required();
    s->callback([&] {
      run = [&] {
        return Json{{"character", chi_tok}, {"t", report::num(t)}, {"start", start}, {"len", len}, {"sum", to_json(twisted_t_sum(parse_character(chi_tok), t, start, len))}};
      };
    });
  }
  {
    auto* s = app.add_subcommand("postnikov-verify", "Build and exhaustively verify the Postnikov lift");
    s->add_option("--q0", q0)->required();
    s->add_option("--m", m)->required();
    s->add_option("--idx", idx_text, "Component indices of the character mod q0^m")->required();
    s->callback([&] {
      run = [&] {
        u64 qq = 1;
        for (int i = 0; i < m; ++i) qq *= q0;
        auto chi = build_character(qq, parse_list<u64>(idx_text, "--idx"));
        return to_json(build_postnikov(chi, q0));
      };
    });
  }
  {
    auto* s = app.add_subcommand("qj", "Expansion coefficients Q_j of a rational function");
    s->add_option("--f", f_text)->required();
    s->add_option("--m", m)->required();
    s->add_option("--jmax", jmax, "Highest j (default m - 1)");
    s->add_option("--zero-mod", zero_mod, "Count zeros of each Q_j modulo this squarefree number");
    s->add_option("--range", range, "Count over [1, range] (a multiple of --zero-mod)");
    s->callback([&] {
      run = [&] {
        FactoredRational f = parse_rational(f_text);
        QjFamily fam = qj_coefficients(f, m, jmax);
        Json terms = Json::array();
        for (auto& term : fam.terms) {
          Json jt = to_json(term);
          if (zero_mod) jt["zeros"] = to_json(qj_zero_count(term, f.degree(), zero_mod, range ? std::optional<u64>(range) : std::nullopt));
          terms.push_back(jt);
        }
        return Json{{"f", f.to_string()}, {"m", fam.m}, {"m_prime", fam.m_prime}, {"terms", terms}};
      };
    });
  }
  {
    auto* s = app.add_subcommand("admissible", "Admissibility of (f, q_bar)");
    s->add_option("--f", f_text)->required();
    s->add_option("--qbar", qbar)->required();
    s->add_option("--qr", qr)->required();
    auto* to = s->add_option("--tau", tau, "Default 10 / log log q_r");
    s->callback([&, to] {
      run = [&, to] {
        return Json{{"f", f_text}, {"report", to_json(admissible(parse_rational(f_text), qbar, qr, *to ? std::optional<long double>(tau) : std::nullopt))}};
      };
    });
  }
  {
    auto* s = app.add_subcommand("count-bad", "Brute-force bad pair and bad tuple counts");
    s->add_option("--kind", kind)->check(CLI::IsMember({"pairs", "tuples"}));
    s->add_option("--qr", qr, "Squarefree q_r (pairs)");
    s->add_option("--M", M)->required();
    s->add_option("--thr", thr, "Only divisors Q > thr count (pairs)");
    auto* fo = s->add_option("--f", f_text, "General mode: the rational function f_s");
    s->add_option("--shift", shift, "General mode: shift q_s");
    s->add_option("--qbar", qbar, "General mode: q_bar (default q_r)");
    s->add_option("--modulus", modulus, "Tuple modulus");
    s->add_option("--k", k);
    s->add_option("--case", kase)->check(CLI::IsMember({"a", "a'", "b", "c"}));
    s->callback([&, fo] {
      if (kind == "pairs" && !qr) throw CLI::RequiredError("--qr");
      if (kind == "tuples" && !modulus) throw CLI::RequiredError("--modulus");
      run = [&, fo] {
        if (kind == "tuples") return to_json(count_bad_tuples(modulus, M, k, parse_tuple_case(kase)));
        if (*fo) return to_json(count_bad_pairs_general(parse_rational(f_text), shift, qbar ? qbar : qr, M, thr));
        return to_json(count_bad_pairs_first_step(qr, M, thr));
      };
    });
  }
  {
    auto* s = app.add_subcommand("fact61", "Selector (S, S1) for a fixed-point-free map");
    auto* so = s->add_option("--sigma", sigma_text, "sigma(1),...,sigma(2k)");
    auto* ro = s->add_option("--random", random_n, "Draw a random fixed-point-free map on {1..n} from --seed");
    so->excludes(ro);
    s->callback([&, so] {
      if (!*so && !random_n) throw CLI::RequiredError("--sigma or --random");
      run = [&, so] {
        std::vector<int> sigma;
        if (*so) {
          sigma = parse_list<int>(sigma_text, "--sigma");
        } else {
          std::mt19937_64 rng(seed);
          const int n = static_cast<int>(random_n);
          std::uniform_int_distribution<int> pick(1, std::max(1, n - 1));
          for (int i = 1; i <= n; ++i) {
            int v = pick(rng);
            sigma.push_back(v >= i ? v + 1 : v);
          }
        }
        auto sel = select_for_map(sigma);
        return Json{{"sigma", sigma}, {"S", sel.S}, {"S1", sel.S1}};
      };
    });
  }
  {
    auto* s = app.add_subcommand("factorize", "Split q into blocks and q_r for an interval length N");
    s->add_option("--q", q)->required();
    s->add_option("--N", N)->required();
    s->add_option("--kappa", prm.kappa);
    s->add_option("--class", exponent_class, "Force the exponent m of q_r = q0^m");
    s->callback([&] {
      run = [&] {
        ClaimOptions opt;
        opt.kappa = prm.kappa;
        if (exponent_class > 0) opt.exponent_class = exponent_class;
        ModulusSplit sp = factorize_claim(q, N, opt);
        Json j = to_json(sp);
        j["claim_conditions"] = to_json(split_conditions(sp, prm));
        return j;
      };
    });
  }
  {
    auto* s = app.add_subcommand("reduce", "Run the shift-and-Cauchy-Schwarz reduction");
    need_chi(s);
    s->add_option("--N", N)->required();
    auto* bo = s->add_option("--blocks", blocks_text, "Manual split: block moduli Q_1,...,Q_r-1");
    auto* qo = s->add_option("--qr", qr, "Manual split: q_r");
    bo->needs(qo);
    qo->needs(bo);
    s->add_option("--M", m_text, "Per-level M values");
    auto* to = s->add_option("--tau", tau);
    s->add_option("--max-work", max_work);
    s->add_option("--kappa", prm.kappa);
    s->callback([&, bo, to] {
      run = [&, bo, to] {
        auto chi = parse_character(chi_tok);
        ModulusSplit sp;
        if (*bo) {
          sp = make_split(chi.q(), parse_list<u64>(blocks_text, "--blocks"), qr, N);
        } else {
          ClaimOptions opt;
          opt.kappa = prm.kappa;
          sp = factorize_claim(chi.modulus, N, opt);
        }
        ReductionOptions ro;
        if (*to) ro.tau = tau;
        ro.max_work = max_work;
        std::vector<u64> sched;
        if (!m_text.empty()) sched = parse_list<u64>(m_text, "--M");
        return to_json(run_reduction(chi, sp, N, sched, ro));
      };
    });
  }
  {
    auto* s = app.add_subcommand("bound", "Evaluate a named bound and its hypotheses");
    auto* no = s->add_option("--name", name);
    auto* lo = s->add_flag("--list", "List bound names");
    s->add_option("--in", inputs, "Input key=value (repeatable)");
    s->add_option("--c", prm.c);
    s->add_option("--C", prm.C);
    s->add_option("--kappa", prm.kappa);
    s->add_option("--T", prm.T);
    s->add_option("--c-prime", prm.c_prime);
    auto* to = s->add_option("--tau", tau);
    auto* mo = s->add_option("--measured", measured, "Measured magnitude to compare against");
    s->callback([&, no, lo, to, mo] {
      if (!*no && !*lo) throw CLI::RequiredError("--name");
      run = [&, lo, to, mo] {
        if (*lo) {
          Json a = Json::array();
          for (auto& e : bound_names()) a.push_back({{"name", e.id}, {"has_bound", e.has_bound}});
          return Json{{"rows", a}};
        }
        BoundInputs in;
        for (auto& kv : inputs) {
          auto eq = kv.find('=');
          if (eq == std::string::npos) throw CLI::ValidationError("--in", "expected key=value, got '" + kv + "'");
          in[kv.substr(0, eq)] = parse_list<long double>(kv.substr(eq + 1), "--in").at(0);
        }
        if (*to) prm.tau = tau;
        BoundReport r = eval_bound(parse_bound_name(name), in, prm);
        if (*mo) r = compare(r, measured);
        return to_json(r);
      };
    });
  }
  {
    auto* s = app.add_subcommand("pv-scan", "Max partial sums of primitive quadratic characters");
    s->add_option("--qmax", qmax)->required();
    s->add_option("--qmin", qmin);
    s->add_option("--c", prm.c);
    s->add_option("--C", prm.C);
    s->add_flag("--rows", rows, "Include one row per character");
    s->callback([&] {
      run = [&] {
        PvScanReport rep = pv_scan(qmax, qmin, prm);
        Json j{{"qmin", rep.qmin},
               {"qmax", rep.qmax},
               {"characters", rep.characters},
               {"violations", rep.violations},
               {"max_classical_ratio", report::num(rep.max_classical_ratio)},
               {"max_bound_ratio", report::num(rep.max_bound_ratio)}};
        if (rows) {
          Json a = Json::array();
          for (auto& r : rep.rows) a.push_back(to_json(r));
          j["rows"] = a;
        }
        return j;
      };
    });
  }
  {
    auto* s = app.add_subcommand("weil-scan", "Exhaustive |sum chi(f(x))| <= d sqrt(p) scan");
    s->add_option("--pmax", pmax)->required();
    s->add_option("--degmax", degmax)->required();
    s->add_option("--pmin", pmin);
    s->add_flag("--full", full, "Evaluate every monic polynomial instead of orbit representatives");
    s->callback([&] { run = [&] { return to_json(weil_scan(pmax, degmax, full, pmin)); }; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return error_out("UsageError", e.what(), 2);
  }

  set_thread_limit(threads);
  if (!cache_dir.empty()) set_cache_dir(cache_dir);
  try {
    emit(run(), format);
  } catch (const CLI::ParseError& e) {
    return error_out("UsageError", e.what(), 2);
  } catch (const Error& e) {
    return error_out(std::string(e.code_name()), e.what(), 1);
  } catch (const std::exception& e) {
    return error_out("InternalError", e.what(), 1);
  }
  return 0;
}
