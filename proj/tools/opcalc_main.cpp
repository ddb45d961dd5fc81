// opcalc: batch front-end for the operator calculus engine.
//
// Commands:
//   apply        g(A)x or psi(A)x for a catalog symbol; writes result.csv
//   verify       named verification suites; writes report.md + report.csv
//   subordinate  e^{t psi(A)}x via matrix and subordination-measure routes
//   catalog      list registered symbols
//
// Exit codes: 0 success / all assertions pass; 1 input error; 2 divergent or
// non-convergent integral; 3 oracle unavailable under --require-oracle;
// 4 verification failures.

#include "opcalc/opcalc.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace opcalc;

namespace {

struct RunConfig {
  std::string operator_path;
  std::string vector_path;
  std::string symbol_spec;
  std::string calculus = "auto";  // auto | hp | bp
  std::string route = "auto";     // auto | direct | subordination | both
  std::string suites;
  std::string out_dir = ".";
  std::string config_path;
  std::uint64_t seed = 1;
  double rel_tol = -1.0;  // <0: keep engine default
  std::optional<double> alpha, beta, t;
  bool require_oracle = false;
};

// Config-file keys mirror the long flags; explicit flags win.
void merge_config(RunConfig& rc, const CLI::App& cmd) {
  if (rc.config_path.empty()) return;
  auto kv = parse_config(rc.config_path);
  auto absent = [&](const std::string& flag) {
    const CLI::Option* o = cmd.get_option_no_throw("--" + flag);
    return o == nullptr || o->count() == 0;
  };
  auto take = [&](const char* key, const char* flag, auto setter) {
    auto it = kv.find(key);
    if (it != kv.end() && absent(flag)) setter(it->second);
  };
  take("operator", "operator", [&](const std::string& v) { rc.operator_path = v; });
  take("vector", "vector", [&](const std::string& v) { rc.vector_path = v; });
  take("symbol", "symbol", [&](const std::string& v) { rc.symbol_spec = v; });
  take("calculus", "calculus", [&](const std::string& v) { rc.calculus = v; });
  take("route", "route", [&](const std::string& v) { rc.route = v; });
  take("suites", "suites", [&](const std::string& v) { rc.suites = v; });
  take("out", "out", [&](const std::string& v) { rc.out_dir = v; });
  take("seed", "seed", [&](const std::string& v) { rc.seed = std::stoull(v); });
  take("alpha", "alpha", [&](const std::string& v) { rc.alpha = std::stod(v); });
  take("beta", "beta", [&](const std::string& v) { rc.beta = std::stod(v); });
  take("t", "t", [&](const std::string& v) { rc.t = std::stod(v); });
  take("rel-tol", "rel-tol", [&](const std::string& v) { rc.rel_tol = std::stod(v); });
  take("require-oracle", "require-oracle",
       [&](const std::string& v) { rc.require_oracle = (v == "1" || v == "true" || v == "yes"); });
  for (const auto& [k, v] : kv) {
    (void)v;
    static const char* known[] = {"operator", "vector",  "symbol", "calculus",
                                  "route",    "suites",  "out",    "seed",
                                  "alpha",    "beta",    "t",      "rel-tol",
                                  "require-oracle",      "quad.rel_tol",
                                  "quad.abs_tol",        "quad.max_panels",
                                  "quad.panel_order"};
    bool ok = false;
    for (const char* k2 : known) ok |= (k == k2);
    if (!ok) throw std::invalid_argument("unknown config key: " + k);
  }
}

QuadratureSpec quad_from(const RunConfig& rc, const std::map<std::string, std::string>& quad_kv) {
  QuadratureSpec q;
  if (auto it = quad_kv.find("quad.abs_tol"); it != quad_kv.end())
    q.abs_tol = std::stod(it->second);
  if (auto it = quad_kv.find("quad.max_panels"); it != quad_kv.end())
    q.max_panels = std::stoi(it->second);
  if (auto it = quad_kv.find("quad.panel_order"); it != quad_kv.end())
    q.panel_order = std::stoi(it->second);
  if (auto it = quad_kv.find("quad.rel_tol"); it != quad_kv.end())
    q.rel_tol = std::stod(it->second);
  if (rc.rel_tol > 0) q.rel_tol = rc.rel_tol;
  q.validate();
  return q;
}

// Fill an unparameterized symbol name from the dedicated flags.
std::string resolve_symbol_spec(const RunConfig& rc) {
  std::string s = rc.symbol_spec;
  if (s.find(':') != std::string::npos) return s;
  if (s == "frac_power" && rc.alpha) return s + ":" + format_real(*rc.alpha);
  if (s == "neg_frac_power_bernstein" && rc.beta) return s + ":" + format_real(*rc.beta);
  if (s == "exp_tpsi" && rc.t)
    return s + ":" + format_real(*rc.t) + ":neg_frac_power_bernstein:" +
           format_real(rc.beta.value_or(0.5));
  return s;
}

std::vector<Vec> load_vectors(const RunConfig& rc, int dim) {
  std::vector<Vec> xs;
  if (!rc.vector_path.empty()) {
    Vec x = read_vector_csv(rc.vector_path);
    if (x.size() != dim)
      throw std::invalid_argument("vector dimension " + std::to_string(x.size()) +
                                  " does not match operator dimension " + std::to_string(dim));
    xs.push_back(std::move(x));
  } else {
    for (int j = 0; j < dim; ++j) {
      Vec e = Vec::Zero(dim);
      e(j) = 1.0;
      xs.push_back(std::move(e));
    }
  }
  return xs;
}

// result.csv rows carry the applied-vector index first so the all-basis-vector
// default stays in one file.
void write_results(const std::string& path, const std::vector<ApplyResult>& rs) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  out << "vector,index,value,error_estimate,T_star,panels,domain_verdict\n";
  for (std::size_t k = 0; k < rs.size(); ++k) {
    const ApplyResult& r = rs[k];
    for (int i = 0; i < r.value.size(); ++i)
      out << k << "," << i << "," << format_scalar(r.value(i)) << ","
          << format_real(r.error_estimate) << "," << format_real(r.T_star) << ","
          << r.panels_used << "," << verdict_name(r.domain_verdict) << "\n";
  }
}

void write_oracle_deltas(const std::string& path, const std::vector<ApplyResult>& rs,
                         const std::vector<Vec>& refs) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  out << "vector,index,engine_value,oracle_value,abs_error,rel_error\n";
  for (std::size_t k = 0; k < rs.size(); ++k) {
    double denom = std::max(refs[k].norm(), 1e-290);
    for (int i = 0; i < rs[k].value.size(); ++i) {
      double d = std::abs(rs[k].value(i) - refs[k](i));
      out << k << "," << i << "," << format_scalar(rs[k].value(i)) << ","
          << format_scalar(refs[k](i)) << "," << format_real(d) << "," << format_real(d / denom)
          << "\n";
    }
  }
}

int finish_apply_outputs(const RunConfig& rc, const Generator& G,
                         const std::function<Complex(Complex)>& eval,
                         const std::vector<Vec>& xs, const std::vector<ApplyResult>& results) {
  fs::create_directories(rc.out_dir);
  write_results((fs::path(rc.out_dir) / "result.csv").string(), results);

  bool oracle_ok = false;
  std::vector<Vec> refs;
  try {
    SpectralData sd = spectral_decompose(G);
    for (const auto& x : xs) refs.push_back(oracle_apply(G, sd, eval, x));
    oracle_ok = true;
  } catch (const OracleUnavailable& e) {
    if (rc.require_oracle) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 3;
    }
  } catch (const std::domain_error& e) {  // symbol undefined at an eigenvalue
    if (rc.require_oracle) {
      std::fprintf(stderr, "error: oracle unavailable: %s\n", e.what());
      return 3;
    }
  }
  if (oracle_ok)
    write_oracle_deltas((fs::path(rc.out_dir) / "oracle_delta.csv").string(), results, refs);

  for (std::size_t k = 0; k < results.size(); ++k)
    if (results[k].domain_verdict == Verdict::non_convergent) {
      std::fprintf(stderr, "divergence: vector %zu: %s\n", k,
                   results[k].note ? results[k].note->c_str() : "integral did not converge");
      return 2;
    }
  std::printf("wrote %s\n", (fs::path(rc.out_dir) / "result.csv").string().c_str());
  if (oracle_ok)
    std::printf("wrote %s\n", (fs::path(rc.out_dir) / "oracle_delta.csv").string().c_str());
  return 0;
}

int cmd_apply(RunConfig rc) {
  std::map<std::string, std::string> quad_kv;
  if (!rc.config_path.empty()) quad_kv = parse_config(rc.config_path);
  QuadratureSpec quad = quad_from(rc, quad_kv);

  Generator G = make_generator_from(read_matrix_csv(rc.operator_path));
  SymbolVariant sym = catalog_build_spec(resolve_symbol_spec(rc));

  bool is_bernstein = std::holds_alternative<BernsteinSymbol>(sym);
  if (rc.calculus == "hp" && is_bernstein)
    throw std::invalid_argument("--calculus hp requested for a bernstein symbol");
  if (rc.calculus == "bp" && !is_bernstein)
    throw std::invalid_argument("--calculus bp requested for a non-bernstein symbol");

  std::vector<Vec> xs = load_vectors(rc, G.dim);
  std::vector<ApplyResult> results;
  std::function<Complex(Complex)> eval;
  if (is_bernstein) {
    const BernsteinSymbol& psi = std::get<BernsteinSymbol>(sym);
    eval = psi.eval;
    for (const auto& x : xs) results.push_back(bp_apply(G, psi, x, {quad}));
  } else {
    const LaplaceSymbol& g = std::get<LaplaceSymbol>(sym);
    eval = g.eval;
    for (const auto& x : xs) results.push_back(hp_apply(G, g, x, {quad}));
  }
  return finish_apply_outputs(rc, G, eval, xs, results);
}

int cmd_verify(RunConfig rc) {
  std::map<std::string, std::string> quad_kv;
  if (!rc.config_path.empty()) quad_kv = parse_config(rc.config_path);

  SuiteContext ctx;
  ctx.quad = quad_from(rc, quad_kv);
  ctx.seed = rc.seed;
  ctx.require_oracle = rc.require_oracle;
  if (!rc.operator_path.empty()) ctx.op = make_generator_from(read_matrix_csv(rc.operator_path));
  if (!rc.vector_path.empty()) ctx.vec = read_vector_csv(rc.vector_path);
  if (ctx.vec && !ctx.op) throw std::invalid_argument("--vector requires --operator");
  if (ctx.op && ctx.vec && ctx.vec->size() != ctx.op->dim)
    throw std::invalid_argument("vector dimension does not match operator dimension");

  std::vector<std::string> wanted;
  if (rc.suites.empty()) {
    wanted = suite_names();
  } else {
    std::size_t pos = 0;
    while (pos <= rc.suites.size()) {
      std::size_t next = rc.suites.find(',', pos);
      if (next == std::string::npos) next = rc.suites.size();
      std::string s = rc.suites.substr(pos, next - pos);
      if (!s.empty()) wanted.push_back(s);
      pos = next + 1;
    }
    for (const auto& s : wanted) {
      bool known = false;
      for (const auto& n : suite_names()) known |= (n == s);
      if (!known) throw std::invalid_argument("unknown suite: " + s);
    }
  }

  std::vector<AssertionRow> rows;
  for (const auto& s : wanted) {
    auto r = run_suite(s, ctx);
    rows.insert(rows.end(), r.begin(), r.end());
  }

  fs::create_directories(rc.out_dir);
  write_report_csv((fs::path(rc.out_dir) / "report.csv").string(), rows);
  write_report_md((fs::path(rc.out_dir) / "report.md").string(), rows);

  int failed = 0;
  for (const auto& r : rows) failed += !r.pass;
  for (const auto& r : rows)
    if (!r.pass)
      std::printf("FAIL  %s: %s  deviation=%s tolerance=%s\n", r.suite.c_str(), r.name.c_str(),
                  format_real(r.deviation).c_str(), format_real(r.tolerance).c_str());
  std::printf("%zu assertions, %d failed\n", rows.size(), failed);
  return failed == 0 ? 0 : 4;
}

int cmd_subordinate(RunConfig rc) {
  std::map<std::string, std::string> quad_kv;
  if (!rc.config_path.empty()) quad_kv = parse_config(rc.config_path);
  QuadratureSpec quad = quad_from(rc, quad_kv);

  if (!rc.t) throw std::invalid_argument("subordinate requires --t");
  Generator G = make_generator_from(read_matrix_csv(rc.operator_path));
  SymbolVariant sym = catalog_build_spec(resolve_symbol_spec(rc));
  if (!std::holds_alternative<BernsteinSymbol>(sym))
    throw std::invalid_argument("subordinate requires a bernstein symbol");
  const BernsteinSymbol& psi = std::get<BernsteinSymbol>(sym);
  std::vector<Vec> xs = load_vectors(rc, G.dim);

  bool want_direct = rc.route == "auto" || rc.route == "both" || rc.route == "direct";
  bool want_sub = rc.route == "both" || rc.route == "subordination";
  if (rc.route == "auto") {
    try {
      laplace_exp_tpsi(*rc.t, psi);
      want_sub = true;
    } catch (const std::invalid_argument&) {
      want_sub = false;  // no registered measure; direct route only
    }
  } else if (!(want_direct || want_sub)) {
    throw std::invalid_argument("unknown route: " + rc.route);
  }

  std::vector<ApplyResult> direct, sub;
  for (const auto& x : xs) {
    if (want_direct)
      direct.push_back(subordinated_apply(G, psi, *rc.t, x, SubordinationRoute::direct, {quad}));
    if (want_sub)
      sub.push_back(
          subordinated_apply(G, psi, *rc.t, x, SubordinationRoute::subordination, {quad}));
  }

  const std::vector<ApplyResult>& primary = want_direct ? direct : sub;
  auto eval = [&psi, t = *rc.t](Complex s) { return std::exp(t * psi.eval(s)); };
  int rcode = finish_apply_outputs(rc, G, eval, xs, primary);
  if (rcode != 0) return rcode;

  if (want_direct && want_sub) {
    write_results((fs::path(rc.out_dir) / "subordination.csv").string(), sub);
    double worst = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k)
      worst = std::max(worst, (direct[k].value - sub[k].value).norm());
    std::printf("wrote %s\n", (fs::path(rc.out_dir) / "subordination.csv").string().c_str());
    std::printf("route deviation %s\n", format_real(worst).c_str());
    for (const auto& r : sub)
      if (r.domain_verdict == Verdict::non_convergent) {
        std::fprintf(stderr, "divergence: subordination route did not converge\n");
        return 2;
      }
  }
  return 0;
}

int cmd_catalog() {
  std::printf("%-32s %-10s %-32s %s\n", "symbol", "kind", "parameters", "realizes");
  for (const auto& e : catalog_entries())
    std::printf("%-32s %-10s %-32s %s\n", e.name.c_str(), e.kind.c_str(),
                e.params_doc.empty() ? "-" : e.params_doc.c_str(), e.annotation.c_str());
  return 0;
}

void add_common(CLI::App* cmd, RunConfig& rc) {
  cmd->add_option("--config", rc.config_path, "key=value config file; flags win");
  cmd->add_option("--out", rc.out_dir, "output directory (default .)");
  cmd->add_option("--rel-tol", rc.rel_tol, "quadrature relative tolerance");
  cmd->add_flag("--require-oracle", rc.require_oracle,
                "fail (exit 3) when the spectral oracle is unavailable");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"opcalc: Hille-Phillips / Bochner-Phillips operator calculus engine"};
  app.require_subcommand(1);
  RunConfig rc;

  CLI::App* ap = app.add_subcommand("apply", "apply a catalog symbol to an operator");
  ap->add_option("--operator", rc.operator_path, "operator CSV path");
  ap->add_option("--vector", rc.vector_path, "vector CSV path (default: all basis vectors)");
  ap->add_option("--symbol", rc.symbol_spec, "catalog symbol spec, e.g. frac_power:0.5");
  ap->add_option("--alpha", rc.alpha, "alpha parameter (frac_power)");
  ap->add_option("--beta", rc.beta, "beta parameter (neg_frac_power_bernstein)");
  ap->add_option("--t", rc.t, "time parameter (exp_tpsi)");
  ap->add_option("--calculus", rc.calculus, "auto | hp | bp")
      ->check(CLI::IsMember({"auto", "hp", "bp"}));
  add_common(ap, rc);

  CLI::App* vf = app.add_subcommand("verify", "run verification suites");
  vf->add_option("--suites", rc.suites, "comma-separated suite names (default: all)");
  vf->add_option("--operator", rc.operator_path, "operator CSV path (default: random draws)");
  vf->add_option("--vector", rc.vector_path, "vector CSV path (with --operator)");
  vf->add_option("--seed", rc.seed, "seed for randomized suites");
  add_common(vf, rc);

  CLI::App* sb = app.add_subcommand("subordinate", "subordinated semigroup e^{t psi(A)} x");
  sb->add_option("--operator", rc.operator_path, "operator CSV path");
  sb->add_option("--vector", rc.vector_path, "vector CSV path (default: all basis vectors)");
  sb->add_option("--symbol", rc.symbol_spec, "bernstein symbol spec");
  sb->add_option("--t", rc.t, "subordination time (required)");
  sb->add_option("--beta", rc.beta, "beta parameter shortcut");
  sb->add_option("--route", rc.route, "auto | direct | subordination | both")
      ->check(CLI::IsMember({"auto", "direct", "subordination", "both"}));
  add_common(sb, rc);

  CLI::App* ct = app.add_subcommand("catalog", "list registered symbols");
  (void)ct;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (ap->parsed()) {
      merge_config(rc, *ap);
      if (rc.operator_path.empty()) throw std::invalid_argument("apply requires --operator");
      if (rc.symbol_spec.empty()) throw std::invalid_argument("apply requires --symbol");
      return cmd_apply(std::move(rc));
    }
    if (vf->parsed()) {
      merge_config(rc, *vf);
      return cmd_verify(std::move(rc));
    }
    if (sb->parsed()) {
      merge_config(rc, *sb);
      if (rc.operator_path.empty()) throw std::invalid_argument("subordinate requires --operator");
      if (rc.symbol_spec.empty()) throw std::invalid_argument("subordinate requires --symbol");
      if (!rc.t) throw std::invalid_argument("subordinate requires --t");
      return cmd_subordinate(std::move(rc));
    }
    return cmd_catalog();
  } catch (const OracleUnavailable& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const DivergentIntegral& e) {
    std::fprintf(stderr, "divergence: %s\n", e.what());
    return 2;
  } catch (const NonConvergentIntegral& e) {
    std::fprintf(stderr, "divergence: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
