#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <pqlap/atlas.hpp>
#include <pqlap/curves.hpp>
#include <pqlap/discrete.hpp>
#include <pqlap/flow.hpp>
#include <pqlap/nehari.hpp>
#include <pqlap/spectral1d.hpp>

namespace pqlap::cli {

namespace fs = std::filesystem;

enum Exit { kOk = 0, kSolverFailure = 1, kUsage = 2 };

struct RunConfig {
  double p = 3.0;
  double q = 2.0;
  double T = 1.0;
  int n = 400;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  std::map<std::string, double> tolerances{{"residual", 1e-6}, {"nehari", 1e-8}, {"flow", 1e-9}, {"cross_check", 1e-3}};
  std::vector<double> p_grid;  // verify: explicit grids, otherwise the default triangle
  std::vector<double> q_grid;

  void validate() const {
    require(q > 1.0 && p > q, ErrorCode::USAGE, "config: exponents must satisfy 1 < q < p");
    require(T > 0.0, ErrorCode::USAGE, "config: T must be > 0");
    require(n >= 3, ErrorCode::USAGE, "config: n must be >= 3");
    for (const auto& [k, v] : tolerances) require(v > 0.0, ErrorCode::USAGE, "config: tolerance '" + k + "' must be > 0");
  }
  double tol(const std::string& name) const { return tolerances.at(name); }
  FunctionalContext context(double alpha = 0.0, double beta = 0.0) const { return {p, q, alpha, beta}; }
};

inline RunConfig load_config(const std::string& path) {
  RunConfig c;
  if (path.empty()) return c;
  std::ifstream f(path);
  require(static_cast<bool>(f), ErrorCode::USAGE, "cannot read config " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::USAGE, std::string("config is not valid JSON: ") + e.what());
  }
  try {
    if (j.contains("p")) c.p = j.at("p").get<double>();
    if (j.contains("q")) c.q = j.at("q").get<double>();
    if (j.contains("T")) c.T = j.at("T").get<double>();
    if (j.contains("n")) c.n = j.at("n").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("tolerances"))
      for (auto& [k, v] : j.at("tolerances").items()) c.tolerances[k] = v.get<double>();
    if (j.contains("p_grid")) c.p_grid = j.at("p_grid").get<std::vector<double>>();
    if (j.contains("q_grid")) c.q_grid = j.at("q_grid").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::USAGE, std::string("config field has the wrong type: ") + e.what());
  }
  c.validate();
  return c;
}

// "12.5", or "<factor>*lambda<k>(p|q)", e.g. "1.3*lambda2(p)".
inline double parse_parameter(const std::string& text, const RunConfig& c) {
  static const std::regex spectral(R"(^\s*(?:([-+0-9.eE]+)\s*\*\s*)?lambda([0-9]+)\((p|q)\)\s*$)");
  std::smatch m;
  if (std::regex_match(text, m, spectral)) {
    double factor = m[1].matched ? std::stod(m[1].str()) : 1.0;
    int k = std::stoi(m[2].str());
    require(k >= 1, ErrorCode::USAGE, "eigenvalue index must be >= 1");
    return factor * eigenvalue(k, m[3].str() == "p" ? c.p : c.q, c.T);
  }
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::USAGE, "cannot read parameter '" + text + "'");
}

// Flat JSON with every number printed to 17 significant digits.
class JsonOut {
 public:
  JsonOut& num(const std::string& k, double v) {
    fields_.emplace_back(k, number(v));
    return *this;
  }
  JsonOut& integer(const std::string& k, long long v) {
    fields_.emplace_back(k, std::to_string(v));
    return *this;
  }
  JsonOut& str(const std::string& k, const std::string& v) {
    fields_.emplace_back(k, nlohmann::json(v).dump());
    return *this;
  }
  JsonOut& boolean(const std::string& k, bool v) {
    fields_.emplace_back(k, v ? "true" : "false");
    return *this;
  }
  JsonOut& raw(const std::string& k, const std::string& v) {
    fields_.emplace_back(k, v);
    return *this;
  }
  std::string dump() const {
    std::ostringstream o;
    o << "{\n";
    for (std::size_t i = 0; i < fields_.size(); ++i)
      o << "  " << nlohmann::json(fields_[i].first).dump() << ": " << fields_[i].second << (i + 1 < fields_.size() ? ",\n" : "\n");
    o << "}";
    return o.str();
  }
  static std::string number(double v) {
    if (!std::isfinite(v)) return nlohmann::json(format_value(v)).dump();
    return format_value(v);
  }

 private:
  std::vector<std::pair<std::string, std::string>> fields_;
};

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  require(static_cast<bool>(f), ErrorCode::IO_ERROR, "cannot open " + path.string());
  f << text << '\n';
}

inline fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  require(!ec, ErrorCode::IO_ERROR, "cannot create " + dir + ": " + ec.message());
  return p;
}

inline JsonOut report_json(const FunctionalReport& rep) {
  JsonOut j;
  j.num("H", rep.H).num("G", rep.G).num("E", rep.E).num("residual", rep.residual).integer("nodal_domains", rep.nodal_domains);
  return j;
}

// random sign-changing seeds: sums of a few sine modes with random amplitudes
inline std::vector<DiscreteFunction> random_seeds(const Mesh& mesh, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> amp(0.0, 1.0);
  std::vector<DiscreteFunction> out;
  while (static_cast<int>(out.size()) < count) {
    DiscreteFunction u(mesh);
    for (int k = 1; k <= 6; ++k) {
      double a = amp(rng) / k;
      for (int i = 0; i < mesh.n; ++i) u.values[i] += a * std::sin(k * M_PI * mesh.x(i) / mesh.T);
    }
    if (count_nodal(u) >= 2) out.push_back(u);
  }
  return out;
}

// ---- subcommands ----

struct EigArgs {
  double r = 0.0, T = 1.0;
  int k = 1, samples = 0;
  std::string samples_out;
};

inline int cmd_eig(const EigArgs& a, std::ostream& out) {
  require_exponent(a.r);
  require(a.T > 0.0, ErrorCode::USAGE, "T must be > 0");
  require(a.k >= 1, ErrorCode::USAGE, "k must be >= 1");
  out << format_value(eigenvalue(a.k, a.r, a.T)) << '\n';
  if (a.samples > 0) {
    require(a.samples >= 2, ErrorCode::USAGE, "--samples needs at least 2 points");
    EigenPair e = eigenfunction(a.k, a.r, a.T);
    std::ostringstream csv;
    csv << "t,phi\n";
    for (int i = 0; i < a.samples; ++i) {
      double t = a.T * i / (a.samples - 1);
      csv << format_value(t) << ',' << format_value(e(t)) << '\n';
    }
    if (a.samples_out.empty()) {
      out << csv.str();
    } else {
      std::ofstream f(a.samples_out);
      require(static_cast<bool>(f), ErrorCode::IO_ERROR, "cannot open " + a.samples_out);
      f << csv.str();
    }
  }
  return kOk;
}

inline int cmd_verify(const RunConfig& c, std::ostream& out) {
  std::vector<RatioBoundsRow> rows = (c.p_grid.empty() || c.q_grid.empty())
                                         ? verify_ratio_bounds(exponent_triangle(20, 10.0), c.T)
                                         : verify_ratio_bounds(c.p_grid, c.q_grid, c.T);
  fs::path dir = prepare_dir(c.output_dir);
  std::ofstream f(dir / "margins.csv");
  require(static_cast<bool>(f), ErrorCode::IO_ERROR, "cannot write margins.csv");
  f << "p,q,ratio,lambda1_q,lambda2_q,lower_margin,upper_margin,sufficient_margin,cross_check,ok\n";
  int bad = 0;
  double min_lower = INFINITY, min_upper = INFINITY, max_cross = 0.0;
  for (const auto& r : rows) {
    f << format_value(r.p) << ',' << format_value(r.q) << ',' << format_value(r.ratio) << ',' << format_value(r.lambda1_q) << ','
      << format_value(r.lambda2_q) << ',' << format_value(r.lower_margin) << ',' << format_value(r.upper_margin) << ','
      << format_value(r.sufficient_margin) << ',' << format_value(r.cross_check) << ',' << (r.ok ? 1 : 0) << '\n';
    if (!r.ok) ++bad;
    min_lower = std::min(min_lower, r.lower_margin);
    min_upper = std::min(min_upper, r.upper_margin);
    max_cross = std::max(max_cross, r.cross_check);
  }
  JsonOut j;
  j.integer("pairs", static_cast<long long>(rows.size()))
      .integer("violations", bad)
      .num("min_lower_margin", min_lower)
      .num("min_upper_margin", min_upper)
      .num("max_cross_check", max_cross);
  write_text(dir / "verify_summary.json", j.dump());
  out << j.dump() << '\n';
  return bad == 0 ? kOk : kSolverFailure;
}

inline int cmd_ratio(const RunConfig& c, std::ostream& out) {
  RayleighRatio R = rayleigh_ratio(c.p, c.q, c.T);
  std::ostringstream bu;
  bu << '[';
  for (int k = 1; k <= 4; ++k) bu << (k > 1 ? ", " : "") << JsonOut::number(beta_upper_star(eigenvalue(k, c.p, c.T), c.p, c.q, c.T));
  bu << ']';
  JsonOut j;
  j.num("p", c.p)
      .num("q", c.q)
      .num("T", c.T)
      .num("ratio", R.value)
      .num("ratio_quadrature", R.quadrature)
      .num("lambda1_q", eigenvalue(1, c.q, c.T))
      .num("lambda2_q", eigenvalue(2, c.q, c.T))
      .num("beta_L_star", beta_L_star(c.p, c.q, c.T))
      .raw("beta_upper_star_at_lambda_k_p", bu.str());
  fs::path dir = prepare_dir(c.output_dir);
  write_text(dir / "ratio.json", j.dump());
  out << j.dump() << '\n';
  return kOk;
}

struct SolveArgs {
  std::string mode = "nehari";
  std::string alpha, beta;
  int random_starts = 0;
};

inline int cmd_solve(const RunConfig& c, const SolveArgs& a, std::ostream& out, std::ostream& err) {
  require(a.mode == "nehari" || a.mode == "flow", ErrorCode::USAGE, "--mode must be nehari or flow");
  require(!a.alpha.empty() && !a.beta.empty(), ErrorCode::USAGE, "--alpha and --beta are required");
  FunctionalContext ctx = c.context(parse_parameter(a.alpha, c), parse_parameter(a.beta, c));
  Mesh mesh(c.T, c.n);
  fs::path dir = prepare_dir(c.output_dir);
  Status st;
  DiscreteFunction u;
  JsonOut j;
  j.str("mode", a.mode).num("p", c.p).num("q", c.q).num("T", c.T).integer("n", c.n).num("alpha", ctx.alpha).num("beta", ctx.beta);
  if (a.mode == "nehari") {
    std::vector<DiscreteFunction> seeds = default_M1_seeds(mesh, ctx);
    if (a.random_starts > 0) {
      auto extra = random_seeds(mesh, a.random_starts, c.seed);
      seeds.insert(seeds.end(), extra.begin(), extra.end());
    }
    M1Options mo;
    mo.tol_resid = c.tol("residual");
    mo.tol_N = c.tol("nehari");
    M1Result r = minimize_M1(ctx, seeds, mo);
    st = r.status;
    u = r.u;
    j.str("subset", subset_name(r.cls.subset)).integer("iterations", r.iterations).integer("feasible_seeds", r.feasible_seeds);
  } else {
    NegativeOptions no;
    no.tol_resid = c.tol("residual");
    no.flow_tol = c.tol("flow");
    if (a.random_starts > 0) no.extra_seeds = random_seeds(mesh, a.random_starts, c.seed);
    NegativeResult r = find_nodal_negative(ctx, mesh, no);
    st = r.status;
    u = r.u;
    j.str("route", r.route).boolean("sandwich_checked", r.sandwich_checked).num("sandwich_violation", r.sandwich_violation);
    j.num("lambda", r.lambda).integer("bisection_steps", r.bisection_steps);
    if (!r.log.empty()) write_trajectory_csv(r.log, (dir / "trajectory.csv").string());
    if (r.w1.mesh.n == mesh.n && r.w1.sup_norm() > 0.0) write_csv(r.w1, (dir / "w1.csv").string());
  }
  j.str("status", st.message());
  if (u.mesh.n == mesh.n) {
    FunctionalReport rep = evaluate(u, ctx);
    j.num("H", rep.H).num("G", rep.G).num("E", rep.E).num("residual", rep.residual).integer("nodal_domains", rep.nodal_domains);
    write_csv(u, (dir / "solution.csv").string());
  }
  write_text(dir / "report.json", j.dump());
  out << j.dump() << '\n';
  if (!st.ok) {
    err << "ERROR " << code_name(st.code) << ": " << st.detail << '\n';
    return kSolverFailure;
  }
  return kOk;
}

struct CurveArgs {
  std::string which = "beta_L";
  std::string alpha_min, alpha_max;
  int steps = 30;
};

inline int cmd_curve(const RunConfig& c, const CurveArgs& a, std::ostream& out) {
  require(a.steps >= 2, ErrorCode::USAGE, "--steps must be >= 2");
  require(!a.alpha_min.empty() && !a.alpha_max.empty(), ErrorCode::USAGE, "--alpha-min and --alpha-max are required");
  double lo = parse_parameter(a.alpha_min, c), hi = parse_parameter(a.alpha_max, c);
  require(hi >= lo, ErrorCode::USAGE, "--alpha-max must not be below --alpha-min");
  std::vector<double> grid = linspace(lo, hi, a.steps);
  FunctionalContext base = c.context();
  CurveOptions co;
  co.n = c.n;
  co.cross_tol = c.tol("cross_check");
  std::vector<CurveSample> s;
  if (a.which == "beta_L") {
    s = curve_beta_L(grid, base, c.T, co);
  } else if (a.which == "beta_1") {
    s = curve_beta_1(grid, base, c.T, co);
  } else if (a.which == "beta_2") {
    s = curve_beta_2(grid, base, c.T, co);
  } else if (a.which == "beta_U") {
    for (double al : grid) {
      CurveSample cs;
      cs.alpha = al;
      cs.value = beta_upper_star(al, c.p, c.q, c.T);
      cs.status = CurveStatus::OK;
      s.push_back(cs);
    }
  } else {
    throw Error(ErrorCode::USAGE, "--which must be one of beta_L, beta_1, beta_2, beta_U");
  }
  fs::path dir = prepare_dir(c.output_dir);
  write_curve_csv(s, (dir / ("curve_" + a.which + ".csv")).string());
  int failed = 0;
  for (const auto& x : s) failed += x.status == CurveStatus::FAILED;
  out << "wrote " << s.size() << " samples, " << failed << " failed\n";
  return failed == 0 ? kOk : kSolverFailure;
}

struct AtlasArgs {
  int resolution = 40;
  std::string alpha_max, beta_max;
  bool numerical_probe = false;
  int probe_count = 0;
  int solver_n = 119;
  int beta2_points = 8;
};

inline int env_threads() {
  const char* v = std::getenv("PQ_ATLAS_THREADS");
  if (!v || !*v) return 0;
  try {
    return std::max(0, std::stoi(v));
  } catch (const std::exception&) {
    throw Error(ErrorCode::USAGE, "PQ_ATLAS_THREADS must be a nonnegative integer");
  }
}

inline int cmd_atlas(const RunConfig& c, const AtlasArgs& a, std::ostream& out) {
  require(a.resolution >= 2, ErrorCode::USAGE, "--resolution must be >= 2");
  FunctionalContext base = c.context();
  double amax = a.alpha_max.empty() ? 2.0 * eigenvalue(3, c.p, c.T) : parse_parameter(a.alpha_max, c);
  double bmax = a.beta_max.empty() ? 2.0 * eigenvalue(3, c.q, c.T) : parse_parameter(a.beta_max, c);
  AtlasOptions o;
  o.n = a.solver_n;
  o.tol_resid = c.tol("residual");
  o.numerical_probe = a.numerical_probe;
  o.threads = env_threads();
  o.curve.cross_tol = c.tol("cross_check");
  AtlasResult res = sweep({0.0, amax}, {0.0, bmax}, a.resolution, base, c.T, o, a.beta2_points);

  fs::path dir = prepare_dir(c.output_dir);
  fs::path certs = dir / "certificates";
  fs::create_directories(certs);
  std::ofstream f(dir / "atlas.csv");
  require(static_cast<bool>(f), ErrorCode::IO_ERROR, "cannot write atlas.csv");
  f << "alpha,beta,verdict,rule,certificate_path,energy,residual,nodal_domains\n";
  for (std::size_t i = 0; i < res.alphas.size(); ++i)
    for (std::size_t j = 0; j < res.betas.size(); ++j) {
      const RegionVerdict& v = res.at(i, j);
      std::string cert;
      if (v.has_solution) {
        cert = "certificates/cell_" + std::to_string(i) + "_" + std::to_string(j) + ".csv";
        write_csv(v.solution, (dir / cert).string());
      }
      f << format_value(v.alpha) << ',' << format_value(v.beta) << ',' << verdict_name(v.verdict) << ',' << v.rule << ',' << cert << ','
        << format_value(v.energy) << ',' << format_value(v.residual) << ',' << v.nodal_domains << '\n';
    }
  write_curve_csv(res.overlay.beta_L, (dir / "overlay_beta_L.csv").string());
  write_curve_csv(res.overlay.beta_2, (dir / "overlay_beta_2.csv").string());
  {
    std::ofstream s(dir / "overlay_spectrum.csv");
    s << "kind,k,value,beta_upper_star\n";
    for (std::size_t k = 0; k < res.overlay.lambda_p.size(); ++k)
      s << "lambda_p," << k + 1 << ',' << format_value(res.overlay.lambda_p[k]) << ','
        << format_value(res.overlay.beta_upper_markers[k].second) << '\n';
    for (std::size_t k = 0; k < res.overlay.lambda_q.size(); ++k)
      s << "lambda_q," << k + 1 << ',' << format_value(res.overlay.lambda_q[k]) << ",\n";
  }
  int probe_hits = 0;
  if (a.probe_count > 0) {
    std::vector<ProbeOutcome> probes = probe_nonexistent(res, base, c.T, a.probe_count, c.seed, o);
    std::ofstream s(dir / "probes.csv");
    s << "alpha,beta,nehari_accepted,flow_accepted\n";
    for (const auto& p : probes) {
      s << format_value(p.alpha) << ',' << format_value(p.beta) << ',' << p.nehari_accepted << ',' << p.flow_accepted << '\n';
      probe_hits += p.nehari_accepted + p.flow_accepted;
    }
  }
  JsonOut j;
  j.num("p", c.p).num("q", c.q).num("T", c.T).integer("resolution", a.resolution).num("alpha_max", amax).num("beta_max", bmax);
  for (const char* k : {"NONEXISTENT", "EXISTS_POS_ENERGY", "EXISTS_NEG_ENERGY", "UNKNOWN"})
    j.integer(std::string("count_") + k, res.counts.count(k) ? res.counts.at(k) : 0);
  j.integer("invalid_certificates", res.invalid_certificates).integer("probe_acceptances", probe_hits);
  write_text(dir / "atlas_summary.json", j.dump());
  out << j.dump() << '\n';
  return res.invalid_certificates == 0 && probe_hits == 0 ? kOk : kSolverFailure;
}

// ---- entry point ----

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nodal solutions of the (p,q)-Laplace problem on an interval"};
  app.require_subcommand(1);
  std::string config;

  EigArgs eig;
  auto* s_eig = app.add_subcommand("eig", "eigenvalue and eigenfunction samples of the r-Laplacian");
  s_eig->add_option("--r", eig.r, "exponent")->required();
  s_eig->add_option("--T", eig.T, "interval length");
  s_eig->add_option("--k", eig.k, "index");
  s_eig->add_option("--samples", eig.samples, "number of eigenfunction samples on [0,T]");
  s_eig->add_option("--samples-out", eig.samples_out, "CSV path for the samples (default: stdout)");

  auto* s_verify = app.add_subcommand("verify", "bounds on the Rayleigh ratio over an exponent grid");
  s_verify->alias("verify-lemmas");
  s_verify->add_option("--config", config);

  auto* s_ratio = app.add_subcommand("ratio", "Rayleigh ratio and beta_U* values");
  s_ratio->add_option("--config", config);

  SolveArgs solve;
  auto* s_solve = app.add_subcommand("solve", "nodal solution by Nehari minimization or descending flow");
  s_solve->add_option("--config", config);
  s_solve->add_option("--mode", solve.mode)->check(CLI::IsMember({"nehari", "flow"}));
  s_solve->add_option("--alpha", solve.alpha)->required();
  s_solve->add_option("--beta", solve.beta)->required();
  s_solve->add_option("--random-starts", solve.random_starts, "extra random sign-changing seeds");

  CurveArgs curve;
  auto* s_curve = app.add_subcommand("curve", "critical curve samples");
  s_curve->add_option("--config", config);
  s_curve->add_option("--which", curve.which)->check(CLI::IsMember({"beta_L", "beta_1", "beta_2", "beta_U"}));
  s_curve->add_option("--alpha-min", curve.alpha_min)->required();
  s_curve->add_option("--alpha-max", curve.alpha_max)->required();
  s_curve->add_option("--steps", curve.steps, "number of alpha samples");

  AtlasArgs atlas;
  auto* s_atlas = app.add_subcommand("atlas", "classify an (alpha, beta) grid");
  s_atlas->add_option("--config", config);
  s_atlas->add_option("--resolution", atlas.resolution);
  s_atlas->add_option("--alpha-max", atlas.alpha_max);
  s_atlas->add_option("--beta-max", atlas.beta_max);
  s_atlas->add_flag("--numerical-probe", atlas.numerical_probe, "also try both solvers where no rule applies");
  s_atlas->add_option("--probe-count", atlas.probe_count, "adversarial solver runs on NONEXISTENT cells");
  s_atlas->add_option("--solver-n", atlas.solver_n, "interior nodes of the solver mesh");
  s_atlas->add_option("--beta2-points", atlas.beta2_points, "beta_2 overlay samples (0 disables)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "ERROR USAGE: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (s_eig->parsed()) return cmd_eig(eig, out);
    RunConfig c = load_config(config);
    if (s_verify->parsed()) return cmd_verify(c, out);
    if (s_ratio->parsed()) return cmd_ratio(c, out);
    if (s_solve->parsed()) return cmd_solve(c, solve, out, err);
    if (s_curve->parsed()) return cmd_curve(c, curve, out);
    if (s_atlas->parsed()) return cmd_atlas(c, atlas, out);
  } catch (const Error& e) {
    err << "ERROR " << code_name(e.code()) << ": " << e.detail() << '\n';
    bool usage = e.code() == ErrorCode::USAGE || e.code() == ErrorCode::DOMAIN_ERROR;
    return usage ? kUsage : kSolverFailure;
  } catch (const std::exception& e) {
    err << "ERROR IO_ERROR: " << e.what() << '\n';
    return kSolverFailure;
  }
  return kUsage;
}

}  // namespace pqlap::cli
