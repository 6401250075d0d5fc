#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "curves.hpp"
#include "discrete.hpp"
#include "flow.hpp"
#include "nehari.hpp"
#include "spectral1d.hpp"

namespace pqlap {

enum class Verdict { NONEXISTENT, EXISTS_POS_ENERGY, EXISTS_NEG_ENERGY, UNKNOWN };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::NONEXISTENT: return "NONEXISTENT";
    case Verdict::EXISTS_POS_ENERGY: return "EXISTS_POS_ENERGY";
    case Verdict::EXISTS_NEG_ENERGY: return "EXISTS_NEG_ENERGY";
    case Verdict::UNKNOWN: return "UNKNOWN";
  }
  return "UNKNOWN";
}

// Rule tags. Theorem-backed rules and the numerical-only probe never share a tag.
namespace rule {
inline constexpr const char* kNonexistence = "nonexistence-below-second-eigenvalues";
inline constexpr const char* kNehariMinimum = "nehari-minimum-below-beta-L";
inline constexpr const char* kFlowBelowSecond = "flow-alpha-below-second-p-eigenvalue";
inline constexpr const char* kFlowHighBeta = "flow-beta-above-spectral-threshold";
inline constexpr const char* kNumericalOnly = "numerical-only";
inline constexpr const char* kNone = "none";
}  // namespace rule

struct RegionVerdict {
  double alpha = 0.0;
  double beta = 0.0;
  Verdict verdict = Verdict::UNKNOWN;
  std::string rule = rule::kNone;
  std::string certificate_path;  // filled in by whoever writes the solution file
  double energy = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
  int nodal_domains = 0;
  std::string diagnostics;
  bool has_solution = false;
  DiscreteFunction solution;
};

// Samples of beta_L, read conservatively: between two samples the smaller value is used,
// outside the sampled range nothing can be asserted.
struct BetaLTable {
  std::vector<double> alpha;
  std::vector<double> value;  // -inf where the sample failed

  double lower_bound(double a) const {
    const double none = -std::numeric_limits<double>::infinity();
    if (alpha.empty() || a < alpha.front() || a > alpha.back()) return none;
    auto it = std::lower_bound(alpha.begin(), alpha.end(), a);
    std::size_t k = static_cast<std::size_t>(it - alpha.begin());
    if (alpha[k] == a) return value[k];
    return std::min(value[k - 1], value[k]);
  }
};

inline BetaLTable make_beta_L_table(const std::vector<CurveSample>& samples) {
  BetaLTable t;
  for (const auto& s : samples) {
    t.alpha.push_back(s.alpha);
    t.value.push_back(s.status == CurveStatus::OK ? s.value : -std::numeric_limits<double>::infinity());
  }
  return t;
}

struct AtlasOptions {
  int n = 119;              // interior nodes of the solver mesh; n+1 divisible by 2, 3, 4
  double tol_resid = 1e-6;  // certificate residual
  bool numerical_probe = false;  // also try both solvers in UNKNOWN cells
  int threads = 0;          // 0: hardware concurrency
  CurveOptions curve{};
};

namespace detail {

inline void attach(RegionVerdict& v, const DiscreteFunction& u, const FunctionalContext& ctx) {
  FunctionalReport rep = evaluate(u, ctx);
  v.has_solution = true;
  v.solution = u;
  v.energy = rep.E;
  v.residual = rep.residual;
  v.nodal_domains = rep.nodal_domains;
}

// Fresh re-evaluation of an attached solution against the claimed verdict.
inline bool certificate_valid(const RegionVerdict& v, const FunctionalContext& ctx, double tol) {
  if (v.verdict != Verdict::EXISTS_POS_ENERGY && v.verdict != Verdict::EXISTS_NEG_ENERGY) return !v.has_solution;
  if (!v.has_solution) return false;
  FunctionalReport rep = evaluate(v.solution, ctx);
  if (!(rep.residual <= tol) || rep.nodal_domains < 2) return false;
  return v.verdict == Verdict::EXISTS_POS_ENERGY ? rep.E > 0.0 : rep.E < 0.0;
}

inline bool try_nehari(RegionVerdict& v, const FunctionalContext& ctx, const Mesh& mesh, const AtlasOptions& opts) {
  M1Options mo;
  mo.tol_resid = opts.tol_resid;
  M1Result r = minimize_M1(ctx, default_M1_seeds(mesh, ctx), mo);
  if (!r.status.ok) {
    v.diagnostics = std::string("nehari: ") + r.status.message();
    return false;
  }
  attach(v, r.u, ctx);
  return true;
}

inline bool try_flow(RegionVerdict& v, const FunctionalContext& ctx, const Mesh& mesh, const AtlasOptions& opts) {
  NegativeOptions no;
  no.tol_resid = opts.tol_resid;
  NegativeResult r;
  try {
    r = find_nodal_negative(ctx, mesh, no);
  } catch (const Error& e) {
    v.diagnostics = std::string("flow: ") + e.what();
    return false;
  }
  if (!r.status.ok) {
    v.diagnostics = std::string("flow: ") + r.status.message();
    return false;
  }
  attach(v, r.u, ctx);
  v.diagnostics = "flow route " + r.route;
  return true;
}

}  // namespace detail

// One cell, by rule order. Solver failures degrade to UNKNOWN, never to NONEXISTENT.
inline RegionVerdict classify(double alpha, double beta, const FunctionalContext& base, double T, const BetaLTable& beta_L,
                              const AtlasOptions& opts = {}) {
  FunctionalContext ctx = base;
  ctx.alpha = alpha;
  ctx.beta = beta;
  ctx.validate();
  RegionVerdict v;
  v.alpha = alpha;
  v.beta = beta;
  const double l2p = eigenvalue(2, ctx.p, T), l2q = eigenvalue(2, ctx.q, T);
  if (alpha <= l2p && beta <= l2q) {
    v.verdict = Verdict::NONEXISTENT;
    v.rule = rule::kNonexistence;
    return v;
  }
  const Mesh mesh(T, opts.n);
  std::string notes;
  if (alpha > l2p && beta < beta_L.lower_bound(alpha)) {
    if (detail::try_nehari(v, ctx, mesh, opts)) {
      v.verdict = Verdict::EXISTS_POS_ENERGY;
      v.rule = rule::kNehariMinimum;
      return v;
    }
    notes = v.diagnostics;
  }
  if (beta > l2q) {
    const double threshold = std::max(beta_upper_star(alpha, ctx.p, ctx.q, T), eigenvalue(k_alpha(alpha, ctx.p, T) + 1, ctx.q, T));
    const bool below = alpha < l2p;
    if (below || beta > threshold) {
      if (detail::try_flow(v, ctx, mesh, opts)) {
        v.verdict = Verdict::EXISTS_NEG_ENERGY;
        v.rule = below ? rule::kFlowBelowSecond : rule::kFlowHighBeta;
        return v;
      }
      notes += (notes.empty() ? "" : "; ") + v.diagnostics;
    }
  }
  v.verdict = Verdict::UNKNOWN;
  v.rule = rule::kNone;
  v.diagnostics = notes.empty() ? "no rule applies" : notes;
  if (opts.numerical_probe) {
    RegionVerdict probe = v;
    if (detail::try_nehari(probe, ctx, mesh, opts) && probe.energy > 0.0) {
      probe.verdict = Verdict::EXISTS_POS_ENERGY;
      probe.rule = rule::kNumericalOnly;
      return probe;
    }
    probe = v;
    if (detail::try_flow(probe, ctx, mesh, opts) && probe.energy < 0.0) {
      probe.verdict = Verdict::EXISTS_NEG_ENERGY;
      probe.rule = rule::kNumericalOnly;
      return probe;
    }
  }
  return v;
}

inline std::vector<double> linspace(double a, double b, int count) {
  require(count >= 2, ErrorCode::DOMAIN_ERROR, "a grid needs at least two points");
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i) g[i] = a + (b - a) * i / (count - 1);
  return g;
}

struct CurveOverlay {
  std::vector<CurveSample> beta_L;
  std::vector<CurveSample> beta_2;
  std::vector<double> lambda_p;  // spectrum gridlines within the alpha range
  std::vector<double> lambda_q;
  std::vector<std::pair<double, double>> beta_upper_markers;  // (lambda_k(p), beta_U*)
};

struct AtlasResult {
  std::vector<double> alphas;
  std::vector<double> betas;
  std::vector<RegionVerdict> cells;  // alpha-major: cells[i * betas.size() + j]
  std::map<std::string, int> counts;
  CurveOverlay overlay;
  int invalid_certificates = 0;

  const RegionVerdict& at(std::size_t i, std::size_t j) const { return cells[i * betas.size() + j]; }
};

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Classifies every cell of a resolution x resolution grid. Output order is fixed by the grid,
// whatever the number of workers.
inline AtlasResult sweep(std::pair<double, double> alpha_range, std::pair<double, double> beta_range, int resolution,
                         const FunctionalContext& base, double T, const AtlasOptions& opts = {}, int beta2_points = 8) {
  base.validate();
  AtlasResult res;
  res.alphas = linspace(alpha_range.first, alpha_range.second, resolution);
  res.betas = linspace(beta_range.first, beta_range.second, resolution);
  const double l2p = eigenvalue(2, base.p, T);

  std::vector<double> curve_alphas;
  for (double a : res.alphas)
    if (a > l2p) curve_alphas.push_back(a);
  if (!curve_alphas.empty()) res.overlay.beta_L = curve_beta_L(curve_alphas, base, T, opts.curve);
  BetaLTable table = make_beta_L_table(res.overlay.beta_L);
  if (beta2_points >= 2) {
    CurveOptions co = opts.curve;
    co.n = std::min(co.n, 100);
    res.overlay.beta_2 = curve_beta_2(linspace(alpha_range.first, alpha_range.second, beta2_points), base, T, co);
  }
  for (int k = 1;; ++k) {
    double lp = eigenvalue(k, base.p, T);
    if (lp > alpha_range.second) break;
    res.overlay.lambda_p.push_back(lp);
    res.overlay.beta_upper_markers.emplace_back(lp, beta_upper_star(lp, base.p, base.q, T));
  }
  for (int k = 1;; ++k) {
    double lq = eigenvalue(k, base.q, T);
    if (lq > beta_range.second) break;
    res.overlay.lambda_q.push_back(lq);
  }

  const std::size_t total = res.alphas.size() * res.betas.size();
  res.cells.resize(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t idx = next++; idx < total; idx = next++) {
      std::size_t i = idx / res.betas.size(), j = idx % res.betas.size();
      res.cells[idx] = classify(res.alphas[i], res.betas[j], base, T, table, opts);
    }
  };
  const int nt = std::max(1, std::min<int>(resolve_threads(opts.threads), static_cast<int>(total)));
  std::vector<std::thread> pool;
  for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (const auto& c : res.cells) {
    ++res.counts[verdict_name(c.verdict)];
    FunctionalContext ctx = base;
    ctx.alpha = c.alpha;
    ctx.beta = c.beta;
    if (!detail::certificate_valid(c, ctx, opts.tol_resid)) ++res.invalid_certificates;
  }
  return res;
}

struct ProbeOutcome {
  double alpha = 0.0;
  double beta = 0.0;
  bool nehari_accepted = false;
  bool flow_accepted = false;
  std::string nehari_detail;
  std::string flow_detail;
};

// Runs both solvers on up to `count` randomly chosen NONEXISTENT cells. Any acceptance would
// contradict the rule.
inline std::vector<ProbeOutcome> probe_nonexistent(const AtlasResult& atlas, const FunctionalContext& base, double T,
                                                   int count, std::uint64_t seed, const AtlasOptions& opts = {}) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < atlas.cells.size(); ++k)
    if (atlas.cells[k].verdict == Verdict::NONEXISTENT) idx.push_back(k);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  if (static_cast<int>(idx.size()) > count) idx.resize(count);
  std::vector<ProbeOutcome> out;
  const Mesh mesh(T, opts.n);
  for (std::size_t k : idx) {
    const RegionVerdict& c = atlas.cells[k];
    FunctionalContext ctx = base;
    ctx.alpha = c.alpha;
    ctx.beta = c.beta;
    ProbeOutcome po;
    po.alpha = c.alpha;
    po.beta = c.beta;
    RegionVerdict scratch;
    po.nehari_accepted = detail::try_nehari(scratch, ctx, mesh, opts);
    po.nehari_detail = scratch.diagnostics;
    scratch = RegionVerdict{};
    po.flow_accepted = detail::try_flow(scratch, ctx, mesh, opts);
    po.flow_detail = scratch.diagnostics;
    out.push_back(po);
  }
  return out;
}

}  // namespace pqlap
