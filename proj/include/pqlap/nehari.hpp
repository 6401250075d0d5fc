#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "discrete.hpp"
#include "error.hpp"
#include "linalg.hpp"
#include "pqfunctional.hpp"
#include "spectral1d.hpp"

namespace pqlap {

enum class NehariSubset { M1, M2, M3, NOT_IN_M };

inline const char* subset_name(NehariSubset s) {
  switch (s) {
    case NehariSubset::M1: return "M1";
    case NehariSubset::M2: return "M2";
    case NehariSubset::M3: return "M3";
    case NehariSubset::NOT_IN_M: return "NOT_IN_M";
  }
  return "NOT_IN_M";
}

struct NehariClassification {
  bool in_M = false;
  NehariSubset subset = NehariSubset::NOT_IN_M;
  double H_plus = 0.0, H_minus = 0.0, G_plus = 0.0, G_minus = 0.0;
};

inline NehariClassification classify_nehari(const DiscreteFunction& u, const FunctionalContext& ctx, double tol_N = 1e-8) {
  NehariClassification c;
  PartValues pv = part_values(u, ctx);
  c.H_plus = pv.H_plus;
  c.H_minus = pv.H_minus;
  c.G_plus = pv.G_plus;
  c.G_minus = pv.G_minus;
  if (!(pv.scale_plus > 0.0) || !(pv.scale_minus > 0.0)) return c;
  c.in_M = std::abs(pv.H_plus + pv.G_plus) <= tol_N * pv.scale_plus &&
           std::abs(pv.H_minus + pv.G_minus) <= tol_N * pv.scale_minus;
  if (!c.in_M) return c;
  if (c.H_plus < 0.0 && c.H_minus < 0.0)
    c.subset = NehariSubset::M1;
  else if (c.H_plus > 0.0 && c.H_minus > 0.0)
    c.subset = NehariSubset::M2;
  else
    c.subset = NehariSubset::M3;
  return c;
}

struct RayProjection {
  double t_star = 1.0;
  DiscreteFunction scaled;
};

// The unique t > 0 with t u on the Nehari set: t^{p-q} = -G/H.
inline RayProjection project_ray(const DiscreteFunction& u, const FunctionalContext& ctx) {
  ctx.validate();
  double H = grad_norm_pow(u, ctx.p) - ctx.alpha * lump_norm_pow(u, ctx.p);
  double G = grad_norm_pow(u, ctx.q) - ctx.beta * lump_norm_pow(u, ctx.q);
  require(H * G < 0.0, ErrorCode::SIGN_ERROR,
          "ray projection needs H*G < 0 (H = " + std::to_string(H) + ", G = " + std::to_string(G) + ")");
  RayProjection r;
  r.t_star = std::pow(-G / H, 1.0 / (ctx.p - ctx.q));
  r.scaled = u.scaled(r.t_star);
  return r;
}

namespace detail {

// Part quantities of A u+ - B u- as explicit functions of the two scalings.
struct PartScalingModel {
  double p = 0, q = 0, alpha = 0, beta = 0, h = 0;
  double grad[2][2] = {{0, 0}, {0, 0}};  // [part][exponent p/q], cells inside one part
  double lump[2][2] = {{0, 0}, {0, 0}};
  std::vector<std::pair<double, double>> cross;  // (positive magnitude, negative magnitude)

  PartScalingModel(const DiscreteFunction& u, const FunctionalContext& ctx)
      : p(ctx.p), q(ctx.q), alpha(ctx.alpha), beta(ctx.beta), h(u.mesh.h) {
    const auto& v = u.values;
    const double ex[2] = {p, q};
    for (int j = 0; j <= u.mesh.n; ++j) {
      double x = node(v, j), y = node(v, j + 1);
      if (x >= 0.0 && y >= 0.0) {
        for (int e = 0; e < 2; ++e) grad[0][e] += pow_abs((y - x) / h, ex[e]) * h;
      } else if (x <= 0.0 && y <= 0.0) {
        for (int e = 0; e < 2; ++e) grad[1][e] += pow_abs((y - x) / h, ex[e]) * h;
      } else {
        cross.emplace_back(std::max(x, y), -std::min(x, y));
      }
    }
    for (double x : v) {
      int s = x > 0.0 ? 0 : 1;
      if (x == 0.0) continue;
      for (int e = 0; e < 2; ++e) lump[s][e] += pow_abs(x, ex[e]) * h;
    }
  }

  // N[s] = H + G of part s; J = d N / d(log A, log B); pos[s] = gradient terms (for scaling)
  void eval(double A, double B, double N[2], double J[2][2], double pos[2]) const {
    const double S[2] = {A, B};
    const double ex[2] = {p, q};
    const double mass[2] = {alpha, beta};
    for (int s = 0; s < 2; ++s) {
      N[s] = 0.0;
      pos[s] = 0.0;
      J[s][0] = J[s][1] = 0.0;
      for (int e = 0; e < 2; ++e) {
        double r = ex[e];
        double full = std::pow(S[s], r) * grad[s][e];
        N[s] += full - mass[e] * std::pow(S[s], r) * lump[s][e];
        pos[s] += full;
        J[s][s] += r * (full - mass[e] * std::pow(S[s], r) * lump[s][e]);
      }
    }
    for (const auto& [a, b] : cross) {
      for (int e = 0; e < 2; ++e) {
        double r = ex[e];
        double X = (A * a + B * b) / h;
        double Xr1 = std::pow(X, r - 1.0);
        double Xr2 = (r - 1.0) * std::pow(X, r - 2.0) / h;
        double tp = Xr1 * A * a, tm = Xr1 * B * b;
        N[0] += tp;
        N[1] += tm;
        pos[0] += tp;
        pos[1] += tm;
        // log-derivatives
        J[0][0] += tp + Xr2 * A * a * A * a;
        J[0][1] += Xr2 * B * b * A * a;
        J[1][1] += tm + Xr2 * B * b * B * b;
        J[1][0] += Xr2 * A * a * B * b;
      }
    }
  }
};

inline DiscreteFunction combine_parts(const DiscreteFunction& u, double A, double B) {
  DiscreteFunction out(u.mesh);
  for (int i = 0; i < u.mesh.n; ++i) out.values[i] = u.values[i] > 0.0 ? A * u.values[i] : B * u.values[i];
  return out;
}

inline std::string part_signs(const PartValues& pv) {
  auto f = [](double x) { return std::to_string(x); };
  return "H+ = " + f(pv.H_plus) + ", G+ = " + f(pv.G_plus) + ", H- = " + f(pv.H_minus) + ", G- = " + f(pv.G_minus);
}

}  // namespace detail

// t+ u+ - t- u- with both parts on the Nehari set, H < 0 < G on each part.
inline DiscreteFunction project_nodal(const DiscreteFunction& u, const FunctionalContext& ctx) {
  ctx.validate();
  PartValues pv = part_values(u, ctx);
  require(pv.scale_plus > 0.0 && lump_norm_pow(u.plus(), 2.0) > 0.0, ErrorCode::PART_SIGN_ERROR, "positive part is empty");
  require(pv.scale_minus > 0.0 && lump_norm_pow(u.minus(), 2.0) > 0.0, ErrorCode::PART_SIGN_ERROR, "negative part is empty");
  auto check = [&](const PartValues& v, const char* when) {
    std::string bad;
    if (!(v.H_plus < 0.0)) bad += "H(u+) >= 0; ";
    if (!(v.G_plus > 0.0)) bad += "G(u+) <= 0; ";
    if (!(v.H_minus < 0.0)) bad += "H(u-) >= 0; ";
    if (!(v.G_minus > 0.0)) bad += "G(u-) <= 0; ";
    if (!bad.empty()) throw Error(ErrorCode::PART_SIGN_ERROR, std::string(when) + ": " + bad + detail::part_signs(v));
  };
  check(pv, "input");

  detail::PartScalingModel model(u, ctx);
  const double pq = ctx.p - ctx.q;
  double x[2] = {std::log(-pv.G_plus / pv.H_plus) / pq, std::log(-pv.G_minus / pv.H_minus) / pq};
  auto merit = [&](const double xx[2], double N[2], double J[2][2], double pos[2]) {
    model.eval(std::exp(xx[0]), std::exp(xx[1]), N, J, pos);
    return std::hypot(N[0] / pos[0], N[1] / pos[1]);
  };
  double N[2], J[2][2], pos[2];
  double m = merit(x, N, J, pos);
  for (int it = 0; it < 100 && m > 1e-15; ++it) {
    double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    if (!(std::abs(det) > 0.0)) break;
    double d0 = -(J[1][1] * N[0] - J[0][1] * N[1]) / det;
    double d1 = -(-J[1][0] * N[0] + J[0][0] * N[1]) / det;
    double cap = std::max(std::abs(d0), std::abs(d1));
    double t = cap > 2.0 ? 2.0 / cap : 1.0;
    bool moved = false;
    for (int ls = 0; ls < 50; ++ls, t *= 0.5) {
      double xt[2] = {x[0] + t * d0, x[1] + t * d1};
      double Nt[2], Jt[2][2], pt[2];
      double mt = merit(xt, Nt, Jt, pt);
      if (mt < m) {
        x[0] = xt[0];
        x[1] = xt[1];
        m = mt;
        std::copy(Nt, Nt + 2, N);
        std::copy(&Jt[0][0], &Jt[0][0] + 4, &J[0][0]);
        std::copy(pt, pt + 2, pos);
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  require(m <= 1e-11, ErrorCode::NOT_CONVERGED, "part scaling did not reach the Nehari set (defect " + std::to_string(m) + ")");
  DiscreteFunction out = detail::combine_parts(u, std::exp(x[0]), std::exp(x[1]));
  check(part_values(out, ctx), "projection");
  return out;
}

struct M1Options {
  double tol_resid = 1e-6;
  double tol_N = 1e-8;
  int max_iter = 10000;
  double polish_trigger = 1e-2;  // try Newton polishing once the residual is below this fraction of its start
};

struct M1Result {
  Status status;
  DiscreteFunction u;
  FunctionalReport report;
  NehariClassification cls;
  int iterations = 0;
  int feasible_seeds = 0;
};

namespace detail {

// two lobes of first-eigenfunction shape on (0,s) and (s,T), the second negative
inline DiscreteFunction two_lobe(const Mesh& mesh, double r, double s) {
  GeneralizedSine sine(r);
  const double P = sine.half_period();
  return sample(mesh, [&](double t) {
    if (t < s) return sine(P * t / s).s;
    return -sine(P * (t - s) / (mesh.T - s)).s;
  });
}

}  // namespace detail

inline std::vector<DiscreteFunction> default_M1_seeds(const Mesh& mesh, const FunctionalContext& ctx) {
  std::vector<DiscreteFunction> seeds;
  EigenPair ep = eigenfunction(2, ctx.p, mesh.T), eq = eigenfunction(2, ctx.q, mesh.T);
  seeds.push_back(sample(mesh, [&](double t) { return ep(t); }));
  seeds.push_back(sample(mesh, [&](double t) { return eq(t); }));
  seeds.push_back(detail::two_lobe(mesh, ctx.p, mesh.T / 3.0));
  seeds.push_back(detail::two_lobe(mesh, ctx.p, 2.0 * mesh.T / 3.0));
  const std::size_t k = seeds.size();
  for (std::size_t i = 0; i < k; ++i) seeds.push_back(seeds[i].scaled(-1.0));
  return seeds;
}

namespace detail {

inline double energy_of(const DiscreteFunction& u, const FunctionalContext& ctx) {
  double H = grad_norm_pow(u, ctx.p) - ctx.alpha * lump_norm_pow(u, ctx.p);
  double G = grad_norm_pow(u, ctx.q) - ctx.beta * lump_norm_pow(u, ctx.q);
  return H / ctx.p + G / ctx.q;
}

// largest cell flux, the natural size of gradient entries
inline double flux_scale(const DiscreteFunction& u, const FunctionalContext& ctx) {
  double m = 0.0;
  for (int j = 0; j <= u.mesh.n; ++j) {
    double D = (node(u.values, j + 1) - node(u.values, j)) / u.mesh.h;
    m = std::max(m, pow_abs(D, ctx.p - 1.0) + pow_abs(D, ctx.q - 1.0));
  }
  return m;
}

inline bool try_project(const DiscreteFunction& u, const FunctionalContext& ctx, DiscreteFunction& out) {
  try {
    out = project_nodal(u, ctx);
    return true;
  } catch (const Error&) {
    return false;
  }
}

inline bool accept_M1(const DiscreteFunction& u, const FunctionalContext& ctx, const M1Options& opts) {
  FunctionalReport rep = evaluate(u, ctx);
  NehariClassification c = classify_nehari(u, ctx, opts.tol_N);
  return rep.residual <= opts.tol_resid && c.subset == NehariSubset::M1 && rep.E > 0.0 && rep.nodal_domains == 2 &&
         c.G_plus > 0.0 && c.G_minus > 0.0;
}

}  // namespace detail

// Minimizes E over the discrete M1 set: preconditioned descent in the free function,
// reprojection after each trial step, and a final Newton polish onto the critical point.
inline M1Result minimize_M1(const FunctionalContext& ctx, const std::vector<DiscreteFunction>& seeds,
                            const M1Options& opts = {}) {
  ctx.validate();
  M1Result best;
  best.status = Status::failure(ErrorCode::NO_FEASIBLE_SEED, "no seed admits a nodal projection");
  if (seeds.empty()) return best;
  const Mesh mesh = seeds.front().mesh;
  const double sqh = std::sqrt(mesh.h);
  PQFunctional energy = energy_functional(mesh, ctx);
  PQFunctional precond;
  precond.mesh = mesh;
  precond.grad_terms = {{ctx.p, 1.0}, {ctx.q, 1.0}};

  // repair: blend infeasible seeds toward the second p-eigenfunction
  EigenPair e2 = eigenfunction(2, ctx.p, mesh.T);
  DiscreteFunction anchor = sample(mesh, [&](double t) { return e2(t); });

  std::vector<DiscreteFunction> starts;
  for (const auto& s : seeds) {
    DiscreteFunction proj;
    if (detail::try_project(s, ctx, proj)) {
      starts.push_back(proj);
      continue;
    }
    double sgn = 0.0;
    for (int i = 0; i < mesh.n; ++i) sgn += s.values[i] * anchor.values[i];
    double sm = s.sup_norm();
    if (!(sm > 0.0)) continue;
    for (double th : {0.25, 0.5, 0.75}) {
      DiscreteFunction blend(mesh);
      for (int i = 0; i < mesh.n; ++i)
        blend.values[i] = (1.0 - th) * s.values[i] / sm + th * (sgn < 0.0 ? -1.0 : 1.0) * anchor.values[i];
      if (detail::try_project(blend, ctx, proj)) {
        starts.push_back(proj);
        break;
      }
    }
  }
  best.feasible_seeds = static_cast<int>(starts.size());
  if (starts.empty()) return best;

  bool have_accepted = false;
  double best_E = std::numeric_limits<double>::infinity();
  DiscreteFunction best_any = starts.front();
  double best_any_res = std::numeric_limits<double>::infinity();
  int total_iter = 0;

  for (const auto& start : starts) {
    DiscreteFunction u = start;
    double E = detail::energy_of(u, ctx);
    std::vector<double> g = energy.gradient(u.values);
    double res0 = euclid_norm(g) * sqh;
    double sigma = 1.0;
    bool done = false;
    int stall = 0;
    for (int it = 0; it < opts.max_iter && !done; ++it) {
      ++total_iter;
      double res = euclid_norm(g) * sqh;
      if (res < best_any_res && !have_accepted) {
        best_any = u;
        best_any_res = res;
      }
      if (res <= opts.polish_trigger * res0 || stall >= 3) {
        SolveResult pr = polish_critical(energy, u.values, 1e-14 * detail::flux_scale(u, ctx));
        DiscreteFunction cand(mesh, pr.x);
        if (detail::accept_M1(cand, ctx, opts)) {
          double Ec = detail::energy_of(cand, ctx);
          if (Ec < best_E) {
            best_E = Ec;
            best.u = cand;
            have_accepted = true;
          }
          done = true;
          break;
        }
        if (stall >= 3) break;
      }
      Tridiagonal K = precond.hessian(u.values);
      std::vector<double> d(mesh.n);
      for (int i = 0; i < mesh.n; ++i) d[i] = -g[i];
      if (!solve_spd(K, d)) break;
      bool accepted = false;
      for (int ls = 0; ls < 40; ++ls) {
        DiscreteFunction trial(mesh);
        for (int i = 0; i < mesh.n; ++i) trial.values[i] = u.values[i] + sigma * d[i];
        DiscreteFunction proj;
        if (detail::try_project(trial, ctx, proj)) {
          double Et = detail::energy_of(proj, ctx);
          if (Et < E) {
            u = proj;
            E = Et;
            accepted = true;
            break;
          }
        }
        sigma *= 0.5;
      }
      if (accepted) {
        sigma = std::min(2.0 * sigma, 1e3);
        stall = 0;
      } else {
        ++stall;
        sigma = 1.0;
      }
      g = energy.gradient(u.values);
    }
  }
  best.iterations = total_iter;
  if (have_accepted) {
    best.status = Status::success();
  } else {
    best.u = best_any;
    best.status = Status::failure(ErrorCode::NOT_CONVERGED, "no start reached an M1 critical point within the residual tolerance");
  }
  best.report = evaluate(best.u, ctx);
  best.cls = classify_nehari(best.u, ctx, opts.tol_N);
  return best;
}

}  // namespace pqlap
