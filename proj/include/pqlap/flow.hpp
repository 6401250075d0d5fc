#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "discrete.hpp"
#include "discrete_eigen.hpp"
#include "error.hpp"
#include "nehari.hpp"
#include "pqfunctional.hpp"

namespace pqlap {

// Right-hand side h(x_i, s) given per interior node, with its s-derivative and primitive.
struct Nonlinearity {
  Mesh mesh;
  std::function<double(int, double)> h;
  std::function<double(int, double)> dh;
  std::function<double(int, double)> prim;
  double lambda0 = 0.0;  // h(x,s) s + lambda0 (|s|^q + |s|^p) >= 0
  double growth_C = 0.0;

  double operator()(int i, double s) const { return h(i, s); }
};

// alpha |s|^{p-2} s + beta |s|^{q-2} s, the right-hand side of the original problem.
inline Nonlinearity power_nonlinearity(const Mesh& mesh, const FunctionalContext& ctx) {
  Nonlinearity nl;
  nl.mesh = mesh;
  const double p = ctx.p, q = ctx.q, a = ctx.alpha, b = ctx.beta;
  nl.h = [=](int, double s) { return a * detail::phi(s, p) + b * detail::phi(s, q); };
  nl.dh = [=](int, double s) {
    return a * (p - 1.0) * detail::pow_abs(s, p - 2.0) + b * (q - 1.0) * detail::pow_abs(s, q - 2.0);
  };
  nl.prim = [=](int, double s) { return a * detail::pow_abs(s, p) / p + b * detail::pow_abs(s, q) / q; };
  // smallest constant that works: h(s) s is already nonnegative for alpha, beta >= 0
  nl.lambda0 = std::max({0.0, -a, -b});
  nl.growth_C = std::abs(a) + std::abs(b);
  return nl;
}

// Samples h(x,s) s + lambda0 (|s|^q + |s|^p) >= 0 on a grid of s values at every node.
inline bool check_A1(const Nonlinearity& nl, const FunctionalContext& ctx, double s_max = 10.0, int grid = 41) {
  for (int i = 0; i < nl.mesh.n; ++i)
    for (int k = 0; k < grid; ++k) {
      double s = -s_max + 2.0 * s_max * k / (grid - 1);
      double v = nl.h(i, s) * s + nl.lambda0 * (detail::pow_abs(s, ctx.q) + detail::pow_abs(s, ctx.p));
      if (v < -1e-12 * (1.0 + std::abs(v))) return false;
    }
  return true;
}

// The energy J(u) = |u'|_p^p/p + |u'|_q^q/q - sum prim(x_i, u_i) h as a PQFunctional.
inline PQFunctional flow_functional(const Nonlinearity& nl, const FunctionalContext& ctx) {
  PQFunctional F;
  F.mesh = nl.mesh;
  F.grad_terms = {{ctx.p, 1.0}, {ctx.q, 1.0}};
  F.potential.value = [prim = nl.prim](int i, double s) { return -prim(i, s); };
  F.potential.deriv = [h = nl.h](int i, double s) { return -h(i, s); };
  F.potential.second = [dh = nl.dh](int i, double s) { return -dh(i, s); };
  return F;
}

inline double flow_energy(const DiscreteFunction& u, const Nonlinearity& nl, const FunctionalContext& ctx) {
  return flow_functional(nl, ctx).value(u.values);
}

// Unique minimizer of |u'|_p^p/p + |u'|_q^q/q + lambda(|u|_p^p/p + |u|_q^q/q) - <f,u>.
inline DiscreteFunction solve_T_lambda(const DiscreteFunction& f, double lambda, const FunctionalContext& ctx,
                                       const std::vector<double>* warm = nullptr) {
  require(lambda > 0.0, ErrorCode::DOMAIN_ERROR, "lambda must be > 0");
  const Mesh& mesh = f.mesh;
  const double scale = max_norm(f.values) * mesh.h;
  if (!(scale > 0.0)) return DiscreteFunction(mesh);
  PQFunctional F;
  F.mesh = mesh;
  F.grad_terms = {{ctx.p, 1.0}, {ctx.q, 1.0}};
  F.node_terms = {{ctx.p, lambda}, {ctx.q, lambda}};
  F.load = f.values;
  std::vector<double> x0;
  if (warm && static_cast<int>(warm->size()) == mesh.n) {
    x0 = *warm;
  } else {
    // pointwise inverse of lambda psi, a cheap positive-homogeneous start
    x0.resize(mesh.n);
    for (int i = 0; i < mesh.n; ++i) x0[i] = std::copysign(std::pow(std::abs(f.values[i]) / (2.0 * lambda), 1.0 / (ctx.q - 1.0)), f.values[i]);
  }
  // convex descent to moderate accuracy, then plain Newton down to rounding level
  SolveResult r = minimize_convex(F, x0, 1e-10 * scale, 500);
  r = polish_critical(F, r.x, 1e-15 * scale, 20);
  if (!(r.grad_norm <= 1e-10 * scale))
    throw Error(ErrorCode::NOT_CONVERGED, "T_lambda inversion stopped at gradient " + std::to_string(r.grad_norm / scale) +
                                              " relative to the load");
  return DiscreteFunction(mesh, r.x);
}

inline DiscreteFunction B_lambda(const DiscreteFunction& u, const Nonlinearity& nl, double lambda, const FunctionalContext& ctx,
                                 const std::vector<double>* warm = nullptr) {
  require(lambda > nl.lambda0, ErrorCode::DOMAIN_ERROR, "lambda must exceed the nonlinearity constant lambda0");
  DiscreteFunction rhs(u.mesh);
  for (int i = 0; i < u.mesh.n; ++i) {
    double s = u.values[i];
    rhs.values[i] = nl.h(i, s) + lambda * (detail::phi(s, ctx.p) + detail::phi(s, ctx.q));
  }
  return solve_T_lambda(rhs, lambda, ctx, warm);
}

enum class Cone { POS, NEG, MIXED };

inline const char* cone_name(Cone c) {
  switch (c) {
    case Cone::POS: return "POS";
    case Cone::NEG: return "NEG";
    case Cone::MIXED: return "MIXED";
  }
  return "MIXED";
}

// POS / NEG: every interior value strictly of one sign (interior of the cone).
inline Cone cone_of(const DiscreteFunction& u) {
  bool pos = true, neg = true;
  for (double v : u.values) {
    if (!(v > 0.0)) pos = false;
    if (!(v < 0.0)) neg = false;
  }
  if (pos) return Cone::POS;
  if (neg) return Cone::NEG;
  return Cone::MIXED;
}

struct FlowRecord {
  int step = 0;
  double J = 0.0;
  double gap = 0.0;
  Cone cone = Cone::MIXED;
};

struct FlowState {
  DiscreteFunction eta;
  double J_value = 0.0;
  int step_count = 0;
  Cone cone = Cone::MIXED;
  double gap = 0.0;
};

struct DescendOptions {
  double tol = 1e-9;         // on gap / |eta|, both in the h^{1/2}-scaled Euclidean norm
  int max_steps = 5000;
  double dt0 = 0.5;
  bool stop_on_cone = false;  // leave as soon as eta is inside P or -P
  // m >= 2: after each step, project onto the m-lobe pattern (see symmetric_lobes_project)
  int symmetry_lobes = 0;
  double diverge_factor = 1e6;
  double collapse_factor = 1e-8;
  double stall_accept = 1e-6;  // relative gap that still counts as converged once J stops resolving
  int stall_window = 50;       // accepted steps with neither a 1% gap improvement nor a visible J decrease
};

struct DescendResult {
  Status status;
  FlowState final;
  std::vector<FlowRecord> log;
  bool diverged = false;
  bool collapsed = false;
  bool left_through_cone = false;
  bool stalled = false;
  // the mixed-sign iterate with the smallest gap relative to its norm; a trajectory that
  // skirts a sign-changing critical point before leaving through a cone passes near it here
  FlowState best_mixed;
  double best_mixed_rel_gap = std::numeric_limits<double>::infinity();
};

namespace detail {

inline double scaled_norm(const std::vector<double>& v, double h) { return euclid_norm(v) * std::sqrt(h); }

inline void make_odd(std::vector<double>& v) {
  const int n = static_cast<int>(v.size());
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = 0.5 * (v[i] - v[n - 1 - i]);
  v = std::move(w);
}

// Whether the m-lobe pattern fits the mesh: every junction jT/m must be a node.
inline bool lobes_fit(int n, int m) { return m == 2 || (m >= 2 && (n + 1) % m == 0); }

}  // namespace detail

// Orthogonal projection onto functions that vanish at x = jT/m, are even about each cell
// midpoint and flip sign from one cell to the next. With an odd, x-independent right-hand
// side this set is invariant under B_lambda. For m = 2 on a mesh without a middle node,
// falls back to oddness about T/2.
inline void symmetric_lobes_project(std::vector<double>& v, int m) {
  const int n = static_cast<int>(v.size());
  require(detail::lobes_fit(n, m), ErrorCode::DOMAIN_ERROR, "lobe count does not divide the mesh");
  if ((n + 1) % m != 0) {
    detail::make_odd(v);
    return;
  }
  const int L = (n + 1) / m;  // node steps per cell; cell j holds nodes jL .. jL+L-2
  std::vector<double> cell(L - 1, 0.0);
  for (int j = 0; j < m; ++j) {
    const double sgn = (j % 2 == 0) ? 1.0 : -1.0;
    for (int k = 0; k < L - 1; ++k) cell[k] += sgn * (v[j * L + k] + v[j * L + (L - 2 - k)]);
  }
  for (double& c : cell) c /= 2.0 * m;
  for (int j = 0; j < m; ++j) {
    const double sgn = (j % 2 == 0) ? 1.0 : -1.0;
    for (int k = 0; k < L - 1; ++k) v[j * L + k] = sgn * cell[k];
    if (j + 1 < m) v[j * L + L - 1] = 0.0;
  }
}

// Explicit Euler steps eta <- eta + dt (B(eta) - eta), accepted only when J does not increase.
inline DescendResult descend(const DiscreteFunction& u0, const Nonlinearity& nl, double lambda, const FunctionalContext& ctx,
                             const DescendOptions& opts = {}) {
  require(lambda > nl.lambda0, ErrorCode::DOMAIN_ERROR, "lambda must exceed the nonlinearity constant lambda0");
  DescendResult res;
  const Mesh& mesh = u0.mesh;
  const double h = mesh.h;
  PQFunctional J = flow_functional(nl, ctx);
  DiscreteFunction eta = u0;
  if (opts.symmetry_lobes >= 2) symmetric_lobes_project(eta.values, opts.symmetry_lobes);
  const double seed_sup = std::max(eta.sup_norm(), 1e-300);
  double Jv = J.value(eta.values);
  double dt = opts.dt0;
  int accepts = 0;
  DiscreteFunction B = B_lambda(eta, nl, lambda, ctx);
  auto gap_of = [&](const DiscreteFunction& a, const DiscreteFunction& b) {
    std::vector<double> d(mesh.n);
    for (int i = 0; i < mesh.n; ++i) d[i] = b.values[i] - a.values[i];
    return detail::scaled_norm(d, h);
  };
  double gap = gap_of(eta, B);
  res.log.push_back({0, Jv, gap, cone_of(eta)});
  if (cone_of(eta) == Cone::MIXED) {
    res.best_mixed_rel_gap = gap / std::max(detail::scaled_norm(eta.values, h), 1e-300);
    res.best_mixed = {eta, Jv, 0, Cone::MIXED, gap};
  }
  res.status = Status::failure(ErrorCode::NOT_CONVERGED, "step budget exhausted");
  int step = 0;
  double best_gap = gap;
  int best_step = 0;
  double J_mark = Jv;
  for (int k = 0; k < opts.max_steps * 4 && step < opts.max_steps; ++k) {
    double en = detail::scaled_norm(eta.values, h);
    if (gap <= opts.tol * std::max(en, 1e-300)) {
      res.status = Status::success();
      break;
    }
    DiscreteFunction trial(mesh);
    for (int i = 0; i < mesh.n; ++i) trial.values[i] = eta.values[i] + dt * (B.values[i] - eta.values[i]);
    if (opts.symmetry_lobes >= 2) symmetric_lobes_project(trial.values, opts.symmetry_lobes);
    double Jt = J.value(trial.values);
    if (!(Jt <= Jv)) {
      dt *= 0.5;
      accepts = 0;
      if (dt < 1e-14) {
        // J no longer resolves a decrease: rounding floor, roughly sqrt(eps) in the gap
        bool near = gap <= opts.stall_accept * std::max(en, 1e-300);
        res.status = near ? Status::success() : Status::failure(ErrorCode::NOT_CONVERGED, "time step underflow");
        res.stalled = true;
        break;
      }
      continue;
    }
    ++step;
    eta = trial;
    Jv = Jt;
    if (++accepts >= 5) {
      dt = std::min(2.0 * dt, 1.0);
      accepts = 0;
    }
    double sup = eta.sup_norm();
    Cone c = cone_of(eta);
    if (sup > opts.diverge_factor * std::max(1.0, seed_sup)) {
      res.diverged = true;
      res.log.push_back({step, Jv, std::numeric_limits<double>::quiet_NaN(), c});
      res.status = Status::failure(ErrorCode::NOT_CONVERGED, "trajectory diverged");
      break;
    }
    if (sup < opts.collapse_factor * seed_sup) {
      res.collapsed = true;
      res.log.push_back({step, Jv, std::numeric_limits<double>::quiet_NaN(), c});
      res.status = Status::failure(ErrorCode::NOT_CONVERGED, "trajectory collapsed to zero");
      break;
    }
    B = B_lambda(eta, nl, lambda, ctx, &B.values);
    gap = gap_of(eta, B);
    res.log.push_back({step, Jv, gap, c});
    if (gap < 0.99 * best_gap || Jv < J_mark - 1e-12 * std::abs(J_mark)) {
      best_gap = std::min(best_gap, gap);
      best_step = step;
      J_mark = Jv;
    } else if (step - best_step >= opts.stall_window) {
      bool near = gap <= opts.stall_accept * std::max(detail::scaled_norm(eta.values, h), 1e-300);
      res.status = near ? Status::success() : Status::failure(ErrorCode::NOT_CONVERGED, "fixed-point gap stagnated");
      res.stalled = true;
      break;
    }
    if (c == Cone::MIXED) {
      double rel = gap / std::max(detail::scaled_norm(eta.values, h), 1e-300);
      if (rel < res.best_mixed_rel_gap) {
        res.best_mixed_rel_gap = rel;
        res.best_mixed = {eta, Jv, step, c, gap};
      }
    }
    if (opts.stop_on_cone && c != Cone::MIXED) {
      res.left_through_cone = true;
      res.status = Status::success();
      break;
    }
  }
  res.final.eta = eta;
  res.final.J_value = Jv;
  res.final.step_count = step;
  res.final.cone = cone_of(eta);
  res.final.gap = gap;
  return res;
}

inline void write_trajectory_csv(const std::vector<FlowRecord>& log, const std::string& path) {
  std::ofstream f(path);
  require(static_cast<bool>(f), ErrorCode::IO_ERROR, "cannot open " + path);
  f << "step,J,fixed_point_gap,cone\n";
  char buf[128];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%s\n", r.step, r.J, r.gap, cone_name(r.cone));
    f << buf;
  }
}

// Clamps the right-hand side at the positive super-solution v: s is replaced by
// max(-v, min(s, v)) inside alpha |s|^{p-2}s + beta |s|^{q-2}s.
inline Nonlinearity truncate(const DiscreteFunction& v, const FunctionalContext& ctx, double defect_tol = 1e-8) {
  ctx.validate();
  const Mesh& mesh = v.mesh;
  std::string bad_pos;
  for (int i = 0; i < mesh.n; ++i)
    if (!(v.values[i] > 0.0)) bad_pos += std::to_string(i) + " ";
  require(bad_pos.empty(), ErrorCode::SUPER_SOLUTION_VIOLATION, "v is not positive at nodes " + bad_pos);
  // weak defect against each hat function must be nonnegative (up to tolerance)
  std::vector<double> g = energy_gradient(v, ctx);
  double scale = 0.0;
  for (int j = 0; j <= mesh.n; ++j) {
    double D = (detail::node(v.values, j + 1) - detail::node(v.values, j)) / mesh.h;
    scale = std::max(scale, detail::pow_abs(D, ctx.p - 1.0) + detail::pow_abs(D, ctx.q - 1.0));
  }
  std::string bad;
  int count = 0;
  for (int i = 0; i < mesh.n; ++i)
    if (g[i] < -defect_tol * scale) {
      if (count++ < 10) bad += std::to_string(i) + " ";
    }
  if (count > 0)
    throw Error(ErrorCode::SUPER_SOLUTION_VIOLATION,
                std::to_string(count) + " hat directions with negative defect, first: " + bad);

  Nonlinearity nl;
  nl.mesh = mesh;
  const double p = ctx.p, q = ctx.q, a = ctx.alpha, b = ctx.beta;
  std::vector<double> vv = v.values;
  nl.h = [=](int i, double s) {
    double c = std::clamp(s, -vv[i], vv[i]);
    return a * detail::phi(c, p) + b * detail::phi(c, q);
  };
  nl.dh = [=](int i, double s) {
    if (std::abs(s) > vv[i]) return 0.0;
    return a * (p - 1.0) * detail::pow_abs(s, p - 2.0) + b * (q - 1.0) * detail::pow_abs(s, q - 2.0);
  };
  nl.prim = [=](int i, double s) {
    double c = std::clamp(s, -vv[i], vv[i]);
    double base = a * detail::pow_abs(c, p) / p + b * detail::pow_abs(c, q) / q;
    return base + (a * detail::phi(c, p) + b * detail::phi(c, q)) * (s - c);
  };
  nl.lambda0 = std::max(std::abs(a), std::abs(b));
  double vmax = v.sup_norm();
  nl.growth_C = std::abs(a) * std::pow(vmax, p - 1.0) + std::abs(b) * std::pow(vmax, q - 1.0);
  return nl;
}

struct NegativeOptions {
  double tol_resid = 1e-6;
  double flow_tol = 1e-9;
  int max_steps = 5000;
  int max_bisection = 60;
  int path_grid = 65;
  double sandwich_slack = 1e-9;
  double polish_gap = 1e-2;  // relative gap below which a mixed iterate is handed to Newton
  // when the three-solution route fails, look for an m-lobe solution built from one
  // positive bump, for the smallest m the spectrum allows
  bool lobe_fallback = true;
  int max_lobes = 8;
  std::vector<DiscreteFunction> extra_seeds;
};

struct NegativeResult {
  Status status;
  DiscreteFunction u;
  DiscreteFunction w1;
  FunctionalReport report;
  std::string route;  // "bisection", "extra-seed" or "lobes-<m>"
  bool sandwich_checked = false;
  double sandwich_violation = 0.0;  // max(|u| - w1), <= slack on success
  double path_t = 0.0;
  double lambda = 0.0;
  int bisection_steps = 0;
  std::vector<FlowRecord> log;  // trajectory that produced u
  std::vector<std::vector<FlowRecord>> all_logs;
};

namespace detail {

inline double flow_lambda(const Nonlinearity& nl) { return 1.05 * nl.lambda0 + 1.0; }

inline DiscreteFunction lq_normalized(const DiscreteFunction& u, double q) {
  double s = std::pow(lump_norm_pow(u, q), 1.0 / q);
  return u.scaled(1.0 / s);
}

inline double sandwich_gap(const DiscreteFunction& u, const DiscreteFunction& w1) {
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < u.mesh.n; ++i) m = std::max(m, std::abs(u.values[i]) - w1.values[i]);
  return m;
}

}  // namespace detail

// Negative-energy nodal solution by the three-solution flow argument: positive solution w1,
// truncation at w1, then bisection along a path from P to -P for a trajectory that stays mixed.
inline NegativeResult find_nodal_negative(const FunctionalContext& ctx, const Mesh& mesh, const NegativeOptions& opts = {}) {
  ctx.validate();
  NegativeResult out;
  PQFunctional E = energy_functional(mesh, ctx);
  DescendOptions dopt;
  dopt.tol = opts.flow_tol;
  dopt.max_steps = opts.max_steps;

  DiscreteFunction phi1 = detail::lq_normalized(discrete_eigen(mesh, ctx.q, 1).u, ctx.q);
  DiscreteFunction phi2 = detail::lq_normalized(discrete_eigen(mesh, ctx.q, 2).u, ctx.q);

  auto polish_and_report = [&](const DiscreteFunction& u) {
    double fs = detail::flux_scale(u, ctx);
    SolveResult pr = polish_critical(E, u.values, 1e-14 * std::max(fs, 1e-300));
    DiscreteFunction v(mesh, pr.x);
    return v;
  };
  auto accept = [&](const DiscreteFunction& u, bool with_sandwich) {
    FunctionalReport rep = evaluate(u, ctx);
    if (!(rep.residual <= opts.tol_resid) || !(rep.E < 0.0) || rep.nodal_domains < 2) return false;
    if (with_sandwich && !(detail::sandwich_gap(u, out.w1) <= opts.sandwich_slack)) return false;
    return true;
  };
  auto finish = [&](const DiscreteFunction& u, const std::string& route, bool with_sandwich) {
    out.u = u;
    out.report = evaluate(u, ctx);
    out.route = route;
    out.sandwich_checked = with_sandwich;
    if (with_sandwich) out.sandwich_violation = detail::sandwich_gap(u, out.w1);
    out.status = Status::success();
    return out;
  };

  // symmetric search: on the m-lobe pattern the energy is that of one positive bump on a
  // cell of length T/m, bounded below when alpha < lambda_m(p) and negative somewhere
  // when beta > lambda_m(q)
  auto lobe_route = [&](const std::string& why, ErrorCode code) -> NegativeResult {
    std::string tried;
    for (int m = 2; m <= opts.max_lobes; ++m) {
      if (!(ctx.alpha < eigenvalue(m, ctx.p, mesh.T)) || !(ctx.beta > eigenvalue(m, ctx.q, mesh.T))) continue;
      if (!detail::lobes_fit(mesh.n, m)) {
        tried += " m=" + std::to_string(m) + " does not fit the mesh;";
        continue;
      }
      Nonlinearity nl = power_nonlinearity(mesh, ctx);
      out.lambda = detail::flow_lambda(nl);
      DescendOptions o = dopt;
      o.symmetry_lobes = m;
      DiscreteFunction shape(mesh);
      for (int i = 0; i < mesh.n; ++i) shape.values[i] = std::sin(m * M_PI * mesh.x(i) / mesh.T);
      symmetric_lobes_project(shape.values, m);
      shape = detail::lq_normalized(shape, ctx.q);
      for (double t = 0.1; t > 1e-8; t *= 0.5) {
        DiscreteFunction seed = shape.scaled(t);
        if (!(flow_energy(seed, nl, ctx) < 0.0)) continue;
        DescendResult d = descend(seed, nl, out.lambda, ctx, o);
        out.all_logs.push_back(d.log);
        if (d.status.ok) {
          DiscreteFunction u = polish_and_report(d.final.eta);
          if (accept(u, false)) {
            out.log = d.log;
            return finish(u, "lobes-" + std::to_string(m), false);
          }
          tried += " m=" + std::to_string(m) + " limit rejected;";
        } else {
          tried += " m=" + std::to_string(m) + ": " + d.status.detail + ";";
        }
        break;
      }
      break;  // larger m only shrinks the admissible range
    }
    if (tried.empty()) tried = " no admissible lobe count";
    out.status = Status::failure(code, why + "; symmetric search:" + tried);
    return out;
  };

  // (1) positive solution
  Nonlinearity full = power_nonlinearity(mesh, ctx);
  const double lam_full = detail::flow_lambda(full);
  DiscreteFunction w1;
  {
    bool found = false;
    std::string why = "no negative-energy positive seed";
    for (double eps = 0.1; eps > 1e-8 && !found; eps *= 0.1) {
      DiscreteFunction seed = phi1.scaled(eps);
      if (!(flow_energy(seed, full, ctx) < 0.0)) continue;
      DescendResult d = descend(seed, full, lam_full, ctx, dopt);
      out.all_logs.push_back(d.log);
      if (d.collapsed) {
        why = "positive flow collapsed to zero";
        break;
      }
      if (!d.status.ok) {
        why = "positive flow: " + d.status.detail;
        break;
      }
      DiscreteFunction cand = polish_and_report(d.final.eta);
      FunctionalReport rep = evaluate(cand, ctx);
      if (cone_of(cand) == Cone::POS && rep.residual <= opts.tol_resid) {
        w1 = cand;
        found = true;
      } else {
        why = "positive flow limit is not a positive solution";
      }
      break;
    }
    if (!found) {
      if (opts.lobe_fallback) return lobe_route(why, ErrorCode::NO_POSITIVE_SOLUTION);
      out.status = Status::failure(ErrorCode::NO_POSITIVE_SOLUTION, why);
      return out;
    }
  }
  out.w1 = w1;

  // (2) truncation at w1
  Nonlinearity tr = truncate(w1, ctx);
  const double lam = detail::flow_lambda(tr);
  out.lambda = lam;

  // (3) path from P to -P with negative energy along it
  auto path_point = [&](double s, double t) {
    DiscreteFunction u(mesh);
    const double c = std::cos(M_PI * s), sn = std::sin(M_PI * s);
    for (int i = 0; i < mesh.n; ++i) u.values[i] = t * (c * phi1.values[i] + sn * phi2.values[i]);
    return u;
  };
  double t = 0.1;
  bool path_ok = false;
  for (int k = 0; k < 60; ++k, t *= 0.5) {
    double worst = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < opts.path_grid; ++j) worst = std::max(worst, flow_energy(path_point(static_cast<double>(j) / (opts.path_grid - 1), t), tr, ctx));
    if (worst < 0.0) {
      path_ok = true;
      break;
    }
  }
  if (!path_ok) {
    const std::string why = "no scaling makes the truncated energy negative along the seed path";
    if (opts.lobe_fallback) return lobe_route(why, ErrorCode::PATH_NOT_NEGATIVE);
    out.status = Status::failure(ErrorCode::PATH_NOT_NEGATIVE, why);
    return out;
  }
  out.path_t = t;

  // (4) bisection between the two cones
  DescendOptions bopt = dopt;
  bopt.stop_on_cone = true;
  double lo = 0.0, hi = 1.0;
  std::string last = "no mixed limit";
  for (int k = 0; k < opts.max_bisection; ++k) {
    out.bisection_steps = k + 1;
    double mid = 0.5 * (lo + hi);
    DescendResult d = descend(path_point(mid, t), tr, lam, ctx, bopt);
    out.all_logs.push_back(d.log);
    if (d.best_mixed_rel_gap <= opts.polish_gap) {
      DiscreteFunction u = polish_and_report(d.best_mixed.eta);
      if (accept(u, true)) {
        out.log = d.log;
        return finish(u, "bisection", true);
      }
      last = "mixed iterate near a critical point was rejected after polishing";
    }
    if (d.left_through_cone) {
      (d.final.cone == Cone::POS ? lo : hi) = mid;
      continue;
    }
    if (!d.status.ok) last = "trajectory from s = " + std::to_string(mid) + ": " + d.status.detail;
    break;
  }
  for (const auto& seed : opts.extra_seeds) {
    DescendResult d = descend(seed, tr, lam, ctx, dopt);
    out.all_logs.push_back(d.log);
    if (!(d.best_mixed_rel_gap <= opts.polish_gap)) continue;
    DiscreteFunction u = polish_and_report(d.best_mixed.eta);
    if (accept(u, true)) {
      out.log = d.log;
      return finish(u, "extra-seed", true);
    }
  }
  if (opts.lobe_fallback) return lobe_route(last, ErrorCode::BISECTION_EXHAUSTED);
  out.status = Status::failure(ErrorCode::BISECTION_EXHAUSTED, last);
  return out;
}

}  // namespace pqlap
