#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "discrete.hpp"
#include "discrete_eigen.hpp"
#include "error.hpp"
#include "linalg.hpp"
#include "optim.hpp"
#include "pqfunctional.hpp"
#include "spectral1d.hpp"

namespace pqlap {

enum class CurveStatus { OK, EMPTY_ADMISSIBLE, FAILED };

inline const char* curve_status_name(CurveStatus s) {
  switch (s) {
    case CurveStatus::OK: return "OK";
    case CurveStatus::EMPTY_ADMISSIBLE: return "EMPTY_ADMISSIBLE";
    case CurveStatus::FAILED: return "FAILED";
  }
  return "FAILED";
}

struct CurveSample {
  double alpha = 0.0;
  double value = 0.0;
  CurveStatus status = CurveStatus::FAILED;
  std::string note;
  double cross_check = std::numeric_limits<double>::quiet_NaN();  // independent estimate, where one exists
  DiscreteFunction witness;                                        // optimizer, empty for sentinels
};

struct CurveOptions {
  int n = 200;                     // interior nodes of the working mesh
  double cross_tol = 1e-3;         // relative agreement required between the two beta_L estimates
  double strict_margin = 1e-8;     // strict Rayleigh constraints are tightened by this relative amount
  bool cross_check = true;
  int max_seeds = 20;
};

namespace detail {

using optim::Vec;

// Part Rayleigh quotient with gradient; +inf when the part is empty.
inline double part_quotient(const Mesh& mesh, const Vec& u, double r, Part part, Vec* grad) {
  DiscreteFunction f(mesh, Vec(u.begin(), u.begin() + mesh.n));
  double den = part_lump_norm_pow(f, r, part);
  if (!(den > 0.0)) return std::numeric_limits<double>::infinity();
  double num = part_grad_norm_pow(f, r, part);
  double R = num / den;
  if (grad) {
    Vec gn(mesh.n, 0.0), gd(mesh.n, 0.0);
    add_part_grad_gradient(f, r, part, 1.0, gn);
    add_part_lump_gradient(f, r, part, 1.0, gd);
    for (int i = 0; i < mesh.n; ++i) (*grad)[i] = (gn[i] - R * gd[i]) / den;
  }
  return R;
}

inline double full_quotient(const Mesh& mesh, const Vec& u, double r, Vec* grad) {
  DiscreteFunction f(mesh, Vec(u.begin(), u.begin() + mesh.n));
  double den = lump_norm_pow(f, r);
  if (!(den > 0.0)) return std::numeric_limits<double>::infinity();
  double R = grad_norm_pow(f, r) / den;
  if (grad) {
    PQFunctional F;
    F.mesh = mesh;
    F.grad_terms = {{r, 1.0}};
    F.node_terms = {{r, -R}};
    Vec g = F.gradient(f.values);
    for (int i = 0; i < mesh.n; ++i) (*grad)[i] = r * g[i] / den;
  }
  return R;
}

// inverse of the Dirichlet stiffness matrix on the first n entries; remaining entries untouched
inline optim::Preconditioner stiffness_precond(const Mesh& mesh) {
  Tridiagonal K(mesh.n);
  for (int i = 0; i < mesh.n; ++i) K.diag[i] = 2.0 / mesh.h;
  for (int i = 0; i + 1 < mesh.n; ++i) K.off[i] = -1.0 / mesh.h;
  return [K, n = mesh.n](Vec& v) {
    Vec head(v.begin(), v.begin() + n);
    solve_spd(K, head);
    std::copy(head.begin(), head.end(), v.begin());
  };
}

inline void normalize_head(Vec& x, int n) {
  double m = 0.0;
  for (int i = 0; i < n; ++i) m = std::max(m, std::abs(x[i]));
  if (m > 0.0)
    for (int i = 0; i < n; ++i) x[i] /= m;
}

inline optim::ALOptions curve_al_options(int n) {
  optim::ALOptions o;
  o.max_outer = 30;
  o.inner.max_iter = 3000;
  o.inner.grad_tol = 1e-13;
  o.renormalize = [n](Vec& x) { normalize_head(x, n); };
  return o;
}

inline Vec samples(const Mesh& mesh, const EigenPair& e, double sign = 1.0) {
  Vec v(mesh.n);
  for (int i = 0; i < mesh.n; ++i) v[i] = sign * e(mesh.x(i));
  return v;
}

// linear interpolation of nodal values given on a unit mesh (zero boundary) at y in [0,1]
inline double interp_unit(const Vec& v, double y) {
  const int m = static_cast<int>(v.size());
  double pos = y * (m + 1);
  int k = static_cast<int>(std::floor(pos));
  if (k < 0 || k > m) return 0.0;
  double w = pos - k;
  return (1.0 - w) * node(v, k) + w * node(v, k + 1);
}

}  // namespace detail

// min Rq(v) subject to Rp(v) <= c on a mesh (single-signed v). Returns the value and the
// minimizer through `out`.
inline double constrained_q_quotient(const Mesh& mesh, double p, double q, double c, DiscreteFunction* out = nullptr,
                                     bool* ok = nullptr) {
  using detail::Vec;
  DiscreteEigen eq = discrete_eigen(mesh, q, 1);
  double Rp_q = rayleigh(eq.u, p);
  if (ok) *ok = true;
  if (Rp_q <= c) {
    if (out) *out = eq.u;
    return eq.lambda;
  }
  DiscreteEigen ep = discrete_eigen(mesh, p, 1);
  if (c < ep.lambda * (1.0 - 1e-12)) {
    if (ok) *ok = false;
    return std::numeric_limits<double>::infinity();
  }
  if (c <= ep.lambda * (1.0 + 1e-10)) {
    // the admissible set has shrunk to the p ground state
    if (out) *out = ep.u;
    return rayleigh(ep.u, q);
  }
  const int n = mesh.n;
  const double s = eq.lambda;
  optim::Objective f = [&](const Vec& x, Vec& g) {
    Vec gr(n);
    double R = detail::full_quotient(mesh, x, q, &gr);
    for (int i = 0; i < n; ++i) g[i] = gr[i] / s;
    return R / s;
  };
  optim::Objective con = [&](const Vec& x, Vec& g) {
    Vec gr(n);
    double R = detail::full_quotient(mesh, x, p, &gr);
    for (int i = 0; i < n; ++i) g[i] = gr[i] / c;
    return R / c - 1.0;
  };
  // start from the p ground state, which is feasible
  Vec x0(n);
  for (int i = 0; i < n; ++i) x0[i] = ep.u.values[i];
  optim::ALOptions o = detail::curve_al_options(n);
  optim::ALResult r = optim::augmented_lagrangian(f, {con}, x0, o, detail::stiffness_precond(mesh));
  DiscreteFunction v(mesh, r.x);
  double Rp = rayleigh(v, p);
  // near the degenerate end the outer loop may stall on the objective test while
  // already feasible; feasibility and improvement over the start are what count
  if (ok) *ok = Rp <= c * (1.0 + 1e-9) && rayleigh(v, q) <= rayleigh(ep.u, q);
  if (out) *out = v;
  return rayleigh(v, q);
}

// Free-form estimate of beta_L(alpha) on the working mesh: min Rq(u+) subject to
// Rp(u+) <= alpha and Rp(u-) <= alpha, started from `start`.
inline double beta_L_free(const Mesh& mesh, double p, double q, double alpha, const DiscreteFunction& start,
                          DiscreteFunction* out = nullptr) {
  using detail::Vec;
  const int n = mesh.n;
  const double s = eigenvalue(1, q, mesh.T);
  optim::Objective f = [&](const Vec& x, Vec& g) {
    Vec gr(n);
    double R = detail::part_quotient(mesh, x, q, Part::Plus, &gr);
    for (int i = 0; i < n; ++i) g[i] = gr[i] / s;
    return R / s;
  };
  auto con = [&](Part part) {
    return optim::Objective([&, part](const Vec& x, Vec& g) {
      Vec gr(n);
      double R = detail::part_quotient(mesh, x, p, part, &gr);
      for (int i = 0; i < n; ++i) g[i] = gr[i] / alpha;
      return R / alpha - 1.0;
    });
  };
  optim::ALOptions o = detail::curve_al_options(n);
  // with a softer first penalty the multiplier overshoots, the negative part ends up
  // strictly inside its constraint and the crossing then stays stuck at a node
  o.mu0 = 100.0;
  optim::ALResult r = optim::augmented_lagrangian(f, {con(Part::Plus), con(Part::Minus)}, start.values, o,
                                                  detail::stiffness_precond(mesh));
  DiscreteFunction v(mesh, r.x);
  if (out) *out = v;
  return part_rayleigh(v, q, Part::Plus);
}

namespace detail {

// beta_L by the interval-split ansatz: the negative part is the p ground state on the
// shortest interval with eigenvalue alpha, the positive part minimizes Rq under Rp <= alpha
// on the remaining interval. Both pieces are solved on an n-node mesh of unit length and
// rescaled, so the value is exactly nonincreasing in alpha.
//
// alpha is read relative to the discrete spectrum (multiplied by discrete/continuum ground
// state ratio of the mesh at hand). Near alpha = lambda_2(p) the admissible set is a thin
// neighbourhood of the second eigenfunction and the value reacts like the square root of
// any eigenvalue discretization error; the calibration keeps that endpoint exact.
struct BetaLSetup {
  Mesh unit;
  Mesh mesh;
  DiscreteEigen ground_p_unit;
  double kappa_unit = 1.0;  // discrete / continuum lambda_1(p) on the unit mesh
  double kappa_mesh = 1.0;  // discrete / continuum lambda_2(p) on the working mesh
};

inline BetaLSetup make_beta_L_setup(double p, double T, int n) {
  BetaLSetup s{Mesh(1.0, n), Mesh(T, n), discrete_eigen(Mesh(1.0, n), p, 1)};
  s.kappa_unit = s.ground_p_unit.lambda / eigenvalue(1, p, 1.0);
  s.kappa_mesh = discrete_eigen(s.mesh, p, 2).lambda / eigenvalue(2, p, T);
  return s;
}

inline CurveSample beta_L_point(double alpha, const FunctionalContext& base, double T, const CurveOptions& opts,
                                const BetaLSetup& setup) {
  CurveSample cs;
  cs.alpha = alpha;
  const double p = base.p, q = base.q;
  if (alpha < eigenvalue(2, p, T) * (1.0 - 1e-12)) {
    cs.value = kPlusInfinity;
    cs.status = CurveStatus::EMPTY_ADMISSIBLE;
    cs.note = "alpha below the second p-eigenvalue";
    return cs;
  }
  const double s_star = std::pow(eigenvalue(1, p, 1.0) / alpha, 1.0 / p);
  const double L = T - s_star;
  bool ok = false;
  DiscreteFunction v;
  double val_unit = constrained_q_quotient(setup.unit, p, q, setup.kappa_unit * alpha * std::pow(L, p), &v, &ok);
  cs.value = val_unit / std::pow(L, q);
  if (!ok) {
    cs.status = CurveStatus::FAILED;
    cs.note = "constrained quotient solver did not converge";
    return cs;
  }
  // assemble the ansatz on the working mesh
  const Mesh& mesh = setup.mesh;
  const DiscreteEigen& ep = setup.ground_p_unit;
  double vmax = v.sup_norm();
  DiscreteFunction w = sample(mesh, [&](double t) {
    if (t < L) return interp_unit(v.values, t / L) / vmax;
    return -interp_unit(ep.u.values, (t - L) / (T - L));
  });
  cs.witness = w;
  cs.status = CurveStatus::OK;
  if (opts.cross_check) {
    const double alpha_mesh = setup.kappa_mesh * alpha;
    DiscreteFunction ff;
    double free = beta_L_free(mesh, p, q, alpha_mesh, w, &ff);
    cs.cross_check = free;
    double rel = std::abs(free - cs.value) / cs.value;
    if (!(rel <= opts.cross_tol)) {
      cs.status = CurveStatus::FAILED;
      cs.note = "interval ansatz and free-form estimate differ by " + std::to_string(rel);
    }
    if (part_rayleigh(ff, p, Part::Plus) <= alpha_mesh * (1.0 + 1e-9) &&
        part_rayleigh(ff, p, Part::Minus) <= alpha_mesh * (1.0 + 1e-9) && free < part_rayleigh(w, q, Part::Plus))
      cs.witness = ff;
  }
  return cs;
}

}  // namespace detail

inline std::vector<CurveSample> curve_beta_L(const std::vector<double>& alpha_grid, const FunctionalContext& base, double T,
                                             const CurveOptions& opts = {}) {
  base.validate();
  detail::BetaLSetup setup = detail::make_beta_L_setup(base.p, T, opts.n);
  std::vector<CurveSample> out;
  for (double a : alpha_grid) out.push_back(detail::beta_L_point(a, base, T, opts, setup));
  return out;
}

// beta_L*: the positive-part q quotient of the second p-eigenfunction, 2^q R(p,q) in 1D.
inline double beta_L_star_value(const FunctionalContext& base, double T) { return beta_L_star(base.p, base.q, T); }

// In 1D beta_1* coincides with beta_L*.
inline double beta_1_star_value(const FunctionalContext& base, double T) { return beta_L_star(base.p, base.q, T); }

namespace detail {

inline std::vector<Vec> mode_seeds(const Mesh& mesh, double p, double q, int max_seeds) {
  std::vector<Vec> seeds;
  const double T = mesh.T;
  auto add = [&](const Vec& v) {
    if (static_cast<int>(seeds.size()) < max_seeds) seeds.push_back(v);
  };
  std::vector<Vec> P, Q;
  for (int k = 2; k <= 5; ++k) {
    P.push_back(samples(mesh, eigenfunction(k, p, T)));
    Q.push_back(samples(mesh, eigenfunction(k, q, T)));
  }
  for (std::size_t k = 0; k < P.size(); ++k) {
    add(P[k]);
    add(Q[k]);
  }
  const double mix[] = {0.25, 0.5, 0.75};
  for (std::size_t k = 0; k < 3; ++k)
    for (double w : mix) {
      Vec v(mesh.n);
      for (int i = 0; i < mesh.n; ++i) v[i] = (1.0 - w) * P[k][i] + w * Q[k][i];
      add(v);
    }
  // lopsided two-lobe shapes
  for (double s : {0.35, 0.65, 0.2}) {
    GeneralizedSine sine(p);
    const double Pp = sine.half_period();
    Vec v(mesh.n);
    for (int i = 0; i < mesh.n; ++i) {
      double t = mesh.x(i);
      v[i] = t < s * T ? sine(Pp * t / (s * T)).s : -sine(Pp * (t - s * T) / (T - s * T)).s;
    }
    add(v);
  }
  return seeds;
}

struct EpigraphRun {
  Vec x;
  double value = 0.0;
  bool feasible = false;
};

}  // namespace detail

// beta_1: sup of min{Rq(u+), Rq(u-)} over sign-changing u with Rp(u+-) < alpha.
// An ascending alpha sweep carries the best point forward, so estimates are nondecreasing.
inline std::vector<CurveSample> curve_beta_1(const std::vector<double>& alpha_grid, const FunctionalContext& base, double T,
                                             const CurveOptions& opts = {}) {
  using detail::Vec;
  base.validate();
  const double p = base.p, q = base.q;
  Mesh mesh(T, opts.n);
  const int n = mesh.n;
  std::vector<Vec> seeds = detail::mode_seeds(mesh, p, q, opts.max_seeds);
  std::vector<std::size_t> order(alpha_grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return alpha_grid[a] < alpha_grid[b]; });
  std::vector<CurveSample> out(alpha_grid.size());
  const double s = eigenvalue(2, q, T);
  Vec carry;
  for (std::size_t idx : order) {
    const double alpha = alpha_grid[idx];
    CurveSample& cs = out[idx];
    cs.alpha = alpha;
    if (alpha <= eigenvalue(2, p, T) * (1.0 + 1e-12)) {
      cs.value = kMinusInfinity;
      cs.status = CurveStatus::EMPTY_ADMISSIBLE;
      cs.note = "admissible set empty for alpha <= second p-eigenvalue";
      continue;
    }
    const double cap = alpha * (1.0 - opts.strict_margin);
    auto feasible_value = [&](const Vec& u, double& val) {
      double a = detail::part_quotient(mesh, u, p, Part::Plus, nullptr);
      double b = detail::part_quotient(mesh, u, p, Part::Minus, nullptr);
      if (!(a < alpha * (1.0 - 0.5 * opts.strict_margin)) || !(b < alpha * (1.0 - 0.5 * opts.strict_margin))) return false;
      val = std::min(detail::part_quotient(mesh, u, q, Part::Plus, nullptr), detail::part_quotient(mesh, u, q, Part::Minus, nullptr));
      return std::isfinite(val);
    };
    optim::Objective f = [&](const Vec& x, Vec& g) {
      std::fill(g.begin(), g.end(), 0.0);
      g[n] = -1.0;
      return -x[n];
    };
    auto tau_con = [&](Part part) {
      return optim::Objective([&, part](const Vec& x, Vec& g) {
        Vec gr(n);
        double R = detail::part_quotient(mesh, x, q, part, &gr);
        for (int i = 0; i < n; ++i) g[i] = -gr[i] / s;
        g[n] = 1.0;
        return x[n] - R / s;
      });
    };
    auto p_con = [&](Part part) {
      return optim::Objective([&, part](const Vec& x, Vec& g) {
        Vec gr(n);
        double R = detail::part_quotient(mesh, x, p, part, &gr);
        for (int i = 0; i < n; ++i) g[i] = gr[i] / cap;
        g[n] = 0.0;
        return R / cap - 1.0;
      });
    };
    std::vector<optim::Objective> cons = {tau_con(Part::Plus), tau_con(Part::Minus), p_con(Part::Plus), p_con(Part::Minus)};
    optim::ALOptions o = detail::curve_al_options(n);
    double best = kMinusInfinity;
    Vec best_u;
    std::vector<Vec> starts = seeds;
    if (!carry.empty()) starts.push_back(carry);
    for (const Vec& st : starts) {
      Vec x(st);
      double tq = std::min(detail::part_quotient(mesh, st, q, Part::Plus, nullptr), detail::part_quotient(mesh, st, q, Part::Minus, nullptr));
      if (!std::isfinite(tq)) continue;
      x.push_back(tq / s);
      optim::ALResult r = optim::augmented_lagrangian(f, cons, x, o, detail::stiffness_precond(mesh));
      Vec u(r.x.begin(), r.x.begin() + n);
      double val;
      if (feasible_value(u, val) && val > best) {
        best = val;
        best_u = u;
      }
      if (feasible_value(st, val) && val > best) {
        best = val;
        best_u = st;
      }
    }
    if (best_u.empty()) {
      cs.status = CurveStatus::FAILED;
      cs.note = "no feasible point found";
      cs.value = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    cs.value = best;
    cs.status = CurveStatus::OK;
    cs.witness = DiscreteFunction(mesh, best_u);
    carry = best_u;
  }
  return out;
}

// beta_2: inf of max{Rq(u+), Rq(u-)} over sign-changing u with Rp(u+-) > alpha.
// A descending sweep carries the best point forward, so estimates are nondecreasing in alpha.
inline std::vector<CurveSample> curve_beta_2(const std::vector<double>& alpha_grid, const FunctionalContext& base, double T,
                                             const CurveOptions& opts = {}) {
  using detail::Vec;
  base.validate();
  const double p = base.p, q = base.q;
  Mesh mesh(T, opts.n);
  const int n = mesh.n;
  std::vector<Vec> seeds = detail::mode_seeds(mesh, p, q, opts.max_seeds);
  // discrete second q-eigenfunction, the exact minimizer whenever it is admissible
  seeds.insert(seeds.begin(), discrete_eigen(mesh, q, 2).u.values);
  std::vector<std::size_t> order(alpha_grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return alpha_grid[a] > alpha_grid[b]; });
  std::vector<CurveSample> out(alpha_grid.size());
  const double s = eigenvalue(2, q, T);
  Vec carry;
  for (std::size_t idx : order) {
    const double alpha = alpha_grid[idx];
    CurveSample& cs = out[idx];
    cs.alpha = alpha;
    const double floor_p = std::max(alpha, 0.0) * (1.0 + opts.strict_margin);
    auto feasible_value = [&](const Vec& u, double& val) {
      double a = detail::part_quotient(mesh, u, p, Part::Plus, nullptr);
      double b = detail::part_quotient(mesh, u, p, Part::Minus, nullptr);
      double lim = std::max(alpha, 0.0) * (1.0 + 0.5 * opts.strict_margin);
      if (!std::isfinite(a) || !std::isfinite(b) || !(a > lim) || !(b > lim)) return false;
      val = std::max(detail::part_quotient(mesh, u, q, Part::Plus, nullptr), detail::part_quotient(mesh, u, q, Part::Minus, nullptr));
      return std::isfinite(val);
    };
    optim::Objective f = [&](const Vec& x, Vec& g) {
      std::fill(g.begin(), g.end(), 0.0);
      g[n] = 1.0;
      return x[n];
    };
    auto tau_con = [&](Part part) {
      return optim::Objective([&, part](const Vec& x, Vec& g) {
        Vec gr(n);
        double R = detail::part_quotient(mesh, x, q, part, &gr);
        for (int i = 0; i < n; ++i) g[i] = gr[i] / s;
        g[n] = -1.0;
        return R / s - x[n];
      });
    };
    auto p_con = [&](Part part) {
      return optim::Objective([&, part](const Vec& x, Vec& g) {
        Vec gr(n);
        double R = detail::part_quotient(mesh, x, p, part, &gr);
        double scale = std::max(floor_p, eigenvalue(1, p, T));
        for (int i = 0; i < n; ++i) g[i] = -gr[i] / scale;
        g[n] = 0.0;
        return (floor_p - R) / scale;
      });
    };
    std::vector<optim::Objective> cons = {tau_con(Part::Plus), tau_con(Part::Minus), p_con(Part::Plus), p_con(Part::Minus)};
    optim::ALOptions o = detail::curve_al_options(n);
    double best = kPlusInfinity;
    Vec best_u;
    std::vector<Vec> starts = seeds;
    for (int k = 2; k <= 8; ++k)
      if (eigenvalue(k, p, T) > alpha) starts.push_back(detail::samples(mesh, eigenfunction(k, p, T)));
    if (!carry.empty()) starts.push_back(carry);
    for (const Vec& st : starts) {
      double val;
      if (feasible_value(st, val) && val < best) {
        best = val;
        best_u = st;
      }
      double tq = std::max(detail::part_quotient(mesh, st, q, Part::Plus, nullptr), detail::part_quotient(mesh, st, q, Part::Minus, nullptr));
      if (!std::isfinite(tq)) continue;
      Vec x(st);
      x.push_back(tq / s);
      optim::ALResult r = optim::augmented_lagrangian(f, cons, x, o, detail::stiffness_precond(mesh));
      Vec u(r.x.begin(), r.x.begin() + n);
      if (feasible_value(u, val) && val < best) {
        best = val;
        best_u = u;
      }
    }
    if (best_u.empty()) {
      cs.status = CurveStatus::FAILED;
      cs.note = "no feasible point found";
      cs.value = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    cs.value = best;
    cs.status = CurveStatus::OK;
    cs.witness = DiscreteFunction(mesh, best_u);
    carry = best_u;
  }
  return out;
}

struct KCheck {
  bool empty = true;
  std::string reason;
  double beta_L = kPlusInfinity;
  DiscreteFunction witness;  // set when nonempty
};

// Emptiness of {u sign-changing : H(u+) <= 0, H(u-) <= 0, G(u+) <= 0}. A witness must
// satisfy the three inequalities up to `tol` relative.
inline KCheck check_K_empty(const FunctionalContext& ctx, double T, const CurveOptions& opts = {}, double tol = 1e-3) {
  ctx.validate();
  KCheck k;
  if (ctx.alpha < eigenvalue(2, ctx.p, T)) {
    k.reason = "alpha below the second p-eigenvalue";
    return k;
  }
  std::vector<CurveSample> c = curve_beta_L({ctx.alpha}, ctx, T, opts);
  k.beta_L = c[0].value;
  if (c[0].status != CurveStatus::OK) {
    k.empty = true;
    k.reason = "beta_L unavailable: " + c[0].note;
    return k;
  }
  if (ctx.beta < k.beta_L) {
    k.reason = "beta below beta_L(alpha)";
    return k;
  }
  const DiscreteFunction& w = c[0].witness;
  bool ok = part_rayleigh(w, ctx.p, Part::Plus) <= ctx.alpha * (1.0 + tol) &&
            part_rayleigh(w, ctx.p, Part::Minus) <= ctx.alpha * (1.0 + tol) &&
            part_rayleigh(w, ctx.q, Part::Plus) <= ctx.beta * (1.0 + tol);
  k.empty = !ok;
  k.reason = ok ? "witness from the beta_L minimizer" : "beta_L minimizer fails the witness check";
  if (ok) k.witness = w;
  return k;
}

inline std::string format_value(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_curve_csv(const std::vector<CurveSample>& samples, const std::string& path) {
  std::ofstream f(path);
  require(static_cast<bool>(f), ErrorCode::IO_ERROR, "cannot open " + path);
  f << "alpha,value,status\n";
  for (const auto& s : samples) f << format_value(s.alpha) << ',' << format_value(s.value) << ',' << curve_status_name(s.status) << '\n';
}

}  // namespace pqlap
