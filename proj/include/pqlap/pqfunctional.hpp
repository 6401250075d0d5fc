#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "discrete.hpp"
#include "linalg.hpp"

namespace pqlap {

// Mesh functional of the form
//   sum_t c_t/r_t sum_j |D_j u|^{r_t} h + sum_k d_k/r_k sum_i |u_i|^{r_k} h + sum_i W(i,u_i) h - sum_i f_i u_i h
// where D_j is the forward difference quotient over cell j. Used both for the convex
// inner problems of the flow and for Newton polishing of critical points.
struct PowerTerm {
  double r = 2.0;
  double coef = 1.0;
};

struct NodePotential {
  // (node index, value) -> W, W', W''
  std::function<double(int, double)> value;
  std::function<double(int, double)> deriv;
  std::function<double(int, double)> second;
  explicit operator bool() const { return static_cast<bool>(value); }
};

struct PQFunctional {
  Mesh mesh;
  std::vector<PowerTerm> grad_terms;
  std::vector<PowerTerm> node_terms;
  NodePotential potential;
  std::vector<double> load;  // empty means zero

  double value(const std::vector<double>& u) const {
    const double h = mesh.h;
    double s = 0.0;
    for (int j = 0; j <= mesh.n; ++j) {
      double D = (detail::node(u, j + 1) - detail::node(u, j)) / h;
      for (const auto& t : grad_terms) s += t.coef / t.r * detail::pow_abs(D, t.r) * h;
    }
    for (int i = 0; i < mesh.n; ++i) {
      for (const auto& t : node_terms) s += t.coef / t.r * detail::pow_abs(u[i], t.r) * h;
      if (potential) s += potential.value(i, u[i]) * h;
      if (!load.empty()) s -= load[i] * u[i] * h;
    }
    return s;
  }

  std::vector<double> gradient(const std::vector<double>& u) const {
    const double h = mesh.h;
    const int n = mesh.n;
    std::vector<double> g(n, 0.0);
    for (int j = 0; j <= n; ++j) {
      double D = (detail::node(u, j + 1) - detail::node(u, j)) / h;
      double flux = 0.0;
      for (const auto& t : grad_terms) flux += t.coef * detail::phi(D, t.r);
      if (j >= 1) g[j - 1] -= flux;
      if (j + 1 <= n) g[j] += flux;
    }
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (const auto& t : node_terms) s += t.coef * detail::phi(u[i], t.r);
      if (potential) s += potential.deriv(i, u[i]);
      if (!load.empty()) s -= load[i];
      g[i] += s * h;
    }
    return g;
  }

  // Hessian with |x|^{r-2} replaced by (x^2 + eps^2)^{(r-2)/2}, eps = eps_rel * local scale.
  Tridiagonal hessian(const std::vector<double>& u, double eps_rel = 1e-10) const {
    const double h = mesh.h;
    const int n = mesh.n;
    double dmax = 0.0, umax = 0.0;
    for (int j = 0; j <= n; ++j) dmax = std::max(dmax, std::abs((detail::node(u, j + 1) - detail::node(u, j)) / h));
    for (int i = 0; i < n; ++i) umax = std::max(umax, std::abs(u[i]));
    const double epsD = eps_rel * std::max(dmax, std::numeric_limits<double>::min());
    const double epsU = eps_rel * std::max(umax, std::numeric_limits<double>::min());
    Tridiagonal A(n);
    for (int j = 0; j <= n; ++j) {
      double D = (detail::node(u, j + 1) - detail::node(u, j)) / h;
      double w = 0.0;
      for (const auto& t : grad_terms) w += t.coef * (t.r - 1.0) * detail::reg_pow(D, t.r, epsD) / h;
      if (j >= 1) A.diag[j - 1] += w;
      if (j + 1 <= n) A.diag[j] += w;
      if (j >= 1 && j + 1 <= n) A.off[j - 1] -= w;
    }
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (const auto& t : node_terms) s += t.coef * (t.r - 1.0) * detail::reg_pow(u[i], t.r, epsU);
      if (potential) s += potential.second(i, u[i]);
      A.diag[i] += s * h;
    }
    return A;
  }
};

struct SolveResult {
  std::vector<double> x;
  int iterations = 0;
  bool converged = false;
  double grad_norm = 0.0;  // max-norm of the gradient at x
};

inline double max_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Damped Newton for a strictly convex functional, with a Barzilai-Borwein gradient
// fallback whenever the Newton direction is unusable.
inline SolveResult minimize_convex(const PQFunctional& F, std::vector<double> x, double grad_tol, int max_iter = 500) {
  SolveResult res;
  const int n = F.mesh.n;
  std::vector<double> g = F.gradient(x);
  double fx = F.value(x);
  std::vector<double> prev_x, prev_g;
  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it;
    double gn = max_norm(g);
    if (gn <= grad_tol) {
      res.converged = true;
      break;
    }
    std::vector<double> d(n);
    bool newton = true;
    {
      Tridiagonal H = F.hessian(x);
      std::vector<double> rhs(n);
      for (int i = 0; i < n; ++i) rhs[i] = -g[i];
      if (solve_spd(H, rhs) && dot(rhs, g) < 0.0) {
        d = rhs;
      } else {
        newton = false;
      }
    }
    if (!newton) {
      double sigma = 1.0;
      if (!prev_x.empty()) {
        std::vector<double> s(n), y(n);
        for (int i = 0; i < n; ++i) {
          s[i] = x[i] - prev_x[i];
          y[i] = g[i] - prev_g[i];
        }
        double sy = dot(s, y);
        if (sy > 0.0) sigma = dot(s, s) / sy;
      } else {
        sigma = 1.0 / std::max(gn, 1e-300) * std::max(max_norm(x), 1e-3);
      }
      for (int i = 0; i < n; ++i) d[i] = -sigma * g[i];
    }
    const double slope = dot(g, d);
    double t = 1.0;
    std::vector<double> xt(n), gt;
    double ft = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (int i = 0; i < n; ++i) xt[i] = x[i] + t * d[i];
      ft = F.value(xt);
      if (ft <= fx + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      // near the optimum the energy change drowns in rounding; fall back to the gradient norm
      if (ft <= fx + 1e-13 * std::abs(fx)) {
        gt = F.gradient(xt);
        if (max_norm(gt) < gn) {
          accepted = true;
          break;
        }
        gt.clear();
      }
      t *= 0.5;
    }
    if (!accepted) break;
    prev_x = x;
    prev_g = g;
    x = xt;
    fx = ft;
    g = gt.empty() ? F.gradient(x) : gt;
  }
  res.grad_norm = max_norm(g);
  if (res.grad_norm <= grad_tol) res.converged = true;
  res.x = std::move(x);
  return res;
}

// Newton iteration on grad F = 0 for a possibly indefinite functional, damped on the
// gradient norm. Converges to the critical point nearest to the start.
inline SolveResult polish_critical(const PQFunctional& F, std::vector<double> x, double grad_tol, int max_iter = 100) {
  SolveResult res;
  const int n = F.mesh.n;
  std::vector<double> g = F.gradient(x);
  double gn = euclid_norm(g);
  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it;
    if (max_norm(g) <= grad_tol) {
      res.converged = true;
      break;
    }
    Tridiagonal H = F.hessian(x);
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) d[i] = -g[i];
    if (!solve_general(H, d)) break;
    double t = 1.0;
    bool accepted = false;
    std::vector<double> xt(n), gt;
    for (int ls = 0; ls < 40; ++ls) {
      for (int i = 0; i < n; ++i) xt[i] = x[i] + t * d[i];
      gt = F.gradient(xt);
      double gtn = euclid_norm(gt);
      if (gtn < (1.0 - 1e-4 * t) * gn) {
        accepted = true;
        gn = gtn;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    x = xt;
    g = gt;
  }
  res.grad_norm = max_norm(g);
  if (res.grad_norm <= grad_tol) res.converged = true;
  res.x = std::move(x);
  return res;
}

// The energy E of a context as a PQFunctional.
inline PQFunctional energy_functional(const Mesh& mesh, const FunctionalContext& ctx) {
  PQFunctional F;
  F.mesh = mesh;
  F.grad_terms = {{ctx.p, 1.0}, {ctx.q, 1.0}};
  F.node_terms = {{ctx.p, -ctx.alpha}, {ctx.q, -ctx.beta}};
  return F;
}

}  // namespace pqlap
