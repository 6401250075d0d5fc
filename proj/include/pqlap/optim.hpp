#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <vector>

namespace pqlap::optim {

using Vec = std::vector<double>;
// value and gradient at x
using Objective = std::function<double(const Vec& x, Vec& grad)>;
// in-place application of an approximate inverse Hessian (SPD)
using Preconditioner = std::function<void(Vec& v)>;

struct LbfgsOptions {
  int max_iter = 2000;
  int memory = 12;
  double grad_tol = 1e-12;   // on sqrt(g . M g)
  double f_rel_tol = 1e-15;  // stop after 5 consecutive steps below this relative decrease
};

struct LbfgsResult {
  Vec x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {
inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
}  // namespace detail

// Limited-memory BFGS with an optional preconditioner as initial inverse Hessian and
// Armijo backtracking.
inline LbfgsResult lbfgs(const Objective& fn, Vec x, const LbfgsOptions& opts = {}, const Preconditioner& precond = {}) {
  using detail::dot;
  const std::size_t n = x.size();
  LbfgsResult res;
  Vec g(n);
  double f = fn(x, g);
  std::deque<Vec> S, Y;
  std::deque<double> rho;
  int small_steps = 0;
  double gamma = 1.0;
  for (int it = 0; it < opts.max_iter; ++it) {
    res.iterations = it;
    // two-loop recursion
    Vec d = g;
    std::vector<double> a(S.size());
    for (int k = static_cast<int>(S.size()) - 1; k >= 0; --k) {
      a[k] = rho[k] * dot(S[k], d);
      for (std::size_t i = 0; i < n; ++i) d[i] -= a[k] * Y[k][i];
    }
    if (precond) precond(d);
    for (double& v : d) v *= gamma;
    for (std::size_t k = 0; k < S.size(); ++k) {
      double b = rho[k] * dot(Y[k], d);
      for (std::size_t i = 0; i < n; ++i) d[i] += (a[k] - b) * S[k][i];
    }
    for (double& v : d) v = -v;
    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      // lost descent; restart from the preconditioned gradient
      S.clear();
      Y.clear();
      rho.clear();
      d = g;
      if (precond) precond(d);
      for (double& v : d) v = -v;
      slope = dot(g, d);
      if (!(slope < 0.0)) break;
    }
    if (std::sqrt(-slope) <= opts.grad_tol && S.empty()) {
      res.converged = true;
      break;
    }
    double t = 1.0;
    if (S.empty() && it == 0) {
      double dn = std::sqrt(dot(d, d)), xn = std::sqrt(dot(x, x));
      if (dn > 0.0) t = std::min(1.0, 0.1 * std::max(xn, 1.0) / dn);
    }
    Vec xt(n), gt(n);
    double ft = f;
    bool ok = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) xt[i] = x[i] + t * d[i];
      ft = fn(xt, gt);
      if (std::isfinite(ft) && ft <= f + 1e-4 * t * slope) {
        ok = true;
        break;
      }
      t *= 0.5;
    }
    if (!ok) {
      if (!S.empty()) {
        S.clear();
        Y.clear();
        rho.clear();
        continue;
      }
      res.converged = std::sqrt(-slope) <= 1e3 * opts.grad_tol;
      break;
    }
    Vec s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = xt[i] - x[i];
      y[i] = gt[i] - g[i];
    }
    double sy = dot(s, y);
    if (sy > 1e-300) {
      Vec My = y;
      if (precond) precond(My);
      double yMy = dot(y, My);
      if (yMy > 0.0) gamma = sy / yMy;
      S.push_back(std::move(s));
      Y.push_back(std::move(y));
      rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > opts.memory) {
        S.pop_front();
        Y.pop_front();
        rho.pop_front();
      }
    }
    double decrease = f - ft;
    x.swap(xt);
    g.swap(gt);
    f = ft;
    if (decrease <= opts.f_rel_tol * std::max(std::abs(f), 1e-300)) {
      if (++small_steps >= 5) {
        res.converged = true;
        break;
      }
    } else {
      small_steps = 0;
    }
  }
  res.x = std::move(x);
  res.f = f;
  return res;
}

struct ALOptions {
  int max_outer = 40;
  double mu0 = 10.0;
  double mu_max = 1e10;
  double feas_tol = 1e-11;  // on the constraint values, which callers normalize to O(1)
  LbfgsOptions inner{};
  // called between outer iterations, e.g. to renormalize a scale-invariant variable
  std::function<void(Vec& x)> renormalize;
};

struct ALResult {
  Vec x;
  double f = 0.0;
  double max_violation = 0.0;
  int outer = 0;
  bool converged = false;
};

// Augmented Lagrangian (Powell-Hestenes-Rockafellar) for min f s.t. c_i(x) <= 0.
inline ALResult augmented_lagrangian(const Objective& f, const std::vector<Objective>& cons, Vec x,
                                     const ALOptions& opts = {}, const Preconditioner& precond = {}) {
  const std::size_t m = cons.size();
  std::vector<double> lam(m, 0.0);
  double mu = opts.mu0;
  ALResult res;
  double prev_viol = std::numeric_limits<double>::infinity();
  double prev_f = std::numeric_limits<double>::infinity();
  auto violation = [&](const Vec& xx, std::vector<double>& cv) {
    Vec tmp(xx.size());
    double v = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      cv[i] = cons[i](xx, tmp);
      v = std::max(v, cv[i]);
    }
    return v;
  };
  std::vector<double> cv(m);
  for (int outer = 0; outer < opts.max_outer; ++outer) {
    res.outer = outer + 1;
    Objective L = [&](const Vec& xx, Vec& g) {
      double val = f(xx, g);
      Vec gc(xx.size());
      for (std::size_t i = 0; i < m; ++i) {
        double c = cons[i](xx, gc);
        double sh = lam[i] + mu * c;
        if (sh > 0.0) {
          val += (sh * sh - lam[i] * lam[i]) / (2.0 * mu);
          for (std::size_t k = 0; k < xx.size(); ++k) g[k] += sh * gc[k];
        } else {
          val -= lam[i] * lam[i] / (2.0 * mu);
        }
      }
      return val;
    };
    LbfgsResult in = lbfgs(L, x, opts.inner, precond);
    x = in.x;
    if (opts.renormalize) opts.renormalize(x);
    double viol = violation(x, cv);
    for (std::size_t i = 0; i < m; ++i) lam[i] = std::max(0.0, lam[i] + mu * cv[i]);
    Vec tmp(x.size());
    double fx = f(x, tmp);
    bool f_settled = std::abs(fx - prev_f) <= 1e-12 * std::max(std::abs(fx), 1.0);
    if (viol <= opts.feas_tol && f_settled) {
      res.converged = true;
      res.f = fx;
      res.max_violation = viol;
      break;
    }
    if (viol > 0.25 * prev_viol) mu = std::min(mu * 10.0, opts.mu_max);
    prev_viol = std::max(viol, 0.0);
    prev_f = fx;
    res.f = fx;
    res.max_violation = viol;
  }
  res.x = std::move(x);
  return res;
}

}  // namespace pqlap::optim
