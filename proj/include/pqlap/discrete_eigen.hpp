#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "discrete.hpp"
#include "error.hpp"
#include "pqfunctional.hpp"
#include "spectral1d.hpp"

namespace pqlap {

struct DiscreteEigen {
  double lambda = 0.0;
  DiscreteFunction u;  // positive where the first lobe is, normalized to sup-norm 1
  int iterations = 0;
};

namespace detail {

inline double lump_norm(const std::vector<double>& v, double r, double h) {
  double s = 0.0;
  for (double x : v) s += pow_abs(x, r);
  return std::pow(s * h, 1.0 / r);
}

}  // namespace detail

// Exact solve of the discrete problem -Delta_r w = f with zero boundary values. In 1D the
// cell fluxes are a constant minus the running sum of the load, so only that constant is
// unknown; it is fixed by requiring the differences to sum to zero.
inline std::vector<double> solve_r_laplacian(const Mesh& mesh, double r, const std::vector<double>& f) {
  const int n = mesh.n;
  const double h = mesh.h;
  std::vector<double> S(n + 1, 0.0);  // S[j] = sum_{i<j} f_i h
  for (int j = 1; j <= n; ++j) S[j] = S[j - 1] + f[j - 1] * h;
  const double e = 1.0 / (r - 1.0);
  auto slopes = [&](double C, std::vector<double>* D) {
    double sum = 0.0;
    for (int j = 0; j <= n; ++j) {
      double fl = C - S[j];
      double d = std::copysign(std::pow(std::abs(fl), e), fl);
      if (D) (*D)[j] = d;
      sum += d;
    }
    return sum;
  };
  double lo = *std::min_element(S.begin(), S.end());
  double hi = *std::max_element(S.begin(), S.end());
  std::vector<double> w(n, 0.0);
  if (lo == hi) return w;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (slopes(mid, nullptr) < 0.0 ? lo : hi) = mid;
  }
  std::vector<double> D(n + 1);
  slopes(0.5 * (lo + hi), &D);
  // integrate from both ends and blend, which spreads the leftover closure error evenly
  std::vector<double> left(n), right(n);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) left[i] = acc += D[i] * h;
  acc = 0.0;
  for (int i = n - 1; i >= 0; --i) right[i] = acc -= D[i + 1] * h;
  for (int i = 0; i < n; ++i) {
    double wt = static_cast<double>(i + 1) / (n + 1);
    w[i] = (1.0 - wt) * left[i] + wt * right[i];
  }
  return w;
}

// First (k = 1) or second (k = 2) Dirichlet eigenpair of the discrete r-Laplacian,
// by nonlinear inverse iteration. Mode 2 is found inside the odd-about-T/2 subspace,
// where it is the ground state.
inline DiscreteEigen discrete_eigen(const Mesh& mesh, double r, int k = 1, double tol = 1e-13, int max_iter = 400) {
  require_exponent(r);
  require(k == 1 || k == 2, ErrorCode::DOMAIN_ERROR, "discrete eigenpairs are available for k = 1, 2");
  const int n = mesh.n;
  const double h = mesh.h;
  EigenPair cont = eigenfunction(k, r, mesh.T);
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i) u[i] = cont(mesh.x(i));
  auto symmetrize = [&](std::vector<double>& v) {
    if (k != 2) return;
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = 0.5 * (v[i] - v[n - 1 - i]);
    v = w;
  };
  symmetrize(u);
  double nu = detail::lump_norm(u, r, h);
  for (double& x : u) x /= nu;
  double lam = rayleigh(DiscreteFunction(mesh, u), r);

  DiscreteEigen out;
  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it + 1;
    std::vector<double> load(n);
    for (int i = 0; i < n; ++i) load[i] = detail::phi(u[i], r);
    std::vector<double> w = solve_r_laplacian(mesh, r, load);
    symmetrize(w);
    double nw = detail::lump_norm(w, r, h);
    require(nw > 0.0, ErrorCode::NOT_CONVERGED, "inverse iteration collapsed");
    for (double& x : w) x /= nw;
    double lam_new = rayleigh(DiscreteFunction(mesh, w), r);
    double change = 0.0;
    for (int i = 0; i < n; ++i) change = std::max(change, std::abs(w[i] - u[i]));
    u = w;
    bool done = std::abs(lam_new - lam) <= tol * lam_new && change <= 1e-11;
    lam = lam_new;
    if (done) break;
  }
  // sign convention: first lobe positive
  double first = 0.0;
  for (double x : u) {
    if (std::abs(x) > 1e-3 * max_norm(u)) {
      first = x;
      break;
    }
  }
  if (first < 0.0)
    for (double& x : u) x = -x;
  double s = max_norm(u);
  for (double& x : u) x /= s;
  out.lambda = lam;
  out.u = DiscreteFunction(mesh, u);
  return out;
}

}  // namespace pqlap
