#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "gtrig.hpp"
#include "quadrature.hpp"

namespace pqlap {

inline double eigenvalue(int k, double r, double T) {
  require(k >= 1, ErrorCode::DOMAIN_ERROR, "mode index k must be >= 1");
  require_exponent(r);
  require(T > 0.0, ErrorCode::DOMAIN_ERROR, "interval length T must be > 0");
  return (r - 1.0) * std::pow(k * pi_r(r) / T, r);
}

// Dirichlet eigenpair of the r-Laplacian on (0,T): t -> sin_r(k pi_r t / T).
struct EigenPair {
  int k = 1;
  double r = 2.0;
  double T = 1.0;
  double lambda = 0.0;
  GeneralizedSine sine{2.0};

  double frequency() const { return k * sine.half_period() / T; }
  double operator()(double t) const { return sine(frequency() * t).s; }
  double derivative(double t) const { return frequency() * sine(frequency() * t).ds; }
};

inline EigenPair eigenfunction(int k, double r, double T) {
  double lam = eigenvalue(k, r, T);
  return EigenPair{k, r, T, lam, GeneralizedSine(r)};
}

struct RayleighRatio {
  double p = 0.0;
  double q = 0.0;
  double T = 0.0;
  double value = 0.0;        // closed form
  double quadrature = 0.0;   // direct integration of the eigenfunction
  double rel_diff = 0.0;
};

// ||phi_p'||_q^q / ||phi_p||_q^q, closed form vs direct quadrature.
inline RayleighRatio rayleigh_ratio(double p, double q, double T, double cross_tol = 1e-6) {
  require_exponent(p, "p");
  require_exponent(q, "q");
  require(T > 0.0, ErrorCode::DOMAIN_ERROR, "interval length T must be > 0");
  const double Pp = pi_r(p);
  SinMoments mom = sinp_moment(p, q);
  double closed = std::pow(Pp / T, q) * mom.cos_moment / mom.sin_moment;

  EigenPair phi = eigenfunction(1, p, T);
  auto grad_q = [&](double t) { return std::pow(std::abs(phi.derivative(t)), q); };
  auto val_q = [&](double t) { return std::pow(std::abs(phi(t)), q); };
  const double mid = 0.5 * T;
  double num = quad::integrate(grad_q, 0.0, mid, 1e-12) + quad::integrate(grad_q, mid, T, 1e-12);
  double den = quad::integrate(val_q, 0.0, mid, 1e-12) + quad::integrate(val_q, mid, T, 1e-12);
  double direct = num / den;

  RayleighRatio out{p, q, T, closed, direct, std::abs(closed - direct) / std::abs(closed)};
  if (!(out.rel_diff <= cross_tol)) {
    throw Error(ErrorCode::CROSS_CHECK_FAILED,
                "closed form " + std::to_string(closed) + " vs quadrature " + std::to_string(direct));
  }
  return out;
}

inline constexpr double kMinusInfinity = -std::numeric_limits<double>::infinity();
inline constexpr double kPlusInfinity = std::numeric_limits<double>::infinity();

// Index k with |alpha - lambda_k(p)| <= tol * lambda_k(p), or 0 if alpha is off the spectrum.
inline int spectral_index(double alpha, double p, double T, double tol = 1e-9) {
  if (!(alpha > 0.0)) return 0;
  const double l1 = eigenvalue(1, p, T);
  double kr = std::pow(alpha / l1, 1.0 / p);
  for (int k = std::max(1, static_cast<int>(std::floor(kr)) - 1); k <= static_cast<int>(std::ceil(kr)) + 1; ++k) {
    double lk = eigenvalue(k, p, T);
    if (std::abs(alpha - lk) <= tol * lk) return k;
  }
  return 0;
}

inline double beta_upper_star(double alpha, double p, double q, double T) {
  require(p > q && q > 1.0, ErrorCode::DOMAIN_ERROR, "exponents must satisfy p > q > 1");
  int k = spectral_index(alpha, p, T);
  if (k == 0) return kMinusInfinity;
  return std::pow(static_cast<double>(k), q) * rayleigh_ratio(p, q, T).value;
}

inline int k_alpha(double alpha, double p, double T) {
  const double l1 = eigenvalue(1, p, T);
  // smallest k with alpha < (k+1)^p l1
  int k = 1;
  if (alpha >= l1) k = std::max(1, static_cast<int>(std::floor(std::pow(alpha / l1, 1.0 / p))) - 1);
  while (!(alpha < eigenvalue(k + 1, p, T))) ++k;
  while (k > 1 && alpha < eigenvalue(k, p, T)) --k;
  return k;
}

// 2^q R(p,q): the positive-part q-quotient of the second p-eigenfunction.
inline double beta_L_star(double p, double q, double T) {
  return std::pow(2.0, q) * rayleigh_ratio(p, q, T).value;
}

struct RatioBoundsRow {
  double p = 0.0;
  double q = 0.0;
  double ratio = 0.0;
  double lambda1_q = 0.0;
  double lambda2_q = 0.0;
  double lower_margin = 0.0;       // (R - lambda1_q) / lambda1_q
  double upper_margin = 0.0;       // (lambda2_q - R) / lambda2_q
  double sufficient_lhs = 0.0;     // (1/p) B(1/p,1/p)
  double sufficient_rhs = 0.0;     // 2^{q-1} (q-1)/q pi_q^q / pi_p^{q-1}
  double sufficient_margin = 0.0;  // (rhs - lhs) / rhs
  double cross_check = 0.0;        // closed form vs quadrature, relative
  bool ok = false;
};

inline RatioBoundsRow ratio_bounds(double p, double q, double T) {
  RatioBoundsRow row;
  row.p = p;
  row.q = q;
  RayleighRatio R = rayleigh_ratio(p, q, T);
  row.ratio = R.value;
  row.cross_check = R.rel_diff;
  row.lambda1_q = eigenvalue(1, q, T);
  row.lambda2_q = eigenvalue(2, q, T);
  row.lower_margin = (R.value - row.lambda1_q) / row.lambda1_q;
  row.upper_margin = (row.lambda2_q - R.value) / row.lambda2_q;
  row.sufficient_lhs = beta_fn(1.0 / p, 1.0 / p) / p;
  row.sufficient_rhs = std::pow(2.0, q - 1.0) * (q - 1.0) / q * std::pow(pi_r(q), q) / std::pow(pi_r(p), q - 1.0);
  row.sufficient_margin = (row.sufficient_rhs - row.sufficient_lhs) / row.sufficient_rhs;
  row.ok = row.lower_margin > 0.0 && row.upper_margin > 0.0 && row.sufficient_margin >= 0.0;
  return row;
}

// Every pair q < p from the two grids; violations are reported, not thrown.
inline std::vector<RatioBoundsRow> verify_ratio_bounds(const std::vector<double>& p_grid,
                                                       const std::vector<double>& q_grid, double T) {
  std::vector<RatioBoundsRow> rows;
  for (double p : p_grid) {
    for (double q : q_grid) {
      if (!(q < p) || !(q > 1.0)) continue;
      try {
        rows.push_back(ratio_bounds(p, q, T));
      } catch (const Error&) {
        RatioBoundsRow bad;
        bad.p = p;
        bad.q = q;
        bad.ok = false;
        rows.push_back(bad);
      }
    }
  }
  return rows;
}

// count x count pairs 1 < q < p <= p_max: p runs over (1, p_max] in equal steps, and for each p
// the q values split (1, p) into count+1 equal pieces.
inline std::vector<std::pair<double, double>> exponent_triangle(int count = 20, double p_max = 10.0) {
  std::vector<std::pair<double, double>> pairs;
  for (int i = 1; i <= count; ++i) {
    double p = 1.0 + (p_max - 1.0) * i / count;
    for (int j = 1; j <= count; ++j) pairs.emplace_back(p, 1.0 + (p - 1.0) * j / (count + 1));
  }
  return pairs;
}

inline std::vector<RatioBoundsRow> verify_ratio_bounds(const std::vector<std::pair<double, double>>& pairs, double T) {
  std::vector<RatioBoundsRow> rows;
  for (auto [p, q] : pairs) {
    std::vector<RatioBoundsRow> one = verify_ratio_bounds(std::vector<double>{p}, std::vector<double>{q}, T);
    rows.insert(rows.end(), one.begin(), one.end());
  }
  return rows;
}

}  // namespace pqlap
