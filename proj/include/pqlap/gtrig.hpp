#pragma once

#include <cmath>
#include <numbers>
#include <utility>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/tools/roots.hpp>

#include "error.hpp"

namespace pqlap {

inline double pi_r(double r) {
  require_exponent(r);
  return 2.0 * std::numbers::pi / (r * std::sin(std::numbers::pi / r));
}

struct GTrigValue {
  double t = 0.0;
  double s = 0.0;   // sin_r(t)
  double ds = 0.0;  // sin_r'(t)
};

// Generalized sine for a fixed exponent. The quarter-period inverse is split at
// c = 2^{-1/r}: below c the defining integral is expanded directly, above c the
// substitution 1 - s^r = w^{r/(r-1)} turns the tail into a bounded integrand.
class GeneralizedSine {
 public:
  explicit GeneralizedSine(double r) : r_(r) {
    require_exponent(r);
    half_period_ = pi_r(r);
    m_ = r / (r - 1.0);
    c_ = std::pow(0.5, 1.0 / r);
    wc_ = std::pow(0.5, 1.0 / m_);
    Fc_ = 0.5 * half_period_ - tail(wc_);
  }

  double r() const { return r_; }
  double half_period() const { return half_period_; }

  // F(x) = int_0^x (1 - s^r)^{-1/r} ds for x in [0,1].
  double F(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 0.5 * half_period_;
    if (x <= c_) return head(x);
    return 0.5 * half_period_ - tail(std::pow(1.0 - std::pow(x, r_), 1.0 / m_));
  }

  GTrigValue operator()(double t) const {
    const double P = half_period_;
    double tau = std::fmod(t, 2.0 * P);
    if (tau < 0.0) tau += 2.0 * P;
    double s, c;
    if (tau <= 0.5 * P) {
      quarter(tau, s, c);
    } else if (tau <= P) {
      quarter(P - tau, s, c);
      c = -c;
    } else if (tau <= 1.5 * P) {
      quarter(tau - P, s, c);
      s = -s;
      c = -c;
    } else {
      quarter(2.0 * P - tau, s, c);
      s = -s;
    }
    return {t, s, c};
  }

 private:
  double integrand_head(double s) const { return std::pow(1.0 - std::pow(s, r_), -1.0 / r_); }
  double integrand_tail(double w) const {
    return std::pow(1.0 - std::pow(w, m_), (1.0 - r_) / r_) / (r_ - 1.0);
  }
  // Binomial series of the two integrals; both converge geometrically since the
  // series variable stays in [0, 1/2] on the respective branch.
  static double binomial_series(double z, double a, double step, double x) {
    double coef = 1.0;
    double zk = 1.0;
    double sum = 0.0;
    for (int k = 0; k < 400; ++k) {
      double term = coef * zk / (k * step + 1.0);
      sum += term;
      if (term < 1e-17 * sum) break;
      coef *= (k + a) / (k + 1.0);
      zk *= z;
    }
    return sum * x;
  }
  double head(double x) const { return binomial_series(std::pow(x, r_), 1.0 / r_, r_, x); }
  double tail(double w) const {
    if (w <= 0.0) return 0.0;
    return binomial_series(std::pow(w, m_), (r_ - 1.0) / r_, m_, w) / (r_ - 1.0);
  }

  // Inverse of F on [0, P/2]; returns s = sin_r(y) and c = cos_r(y) >= 0.
  void quarter(double y, double& s, double& c) const {
    using boost::math::tools::newton_raphson_iterate;
    const int digits = 48;
    boost::uintmax_t iters = 100;
    if (y <= 0.0) {
      s = 0.0;
      c = 1.0;
      return;
    }
    if (y >= 0.5 * half_period_) {
      s = 1.0;
      c = 0.0;
      return;
    }
    if (y <= Fc_) {
      auto fn = [&](double x) { return std::make_pair(head(x) - y, integrand_head(x)); };
      s = newton_raphson_iterate(fn, std::min(y, c_), 0.0, c_, digits, iters);
      c = std::pow(1.0 - std::pow(s, r_), 1.0 / r_);
      return;
    }
    const double target = 0.5 * half_period_ - y;
    auto fn = [&](double w) { return std::make_pair(tail(w) - target, integrand_tail(w)); };
    double w = newton_raphson_iterate(fn, std::min((r_ - 1.0) * target, wc_), 0.0, wc_, digits, iters);
    s = std::pow(1.0 - std::pow(w, m_), 1.0 / r_);
    c = std::pow(w, 1.0 / (r_ - 1.0));
  }

  double r_;
  double half_period_;
  double m_;
  double c_;
  double wc_;
  double Fc_;
};

inline GTrigValue sin_r(double r, double t) { return GeneralizedSine(r)(t); }

inline double beta_fn(double x, double y) {
  if (!(x > 0.0) || !(y > 0.0)) throw Error(ErrorCode::DOMAIN_ERROR, "beta_fn requires x > 0 and y > 0");
  return boost::math::beta(x, y);
}

struct SinMoments {
  double sin_moment = 0.0;  // int_0^{pi_p/2} sin_p^q
  double cos_moment = 0.0;  // int_0^{pi_p/2} cos_p^q
};

inline SinMoments sinp_moment(double p, double q) {
  require_exponent(p, "p");
  require_exponent(q, "q");
  return {beta_fn((q + 1.0) / p, (p - 1.0) / p) / p, beta_fn(1.0 / p, 1.0 + (q - 1.0) / p) / p};
}

}  // namespace pqlap
