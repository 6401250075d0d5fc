#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace pqlap::quad {

// Adaptive 31-point Gauss-Kronrod on [a,b]; tol is relative to the L1 norm of f.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-13, unsigned max_depth = 18,
                 double* error = nullptr) {
  if (a == b) return 0.0;
  double err = 0.0;
  double l1 = 0.0;
  double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, max_depth, rel_tol, &err, &l1);
  if (error) *error = err;
  return v;
}

}  // namespace pqlap::quad
