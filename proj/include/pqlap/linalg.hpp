#pragma once

#include <vector>

extern "C" {
void dptsv_(const int* n, const int* nrhs, double* d, double* e, double* b, const int* ldb, int* info);
void dgtsv_(const int* n, const int* nrhs, double* dl, double* d, double* du, double* b, const int* ldb, int* info);
}

namespace pqlap {

// Symmetric tridiagonal matrix: diag[0..n-1], off[0..n-2].
struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> off;

  explicit Tridiagonal(int n = 0) : diag(n, 0.0), off(n > 0 ? n - 1 : 0, 0.0) {}
  int size() const { return static_cast<int>(diag.size()); }

  std::vector<double> apply(const std::vector<double>& x) const {
    const int n = size();
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) {
      double s = diag[i] * x[i];
      if (i > 0) s += off[i - 1] * x[i - 1];
      if (i + 1 < n) s += off[i] * x[i + 1];
      y[i] = s;
    }
    return y;
  }
};

// Solves A x = b for symmetric positive definite A; returns false if A is not SPD.
inline bool solve_spd(const Tridiagonal& A, std::vector<double>& b) {
  int n = A.size(), nrhs = 1, info = 0;
  std::vector<double> d = A.diag, e = A.off;
  dptsv_(&n, &nrhs, d.data(), e.data(), b.data(), &n, &info);
  return info == 0;
}

// Solves A x = b for a general symmetric tridiagonal A with partial pivoting.
inline bool solve_general(const Tridiagonal& A, std::vector<double>& b) {
  int n = A.size(), nrhs = 1, info = 0;
  std::vector<double> dl = A.off, d = A.diag, du = A.off;
  dgtsv_(&n, &nrhs, dl.data(), d.data(), du.data(), b.data(), &n, &info);
  return info == 0;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace pqlap
