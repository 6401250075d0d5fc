#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "error.hpp"

namespace pqlap {

struct Mesh {
  double T = 1.0;
  int n = 3;
  double h = 0.25;

  Mesh() = default;
  Mesh(double T_, int n_) : T(T_), n(n_), h(T_ / (n_ + 1)) {
    require(T_ > 0.0, ErrorCode::DOMAIN_ERROR, "mesh length T must be > 0");
    require(n_ >= 3, ErrorCode::DOMAIN_ERROR, "mesh needs n >= 3 interior nodes");
  }
  // position of interior node i (0-based), i.e. x_{i+1}
  double x(int i) const { return (i + 1) * h; }
};

// Nodal values on the interior nodes of a uniform mesh; boundary values are zero.
struct DiscreteFunction {
  Mesh mesh;
  std::vector<double> values;

  DiscreteFunction() = default;
  explicit DiscreteFunction(const Mesh& m) : mesh(m), values(m.n, 0.0) {}
  DiscreteFunction(const Mesh& m, std::vector<double> v) : mesh(m), values(std::move(v)) {
    require(static_cast<int>(values.size()) == m.n, ErrorCode::DOMAIN_ERROR, "value count must equal mesh.n");
  }

  int size() const { return mesh.n; }
  double operator[](int i) const { return values[i]; }
  double& operator[](int i) { return values[i]; }

  DiscreteFunction plus() const {
    DiscreteFunction out(mesh);
    for (int i = 0; i < mesh.n; ++i) out.values[i] = std::max(values[i], 0.0);
    return out;
  }
  DiscreteFunction minus() const {
    DiscreteFunction out(mesh);
    for (int i = 0; i < mesh.n; ++i) out.values[i] = std::max(-values[i], 0.0);
    return out;
  }
  double sup_norm() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
  DiscreteFunction scaled(double t) const {
    DiscreteFunction out(mesh, values);
    for (double& v : out.values) v *= t;
    return out;
  }
};

template <class F>
DiscreteFunction sample(const Mesh& mesh, F&& f) {
  DiscreteFunction u(mesh);
  for (int i = 0; i < mesh.n; ++i) u.values[i] = f(mesh.x(i));
  return u;
}

namespace detail {

inline double pow_abs(double x, double r) { return std::pow(std::abs(x), r); }
// |x|^{r-2} x
inline double phi(double x, double r) { return x == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(x), r - 1.0), x); }
// regularized |x|^{r-2}
inline double reg_pow(double x, double r, double eps) { return std::pow(x * x + eps * eps, 0.5 * (r - 2.0)); }

// value at node k of the extended vector (k = 0 and k = n+1 are boundary nodes)
inline double node(const std::vector<double>& v, int k) {
  return (k <= 0 || k > static_cast<int>(v.size())) ? 0.0 : v[k - 1];
}

}  // namespace detail

inline double grad_norm_pow(const DiscreteFunction& u, double r) {
  const auto& v = u.values;
  const double h = u.mesh.h;
  double s = 0.0;
  for (int j = 0; j <= u.mesh.n; ++j) s += detail::pow_abs((detail::node(v, j + 1) - detail::node(v, j)) / h, r);
  return s * h;
}

inline double lump_norm_pow(const DiscreteFunction& u, double r) {
  double s = 0.0;
  for (double x : u.values) s += detail::pow_abs(x, r);
  return s * u.mesh.h;
}

enum class Part { Plus, Minus };

// Sign parts are read through the piecewise-linear interpolant: on a cell where the
// function changes sign, each part keeps the portion of the cell on its side of the
// crossing. Gradient terms of the two parts then add up exactly to the whole.
namespace detail {

inline double part_cell(double a, double b, double h, double r) {
  if (a >= 0.0 && b >= 0.0) return pow_abs((b - a) / h, r) * h;
  if (a > 0.0 && b < 0.0) return std::pow((a - b) / h, r - 1.0) * a;
  if (b > 0.0 && a < 0.0) return std::pow((b - a) / h, r - 1.0) * b;
  return 0.0;
}

// partial derivatives of part_cell with respect to a and b
inline void part_cell_grad(double a, double b, double h, double r, double& da, double& db) {
  if (a >= 0.0 && b >= 0.0) {
    double d = phi((b - a) / h, r);
    da = -r * d;
    db = r * d;
  } else if (a > 0.0 && b < 0.0) {
    double D = (a - b) / h;
    double c = (r - 1.0) * std::pow(D, r - 2.0) * a / h;
    da = c + std::pow(D, r - 1.0);
    db = -c;
  } else if (b > 0.0 && a < 0.0) {
    double D = (b - a) / h;
    double c = (r - 1.0) * std::pow(D, r - 2.0) * b / h;
    db = c + std::pow(D, r - 1.0);
    da = -c;
  } else {
    da = 0.0;
    db = 0.0;
  }
}

}  // namespace detail

inline double part_grad_norm_pow(const DiscreteFunction& u, double r, Part part) {
  const auto& v = u.values;
  const double h = u.mesh.h;
  const double sg = part == Part::Plus ? 1.0 : -1.0;
  double s = 0.0;
  for (int j = 0; j <= u.mesh.n; ++j) s += detail::part_cell(sg * detail::node(v, j), sg * detail::node(v, j + 1), h, r);
  return s;
}

inline double part_lump_norm_pow(const DiscreteFunction& u, double r, Part part) {
  const double sg = part == Part::Plus ? 1.0 : -1.0;
  double s = 0.0;
  for (double x : u.values) s += std::pow(std::max(sg * x, 0.0), r);
  return s * u.mesh.h;
}

// g += coef * d/du part_grad_norm_pow(u, r, part)
inline void add_part_grad_gradient(const DiscreteFunction& u, double r, Part part, double coef, std::vector<double>& g) {
  const auto& v = u.values;
  const int n = u.mesh.n;
  const double h = u.mesh.h;
  const double sg = part == Part::Plus ? 1.0 : -1.0;
  for (int j = 0; j <= n; ++j) {
    double da, db;
    detail::part_cell_grad(sg * detail::node(v, j), sg * detail::node(v, j + 1), h, r, da, db);
    if (j >= 1) g[j - 1] += coef * sg * da;
    if (j + 1 <= n) g[j] += coef * sg * db;
  }
}

// g += coef * d/du part_lump_norm_pow(u, r, part)
inline void add_part_lump_gradient(const DiscreteFunction& u, double r, Part part, double coef, std::vector<double>& g) {
  const double sg = part == Part::Plus ? 1.0 : -1.0;
  const double h = u.mesh.h;
  for (int i = 0; i < u.mesh.n; ++i) {
    double y = sg * u.values[i];
    if (y > 0.0) g[i] += coef * sg * r * std::pow(y, r - 1.0) * h;
  }
}

struct FunctionalContext {
  double p = 3.0;
  double q = 2.0;
  double alpha = 0.0;
  double beta = 0.0;

  void validate() const {
    require(q > 1.0 && p > q, ErrorCode::DOMAIN_ERROR, "exponents must satisfy 1 < q < p");
  }
};

struct FunctionalReport {
  double H = 0.0;
  double G = 0.0;
  double E = 0.0;
  double residual = 0.0;
  int nodal_domains = 0;
};

inline std::vector<double> energy_gradient(const DiscreteFunction& u, const FunctionalContext& ctx) {
  const auto& v = u.values;
  const int n = u.mesh.n;
  const double h = u.mesh.h;
  std::vector<double> g(n, 0.0);
  for (int j = 0; j <= n; ++j) {
    double D = (detail::node(v, j + 1) - detail::node(v, j)) / h;
    double flux = detail::phi(D, ctx.p) + detail::phi(D, ctx.q);
    if (j >= 1) g[j - 1] -= flux;
    if (j + 1 <= n) g[j] += flux;
  }
  for (int i = 0; i < n; ++i) g[i] -= (ctx.alpha * detail::phi(v[i], ctx.p) + ctx.beta * detail::phi(v[i], ctx.q)) * h;
  return g;
}

inline DiscreteFunction gradient(const DiscreteFunction& u, const FunctionalContext& ctx) {
  return DiscreteFunction(u.mesh, energy_gradient(u, ctx));
}

inline double euclid_norm(const std::vector<double>& g) {
  double s = 0.0;
  for (double x : g) s += x * x;
  return std::sqrt(s);
}

// Euclidean norm of the energy gradient scaled by h^{1/2}.
inline double weak_residual(const DiscreteFunction& u, const FunctionalContext& ctx) {
  return euclid_norm(energy_gradient(u, ctx)) * std::sqrt(u.mesh.h);
}

inline int count_nodal(const DiscreteFunction& u, double eps_rel = 1e-6) {
  require(eps_rel > 0.0 && eps_rel < 0.5, ErrorCode::DOMAIN_ERROR, "eps_rel must lie in (0, 0.5)");
  const double thr = eps_rel * u.sup_norm();
  if (u.sup_norm() == 0.0) return 0;
  int runs = 0;
  int last = 0;
  for (double x : u.values) {
    if (std::abs(x) < thr) continue;
    int s = x > 0.0 ? 1 : -1;
    if (s != last) {
      ++runs;
      last = s;
    }
  }
  return runs;
}

inline FunctionalReport evaluate(const DiscreteFunction& u, const FunctionalContext& ctx) {
  FunctionalReport rep;
  rep.H = grad_norm_pow(u, ctx.p) - ctx.alpha * lump_norm_pow(u, ctx.p);
  rep.G = grad_norm_pow(u, ctx.q) - ctx.beta * lump_norm_pow(u, ctx.q);
  rep.E = rep.H / ctx.p + rep.G / ctx.q;
  rep.residual = weak_residual(u, ctx);
  rep.nodal_domains = u.sup_norm() == 0.0 ? 0 : count_nodal(u);
  return rep;
}

inline double rayleigh(const DiscreteFunction& u, double r) {
  double den = lump_norm_pow(u, r);
  require(den > 0.0, ErrorCode::ZERO_FUNCTION, "Rayleigh quotient of the zero function");
  return grad_norm_pow(u, r) / den;
}

inline double part_rayleigh(const DiscreteFunction& u, double r, Part part) {
  double den = part_lump_norm_pow(u, r, part);
  require(den > 0.0, ErrorCode::ZERO_FUNCTION, "Rayleigh quotient of an empty sign part");
  return part_grad_norm_pow(u, r, part) / den;
}

// H and G evaluated on each sign part.
struct PartValues {
  double H_plus = 0.0, H_minus = 0.0, G_plus = 0.0, G_minus = 0.0;
  double scale_plus = 0.0, scale_minus = 0.0;  // gradient norms, used for relative tolerances
};

inline PartValues part_values(const DiscreteFunction& u, const FunctionalContext& ctx) {
  PartValues pv;
  double gp = part_grad_norm_pow(u, ctx.p, Part::Plus), gm = part_grad_norm_pow(u, ctx.p, Part::Minus);
  double qp = part_grad_norm_pow(u, ctx.q, Part::Plus), qm = part_grad_norm_pow(u, ctx.q, Part::Minus);
  pv.H_plus = gp - ctx.alpha * part_lump_norm_pow(u, ctx.p, Part::Plus);
  pv.H_minus = gm - ctx.alpha * part_lump_norm_pow(u, ctx.p, Part::Minus);
  pv.G_plus = qp - ctx.beta * part_lump_norm_pow(u, ctx.q, Part::Plus);
  pv.G_minus = qm - ctx.beta * part_lump_norm_pow(u, ctx.q, Part::Minus);
  pv.scale_plus = gp + qp;
  pv.scale_minus = gm + qm;
  return pv;
}

inline void write_csv(const DiscreteFunction& u, const std::string& path) {
  std::ofstream f(path);
  require(static_cast<bool>(f), ErrorCode::IO_ERROR, "cannot open " + path);
  f << "t,u\n";
  char buf[96];
  auto row = [&](double t, double v) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", t, v);
    f << buf;
  };
  for (int i = 0; i < u.mesh.n; ++i) row(u.mesh.x(i), u.values[i]);
}

// Reads interior rows written by write_csv; T is needed to rebuild the mesh.
inline DiscreteFunction read_csv(const std::string& path, double T) {
  std::ifstream f(path);
  require(static_cast<bool>(f), ErrorCode::IO_ERROR, "cannot open " + path);
  std::string line;
  std::getline(f, line);
  std::vector<double> vals;
  while (std::getline(f, line)) {
    auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    vals.push_back(std::stod(line.substr(comma + 1)));
  }
  Mesh mesh(T, static_cast<int>(vals.size()));
  return DiscreteFunction(mesh, std::move(vals));
}

}  // namespace pqlap
