#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <pqlap/flow.hpp>
#include <pqlap/spectral1d.hpp>

using namespace pqlap;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double kPi = std::numbers::pi;

DiscreteFunction random_function(const Mesh& mesh, std::mt19937_64& rng, bool nonneg = false) {
  std::normal_distribution<double> g(0.0, 1.0);
  DiscreteFunction u(mesh);
  for (int k = 1; k <= 5; ++k) {
    double a = g(rng) / k;
    for (int i = 0; i < mesh.n; ++i) u.values[i] += a * std::sin(k * kPi * mesh.x(i) / mesh.T);
  }
  if (nonneg)
    for (double& v : u.values) v = std::abs(v);
  return u;
}

// -Delta_p w - Delta_q w + lambda (psi_p(w) + psi_q(w)), nodewise divided by h
std::vector<double> forward_operator(const DiscreteFunction& w, double lambda, const FunctionalContext& ctx) {
  PQFunctional F;
  F.mesh = w.mesh;
  F.grad_terms = {{ctx.p, 1.0}, {ctx.q, 1.0}};
  F.node_terms = {{ctx.p, lambda}, {ctx.q, lambda}};
  std::vector<double> g = F.gradient(w.values);
  for (double& x : g) x /= w.mesh.h;
  return g;
}

bool monotone(const std::vector<FlowRecord>& log) {
  for (std::size_t i = 1; i < log.size(); ++i)
    if (log[i].J > log[i - 1].J) return false;
  return true;
}

const FunctionalContext kNeg{3.0, 2.0, 0.5 * eigenvalue(1, 3.0, 1.0), 1.5 * eigenvalue(2, 2.0, 1.0)};
}  // namespace

TEST_CASE("T_lambda inversion is self-consistent", "[flow][property]") {
  std::mt19937_64 rng(51);
  for (const FunctionalContext& ctx : {FunctionalContext{3.0, 2.0}, FunctionalContext{2.5, 1.5}, FunctionalContext{4.0, 3.0}}) {
    Mesh mesh(1.0, 150);
    for (int c = 0; c < 10; ++c) {
      DiscreteFunction f = random_function(mesh, rng).scaled(std::pow(10.0, c % 5 - 2));
      double lambda = 0.5 + c;
      DiscreteFunction w = solve_T_lambda(f, lambda, ctx);
      std::vector<double> back = forward_operator(w, lambda, ctx);
      double scale = f.sup_norm(), err = 0.0;
      for (int i = 0; i < mesh.n; ++i) err = std::max(err, std::abs(back[i] - f.values[i]));
      CHECK(err <= 1e-9 * scale);
    }
  }
  Mesh mesh(1.0, 20);
  CHECK(solve_T_lambda(DiscreteFunction(mesh), 1.0, {3.0, 2.0}).sup_norm() == 0.0);
  CHECK_THROWS_AS(solve_T_lambda(DiscreteFunction(mesh), 0.0, {3.0, 2.0}), Error);
}

TEST_CASE("B_lambda keeps the positive cone and is odd", "[flow][property]") {
  std::mt19937_64 rng(53);
  Mesh mesh(1.0, 100);
  Nonlinearity nl = power_nonlinearity(mesh, kNeg);
  REQUIRE(check_A1(nl, kNeg));
  const double lambda = detail::flow_lambda(nl);
  for (int c = 0; c < 50; ++c) {
    DiscreteFunction u = random_function(mesh, rng, true);
    DiscreteFunction b = B_lambda(u, nl, lambda, kNeg);
    for (double x : b.values) CHECK(x >= -1e-12);
    if (c < 10) {
      DiscreteFunction bm = B_lambda(u.scaled(-1.0), nl, lambda, kNeg);
      for (int i = 0; i < mesh.n; ++i) CHECK_THAT(bm.values[i], WithinAbs(-b.values[i], 1e-12 * (1.0 + b.sup_norm())));
    }
  }
  CHECK_THROWS_AS(B_lambda(DiscreteFunction(mesh), nl, nl.lambda0, kNeg), Error);
}

TEST_CASE("power nonlinearity constant and the sign condition", "[flow]") {
  Mesh mesh(1.0, 10);
  FunctionalContext neg_alpha{3.0, 2.0, -4.0, 2.0};
  Nonlinearity nl = power_nonlinearity(mesh, neg_alpha);
  CHECK(nl.lambda0 == 4.0);
  CHECK(check_A1(nl, neg_alpha));
  nl.lambda0 = 0.0;
  CHECK_FALSE(check_A1(nl, neg_alpha));
}

TEST_CASE("cone classification", "[flow]") {
  Mesh mesh(1.0, 5);
  CHECK(cone_of(DiscreteFunction(mesh, {1, 2, 3, 2, 1})) == Cone::POS);
  CHECK(cone_of(DiscreteFunction(mesh, {-1, -2, -3, -2, -1})) == Cone::NEG);
  CHECK(cone_of(DiscreteFunction(mesh, {1, 2, 0, 2, 1})) == Cone::MIXED);
  CHECK(cone_of(DiscreteFunction(mesh, {1, -2, 3, 2, 1})) == Cone::MIXED);
}

TEST_CASE("descent from a positive seed stays positive and decreases J", "[flow]") {
  Mesh mesh(1.0, 120);
  Nonlinearity nl = power_nonlinearity(mesh, kNeg);
  const double lambda = detail::flow_lambda(nl);
  EigenPair e = eigenfunction(1, 2.0, 1.0);
  DiscreteFunction seed = sample(mesh, [&](double t) { return 0.1 * e(t); });
  DescendResult r = descend(seed, nl, lambda, kNeg);
  REQUIRE(r.status.ok);
  CHECK(monotone(r.log));
  for (const auto& rec : r.log) CHECK(rec.cone == Cone::POS);
  // fixed point and critical point together
  FunctionalReport rep = evaluate(r.final.eta, kNeg);
  CHECK(rep.residual < 1e-6);
  CHECK(r.final.gap <= 1e-6 * detail::scaled_norm(r.final.eta.values, mesh.h));
  CHECK(rep.E < 0.0);
  CHECK(cone_of(r.final.eta) == Cone::POS);

  // the mirrored seed gives the mirrored solution
  DescendResult m = descend(seed.scaled(-1.0), nl, lambda, kNeg);
  REQUIRE(m.status.ok);
  for (int i = 0; i < mesh.n; ++i) CHECK_THAT(m.final.eta.values[i], WithinAbs(-r.final.eta.values[i], 1e-8));
}

TEST_CASE("descent monotonicity from random sign-changing seeds", "[flow][property]") {
  std::mt19937_64 rng(57);
  Mesh mesh(1.0, 80);
  Nonlinearity nl = power_nonlinearity(mesh, kNeg);
  const double lambda = detail::flow_lambda(nl);
  DescendOptions o;
  o.max_steps = 300;
  for (int c = 0; c < 8; ++c) {
    DescendResult r = descend(random_function(mesh, rng).scaled(0.05), nl, lambda, kNeg, o);
    CHECK(monotone(r.log));
    CHECK_FALSE(r.log.empty());
  }
}

TEST_CASE("symmetric lobe projection", "[flow]") {
  std::mt19937_64 rng(59);
  Mesh mesh(1.0, 11);  // n + 1 = 12 is divisible by 2, 3 and 4
  for (int m : {2, 3, 4}) {
    std::vector<double> v = random_function(mesh, rng).values;
    symmetric_lobes_project(v, m);
    std::vector<double> w = v;
    symmetric_lobes_project(w, m);
    for (int i = 0; i < mesh.n; ++i) CHECK_THAT(w[i], WithinAbs(v[i], 1e-14));  // idempotent
    const int L = 12 / m;
    for (int j = 1; j < m; ++j) CHECK(v[j * L - 1] == 0.0);
    for (int k = 0; k < L - 1; ++k) CHECK_THAT(v[L + k], WithinAbs(-v[k], 1e-14));
  }
  std::vector<double> bad(10, 1.0);
  CHECK_THROWS_AS(symmetric_lobes_project(bad, 3), Error);
}

TEST_CASE("truncation at a super-solution", "[flow]") {
  Mesh mesh(1.0, 100);
  // a small multiple of the first q-eigenfunction is not a super-solution once beta > lambda_1(q)
  EigenPair eq = eigenfunction(1, 2.0, 1.0);
  DiscreteFunction small = sample(mesh, [&](double t) { return 1e-3 * eq(t); });
  CHECK_THROWS_AS(truncate(small, kNeg), Error);
  try {
    truncate(small, kNeg);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SUPER_SOLUTION_VIOLATION);
  }
  DiscreteFunction with_zero = small;
  with_zero.values[3] = 0.0;
  CHECK_THROWS_AS(truncate(with_zero, kNeg), Error);

  // a positive solution is a super-solution; the clamp has three branches
  Nonlinearity nl = power_nonlinearity(mesh, kNeg);
  DiscreteFunction seed = sample(mesh, [&](double t) { return 0.1 * eq(t); });
  DescendResult r = descend(seed, nl, detail::flow_lambda(nl), kNeg);
  REQUIRE(r.status.ok);
  const DiscreteFunction& w1 = r.final.eta;
  Nonlinearity tr = truncate(w1, kNeg);
  CHECK(tr.lambda0 == std::max(std::abs(kNeg.alpha), std::abs(kNeg.beta)));
  CHECK(check_A1(tr, kNeg));
  const int i = mesh.n / 2;
  const double v = w1.values[i];
  CHECK(tr(i, 0.5 * v) == nl(i, 0.5 * v));
  CHECK(tr(i, -0.3 * v) == nl(i, -0.3 * v));
  CHECK(tr(i, 3.0 * v) == nl(i, v));
  CHECK(tr(i, -3.0 * v) == nl(i, -v));
  // the primitive continues linearly past the clamp
  CHECK_THAT(tr.prim(i, 2.0 * v) - tr.prim(i, v), WithinRel(nl(i, v) * v, 1e-12));
  CHECK_THAT(tr.prim(i, 0.5 * v), WithinRel(nl.prim(i, 0.5 * v), 1e-14));
  CHECK(tr.dh(i, 2.0 * v) == 0.0);
}

TEST_CASE("negative-energy nodal solution below the first p-eigenvalue", "[flow]") {
  Mesh mesh(1.0, 200);
  NegativeResult r = find_nodal_negative(kNeg, mesh);
  REQUIRE(r.status.ok);
  FunctionalReport rep = evaluate(r.u, kNeg);
  CHECK(rep.residual < 1e-6);
  CHECK(rep.E < 0.0);
  CHECK(rep.nodal_domains >= 2);
  REQUIRE(r.sandwich_checked);
  for (int i = 0; i < mesh.n; ++i) CHECK(std::abs(r.u.values[i]) <= r.w1.values[i] + 1e-9);
  for (const auto& log : r.all_logs) CHECK(monotone(log));
  CHECK(monotone(r.log));

  // the truncated problem agrees with the original one on the solution
  Nonlinearity tr = truncate(r.w1, kNeg);
  PQFunctional J = flow_functional(tr, kNeg);
  double res_trunc = euclid_norm(J.gradient(r.u.values)) * std::sqrt(mesh.h);
  CHECK_THAT(res_trunc, WithinAbs(rep.residual, 1e-12));
}

TEST_CASE("alpha at the first p-eigenvalue goes through the lobe route", "[flow]") {
  Mesh mesh(1.0, 119);
  FunctionalContext ctx{3.0, 2.0, eigenvalue(1, 3.0, 1.0), 1.5 * eigenvalue(2, 2.0, 1.0)};
  NegativeResult r = find_nodal_negative(ctx, mesh);
  REQUIRE(r.status.ok);
  CHECK(r.route == "lobes-2");
  FunctionalReport rep = evaluate(r.u, ctx);
  CHECK(rep.residual < 1e-6);
  CHECK(rep.E < 0.0);
  CHECK(rep.nodal_domains == 2);
  for (const auto& log : r.all_logs) CHECK(monotone(log));
}

TEST_CASE("no negative path below the second q-eigenvalue", "[flow]") {
  Mesh mesh(1.0, 120);
  FunctionalContext ctx{3.0, 2.0, 0.5 * eigenvalue(1, 3.0, 1.0), 0.9 * eigenvalue(2, 2.0, 1.0)};
  NegativeResult r = find_nodal_negative(ctx, mesh);
  CHECK_FALSE(r.status.ok);
  CHECK(r.status.code == ErrorCode::PATH_NOT_NEGATIVE);
}

TEST_CASE("trajectory CSV layout", "[flow]") {
  std::vector<FlowRecord> log = {{0, -1.5, 0.25, Cone::POS}, {1, -1.75, 0.125, Cone::MIXED}};
  auto path = std::filesystem::temp_directory_path() / "pqlap_traj.csv";
  write_trajectory_csv(log, path.string());
  std::ifstream f(path);
  std::string header, row;
  std::getline(f, header);
  std::getline(f, row);
  CHECK(header == "step,J,fixed_point_gap,cone");
  CHECK(row == "0,-1.5,0.25,POS");
  std::filesystem::remove(path);
}
