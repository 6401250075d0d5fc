#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <string>

#include <pqlap/atlas.hpp>

using namespace pqlap;

namespace {
const FunctionalContext kBase{3.0, 2.0, 0.0, 0.0};
constexpr double kT = 1.0;
const double kL1p = eigenvalue(1, 3.0, kT), kL2p = eigenvalue(2, 3.0, kT), kL3p = eigenvalue(3, 3.0, kT);
const double kL1q = eigenvalue(1, 2.0, kT), kL2q = eigenvalue(2, 2.0, kT), kL3q = eigenvalue(3, 2.0, kT);

BetaLTable table_over(double a0, double a1, int count) {
  CurveOptions o;
  o.n = 200;
  return make_beta_L_table(curve_beta_L(linspace(a0, a1, count), kBase, kT, o));
}

FunctionalContext at(double a, double b) { return {kBase.p, kBase.q, a, b}; }

// A coarse sweep shared by the structural tests.
const AtlasResult& coarse_sweep() {
  static const AtlasResult res = [] {
    AtlasOptions o;
    o.threads = 2;
    return sweep({0.0, 2.0 * kL3p}, {0.0, 2.0 * kL3q}, 9, kBase, kT, o, 0);
  }();
  return res;
}
}  // namespace

TEST_CASE("beta_L table reads conservatively", "[atlas]") {
  BetaLTable t;
  t.alpha = {1.0, 2.0, 3.0};
  t.value = {10.0, 8.0, -std::numeric_limits<double>::infinity()};
  CHECK(t.lower_bound(1.0) == 10.0);
  CHECK(t.lower_bound(1.5) == 8.0);
  CHECK(t.lower_bound(2.0) == 8.0);
  CHECK(t.lower_bound(2.5) == -std::numeric_limits<double>::infinity());
  CHECK(t.lower_bound(0.5) == -std::numeric_limits<double>::infinity());
  CHECK(t.lower_bound(3.5) == -std::numeric_limits<double>::infinity());

  CurveSample failed;
  failed.alpha = 4.0;
  failed.value = 5.0;
  failed.status = CurveStatus::FAILED;
  BetaLTable f = make_beta_L_table({failed});
  CHECK(f.lower_bound(4.0) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("classification of the three reference points", "[atlas]") {
  BetaLTable table = table_over(kL2p, 2.0 * kL2p, 6);
  AtlasOptions o;

  RegionVerdict none = classify(0.9 * kL2p, 0.9 * kL2q, kBase, kT, table, o);
  CHECK(none.verdict == Verdict::NONEXISTENT);
  CHECK(none.rule == rule::kNonexistence);
  CHECK_FALSE(none.has_solution);

  RegionVerdict pos = classify(1.3 * kL2p, kL1q, kBase, kT, table, o);
  REQUIRE(pos.verdict == Verdict::EXISTS_POS_ENERGY);
  CHECK(pos.rule == rule::kNehariMinimum);
  CHECK(pos.nodal_domains == 2);
  CHECK(pos.energy > 0.0);
  CHECK(detail::certificate_valid(pos, at(pos.alpha, pos.beta), o.tol_resid));

  RegionVerdict neg = classify(0.5 * kL1p, 1.5 * kL2q, kBase, kT, table, o);
  REQUIRE(neg.verdict == Verdict::EXISTS_NEG_ENERGY);
  CHECK(neg.rule == rule::kFlowBelowSecond);
  CHECK(neg.energy < 0.0);
  CHECK(neg.nodal_domains >= 2);
  CHECK(detail::certificate_valid(neg, at(neg.alpha, neg.beta), o.tol_resid));
}

TEST_CASE("high-beta rule beyond the second p-eigenvalue", "[atlas]") {
  BetaLTable table;
  AtlasOptions o;
  // alpha between lambda_2(p) and lambda_3(p): k_alpha = 2, threshold lambda_3(q)
  RegionVerdict v = classify(1.5 * kL2p, 1.2 * kL3q, kBase, kT, table, o);
  REQUIRE(v.verdict == Verdict::EXISTS_NEG_ENERGY);
  CHECK(v.rule == rule::kFlowHighBeta);
  CHECK(detail::certificate_valid(v, at(v.alpha, v.beta), o.tol_resid));
}

TEST_CASE("cells outside every rule stay unknown", "[atlas]") {
  BetaLTable table = table_over(kL2p, 3.0 * kL2p, 6);
  AtlasOptions o;
  // beta between the second and third q-eigenvalues, alpha above lambda_2(p), above beta_L
  RegionVerdict v = classify(1.5 * kL2p, 0.5 * (kL2q + kL3q), kBase, kT, table, o);
  CHECK(v.verdict == Verdict::UNKNOWN);
  CHECK(v.rule == rule::kNone);
  CHECK_FALSE(v.has_solution);
  CHECK_FALSE(v.diagnostics.empty());
  // an empty curve table never licenses the positive-energy rule
  RegionVerdict w = classify(1.3 * kL2p, kL1q, kBase, kT, BetaLTable{}, o);
  CHECK(w.verdict == Verdict::UNKNOWN);
}

TEST_CASE("numerical probe is tagged apart from theorem rules", "[atlas]") {
  AtlasOptions o;
  o.numerical_probe = true;
  // the positive-energy rule is withheld for lack of a curve table, the probe still finds a solution
  RegionVerdict v = classify(1.3 * kL2p, kL1q, kBase, kT, BetaLTable{}, o);
  REQUIRE(v.verdict == Verdict::EXISTS_POS_ENERGY);
  CHECK(v.rule == rule::kNumericalOnly);
  CHECK(detail::certificate_valid(v, at(v.alpha, v.beta), o.tol_resid));
}

TEST_CASE("coarse sweep structure", "[atlas][property]") {
  const AtlasResult& res = coarse_sweep();
  REQUIRE(res.cells.size() == 81);
  CHECK(res.invalid_certificates == 0);
  int total = 0;
  for (const auto& [k, c] : res.counts) total += c;
  CHECK(total == 81);
  BetaLTable table = make_beta_L_table(res.overlay.beta_L);
  for (std::size_t i = 0; i < res.alphas.size(); ++i)
    for (std::size_t j = 0; j < res.betas.size(); ++j) {
      const RegionVerdict& v = res.at(i, j);
      const bool box = v.alpha <= kL2p && v.beta <= kL2q;
      CHECK((v.verdict == Verdict::NONEXISTENT) == box);
      if (v.verdict == Verdict::NONEXISTENT) CHECK(v.rule == rule::kNonexistence);
      if (v.verdict == Verdict::EXISTS_POS_ENERGY) {
        CHECK(v.alpha > kL2p);
        CHECK(v.beta < table.lower_bound(v.alpha));
      }
      CHECK(detail::certificate_valid(v, at(v.alpha, v.beta), 1e-6));
      CHECK(v.rule != rule::kNumericalOnly);
    }
}

TEST_CASE("positive-energy frontier is closed downward in beta", "[atlas][property]") {
  const AtlasResult& res = coarse_sweep();
  for (std::size_t i = 0; i < res.alphas.size(); ++i) {
    if (!(res.alphas[i] > kL2p)) continue;
    bool seen_gap = false;
    for (std::size_t j = 0; j < res.betas.size(); ++j) {
      bool pos = res.at(i, j).verdict == Verdict::EXISTS_POS_ENERGY;
      if (!pos) seen_gap = true;
      if (pos) CHECK_FALSE(seen_gap);
    }
  }
}

TEST_CASE("sweep is deterministic across thread counts", "[atlas]") {
  AtlasOptions one, three;
  one.threads = 1;
  three.threads = 3;
  auto a = sweep({0.0, 1.5 * kL2p}, {0.0, 1.5 * kL2q}, 4, kBase, kT, one, 0);
  auto b = sweep({0.0, 1.5 * kL2p}, {0.0, 1.5 * kL2q}, 4, kBase, kT, three, 0);
  REQUIRE(a.cells.size() == b.cells.size());
  for (std::size_t k = 0; k < a.cells.size(); ++k) {
    CHECK(a.cells[k].verdict == b.cells[k].verdict);
    CHECK(a.cells[k].rule == b.cells[k].rule);
    CHECK(a.cells[k].solution.values == b.cells[k].solution.values);
  }
}

TEST_CASE("solvers fail on nonexistence cells", "[atlas][property]") {
  const AtlasResult& res = coarse_sweep();
  auto probes = probe_nonexistent(res, kBase, kT, 6, 99);
  // a 9x9 grid has only 2x2 points inside the nonexistence box
  CHECK(probes.size() == 4);
  for (const auto& p : probes) {
    CHECK_FALSE(p.nehari_accepted);
    CHECK_FALSE(p.flow_accepted);
  }
}

TEST_CASE("overlay carries the spectrum within range", "[atlas]") {
  const AtlasResult& res = coarse_sweep();
  REQUIRE(res.overlay.lambda_p.size() == 3);
  CHECK(res.overlay.lambda_p[1] == kL2p);
  REQUIRE(res.overlay.lambda_q.size() == 4);  // k^2 <= 18
  CHECK(res.overlay.beta_upper_markers[0].second == beta_upper_star(kL1p, 3.0, 2.0, kT));
  CHECK(std::string(verdict_name(Verdict::UNKNOWN)) == "UNKNOWN");
}
