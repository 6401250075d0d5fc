#include <catch_amalgamated.hpp>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include <pqlap/gtrig.hpp>
#include <pqlap/quadrature.hpp>

using namespace pqlap;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double kPi = std::numbers::pi;

// x -> int_0^x (1 - s^r)^{-1/r} ds via the incomplete beta function (s^r = w substitution)
double inverse_sine_integral(double r, double x) {
  return boost::math::beta(1.0 / r, 1.0 - 1.0 / r, std::pow(x, r)) / r;
}
}  // namespace

TEST_CASE("pi_r closed form and ordering", "[gtrig]") {
  CHECK_THAT(pi_r(2.0), WithinAbs(kPi, 1e-15));
  using big = boost::multiprecision::cpp_bin_float_50;
  const big pi50 = boost::math::constants::pi<big>();
  big four_ref = 2 * pi50 / (4 * sin(pi50 / 4));
  CHECK_THAT(pi_r(4.0), WithinRel(four_ref.convert_to<double>(), 1e-14));
  CHECK(pi_r(1.5) > pi_r(2.0));
  CHECK(pi_r(2.0) > pi_r(3.0));
  double prev = pi_r(1.1);
  for (int i = 12; i <= 100; ++i) {
    double cur = pi_r(i / 10.0);
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK_THROWS_AS(pi_r(1.0), Error);
  CHECK_THROWS_AS(pi_r(0.5), Error);
}

TEST_CASE("sin_2 is the ordinary sine", "[gtrig]") {
  GeneralizedSine s(2.0);
  for (int i = 0; i < 100; ++i) {
    double t = 2.0 * kPi * i / 99.0;
    GTrigValue v = s(t);
    CHECK_THAT(v.s, WithinAbs(std::sin(t), 1e-8));
    CHECK_THAT(v.ds, WithinAbs(std::cos(t), 1e-8));
  }
}

TEST_CASE("sin_r peaks at a quarter period", "[gtrig]") {
  for (double r : {1.2, 1.5, 2.5, 3.0, 7.0}) {
    GTrigValue v = sin_r(r, pi_r(r) / 2.0);
    CHECK_THAT(v.s, WithinAbs(1.0, 1e-12));
    CHECK_THAT(v.ds, WithinAbs(0.0, 1e-6));
  }
}

TEST_CASE("sin_r inverts the defining integral", "[gtrig]") {
  for (double r : {1.3, 1.5, 3.0, 4.0, 9.0}) {
    GeneralizedSine s(r);
    for (int i = 1; i < 40; ++i) {
      double t = 0.5 * pi_r(r) * i / 40.0;
      CHECK_THAT(inverse_sine_integral(r, s(t).s), WithinAbs(t, 1e-11));
    }
  }
}

TEST_CASE("sin_r symmetry and periodic extension", "[gtrig]") {
  for (double r : {1.5, 3.0}) {
    GeneralizedSine s(r);
    const double P = pi_r(r);
    for (double t : {0.1, 0.37, 0.9, 1.3}) {
      CHECK_THAT(s(P - t).s, WithinAbs(s(t).s, 1e-12));
      CHECK_THAT(s(-t).s, WithinAbs(-s(t).s, 1e-12));
      CHECK_THAT(s(t + 2.0 * P).s, WithinAbs(s(t).s, 1e-11));
      CHECK_THAT(s(t + P).s, WithinAbs(-s(t).s, 1e-11));
    }
  }
}

TEST_CASE("Pythagorean identity holds over a full period", "[gtrig][property]") {
  CHECK_THAT(std::pow(std::abs(sin_r(3.0, 0.7).s), 3.0) + std::pow(std::abs(sin_r(3.0, 0.7).ds), 3.0), WithinAbs(1.0, 1e-9));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> rd(1.05, 10.0), ud(0.0, 1.0);
  for (int c = 0; c < 60; ++c) {
    double r = rd(rng);
    GeneralizedSine s(r);
    for (int i = 0; i < 20; ++i) {
      double t = 2.0 * pi_r(r) * ud(rng);
      GTrigValue v = s(t);
      CHECK_THAT(std::pow(std::abs(v.s), r) + std::pow(std::abs(v.ds), r), WithinAbs(1.0, 1e-8));
    }
  }
}

TEST_CASE("derivative matches a finite difference", "[gtrig]") {
  for (double r : {1.5, 2.5, 4.0}) {
    GeneralizedSine s(r);
    for (double t : {0.2, 0.8, 1.1}) {
      double d = 1e-6;
      double fd = (s(t + d).s - s(t - d).s) / (2.0 * d);
      CHECK_THAT(s(t).ds, WithinAbs(fd, 1e-7));
    }
  }
}

TEST_CASE("beta function values and identities", "[gtrig]") {
  for (double p : {1.5, 2.0, 3.0, 7.0}) CHECK_THAT(beta_fn(1.0 / p, 1.0), WithinRel(p, 1e-13));
  CHECK_THAT(beta_fn(1.0, 1.0), WithinRel(1.0, 1e-15));
  CHECK_THAT(beta_fn(0.4, 0.3) * beta_fn(0.7, 0.7), WithinRel(kPi / (0.4 * std::sin(kPi * 0.3)), 1e-12));
  CHECK_THROWS_AS(beta_fn(0.0, 1.0), Error);
  CHECK_THROWS_AS(beta_fn(1.0, -2.0), Error);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int i = 0; i < 200; ++i) {
    double x = u(rng), y = u(rng);
    CHECK_THAT(beta_fn(x, y), WithinRel(beta_fn(y, x), 1e-10));
    CHECK_THAT(beta_fn(x, y) * beta_fn(x + y, 1.0 - y), WithinRel(kPi / (x * std::sin(kPi * y)), 1e-10));
  }
}

TEST_CASE("product bound on B(1/p,1/p)", "[gtrig]") {
  for (double p : {1.5, 2.0, 3.0, 5.0, 10.0}) CHECK(beta_fn(1.0 / p, 1.0 / p) / p < 2.0 * p * (p + 2.0) / ((p + 1.0) * (p + 1.0)));
}

TEST_CASE("sin_p moments against quadrature of sin_p", "[gtrig]") {
  SinMoments m22 = sinp_moment(2.0, 2.0);
  CHECK_THAT(m22.sin_moment, WithinRel(kPi / 4.0, 1e-13));
  CHECK_THAT(m22.cos_moment, WithinRel(kPi / 4.0, 1e-13));
  for (auto [p, q] : {std::pair{3.0, 2.0}, std::pair{4.0, 1.5}, std::pair{1.5, 3.0}}) {
    GeneralizedSine s(p);
    const double quarter = pi_r(p) / 2.0;
    double sm = quad::integrate([&](double t) { return std::pow(std::abs(s(t).s), q); }, 0.0, quarter, 1e-12);
    double cm = quad::integrate([&](double t) { return std::pow(std::abs(s(t).ds), q); }, 0.0, quarter, 1e-12);
    SinMoments m = sinp_moment(p, q);
    CHECK_THAT(m.sin_moment, WithinRel(sm, 1e-7));
    CHECK_THAT(m.cos_moment, WithinRel(cm, 1e-7));
  }
  CHECK_THROWS_AS(sinp_moment(1.0, 2.0), Error);
}
