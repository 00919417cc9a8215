#include <doctest.h>

#include <cmath>
#include <random>

#include "terrafit/baselines.hpp"
#include "terrafit/errors.hpp"

using namespace terrafit;

TEST_SUITE_BEGIN("baselines");

TEST_CASE("monomial bases have the expected sizes") {
  CHECK(monomial_exponents(1).size() == 3);
  CHECK(monomial_exponents(3).size() == 10);
  const auto exps = monomial_exponents(2);
  REQUIRE(exps.size() == 6);
  CHECK(exps[0] == std::pair<int, int>{0, 0});
  CHECK(exps[1] == std::pair<int, int>{1, 0});
  CHECK(exps[2] == std::pair<int, int>{0, 1});
  CHECK(exps[3] == std::pair<int, int>{1, 1});  // mixed term first within a degree
}

TEST_CASE("a plane through three points is recovered exactly") {
  const std::vector<double> x1{0.0, 10.0, 3.0};
  const std::vector<double> x2{0.0, 0.0, 7.0};
  std::vector<double> h(3);
  for (int i = 0; i < 3; ++i) h[std::size_t(i)] = 1.0 + 0.1 * x1[std::size_t(i)];

  const PolynomialSurface plane = fit_polynomial(x1, x2, h, 1);
  REQUIRE(plane.coeffs.size() == 3);
  CHECK(plane.coeffs[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(plane.coeffs[1] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(plane.coeffs[2] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("collinear points cannot determine a plane") {
  const std::vector<double> x1{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> x2{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> h{0.0, 0.1, 0.2, 0.3};
  CHECK_THROWS_AS(fit_polynomial(x1, x2, h, 1), NumericalError);
  CHECK_THROWS_WITH_AS(fit_polynomial(x1, x2, h, 1),
                       doctest::Contains("rank deficient"), NumericalError);
}

TEST_CASE("too few points is a configuration error") {
  const std::vector<double> two{0.0, 1.0};
  CHECK_THROWS_AS(fit_polynomial(two, two, two, 1), ConfigError);
}

TEST_CASE("a random cubic field is recovered from 50 samples") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> coef(-0.05, 0.05);
  std::uniform_real_distribution<double> coord(-8.0, 8.0);

  PolynomialSurface truth;
  truth.degree = 3;
  for (std::size_t i = 0; i < 10; ++i) truth.coeffs.push_back(coef(rng));

  std::vector<double> x1, x2, h;
  for (int i = 0; i < 50; ++i) {
    const Vec2 x{coord(rng), coord(rng)};
    x1.push_back(x.x);
    x2.push_back(x.y);
    h.push_back(truth.predict(x));
  }
  const PolynomialSurface fit = fit_polynomial(x1, x2, h, 3);
  REQUIRE(fit.coeffs.size() == 10);
  for (std::size_t i = 0; i < 10; ++i)
    CHECK(std::abs(fit.coeffs[i] - truth.coeffs[i]) <= 1e-9);
}

TEST_CASE("prediction evaluates the monomial expansion") {
  PolynomialSurface zero;
  zero.degree = 3;
  zero.coeffs.assign(10, 0.0);
  CHECK(zero.predict({3.0, -4.0}) == 0.0);

  PolynomialSurface plane;
  plane.degree = 1;
  plane.coeffs = {1.0, 0.1, 0.0};
  CHECK(plane.predict({10.0, 5.0}) == doctest::Approx(2.0));

  PolynomialSurface constant;
  constant.degree = 3;
  constant.coeffs.assign(10, 0.0);
  constant.coeffs[0] = 3.0;
  CHECK(constant.predict({123.0, -55.0}) == doctest::Approx(3.0));
}

TEST_CASE("the cubic never fits worse in-sample than the plane") {
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> coord(-10.0, 10.0);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::vector<double> x1, x2, h;
  for (int i = 0; i < 120; ++i) {
    const double x = coord(rng), y = coord(rng);
    x1.push_back(x);
    x2.push_back(y);
    h.push_back(0.4 + 0.02 * x - 0.03 * y + 0.004 * x * y + noise(rng));
  }
  const PolynomialSurface plane = fit_polynomial(x1, x2, h, 1);
  const PolynomialSurface cubic = fit_polynomial(x1, x2, h, 3);

  double rms_plane = 0.0, rms_cubic = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Vec2 x{x1[i], x2[i]};
    rms_plane += std::pow(plane.predict(x) - h[i], 2);
    rms_cubic += std::pow(cubic.predict(x) - h[i], 2);
  }
  CHECK(rms_cubic <= rms_plane + 1e-12);
}

TEST_CASE("refitting on a model's own predictions is idempotent") {
  std::mt19937_64 rng(321);
  std::uniform_real_distribution<double> coord(-10.0, 10.0);
  std::vector<double> x1, x2, h;
  for (int i = 0; i < 60; ++i) {
    x1.push_back(coord(rng));
    x2.push_back(coord(rng));
    h.push_back(coord(rng) * 0.05);
  }
  const PolynomialSurface first = fit_polynomial(x1, x2, h, 3);
  std::vector<double> refit_h;
  for (std::size_t i = 0; i < h.size(); ++i) refit_h.push_back(first.predict({x1[i], x2[i]}));
  const PolynomialSurface second = fit_polynomial(x1, x2, refit_h, 3);
  for (std::size_t i = 0; i < first.coeffs.size(); ++i)
    CHECK(std::abs(first.coeffs[i] - second.coeffs[i]) <= 1e-10);
}

TEST_CASE("calibrated plane is a fixed function of its coefficients") {
  const CalibratedPlane plane{-1.73, 0.01, -0.02};
  CHECK(plane.predict({0, 0}) == doctest::Approx(-1.73));
  CHECK(plane.predict({10, 5}) == doctest::Approx(-1.73 + 0.1 - 0.1));
}

TEST_SUITE_END();
