#pragma once

#include <span>
#include <utility>
#include <vector>

#include "terrafit/geometry.hpp"

namespace terrafit {

/// Bivariate monomial exponent pairs (a, b) meaning x1^a x2^b, for all
/// total degrees <= degree. Within one total degree, mixed terms come
/// first: degree 2 orders as x1 x2, x1^2, x2^2.
std::vector<std::pair<int, int>> monomial_exponents(int degree);

/// Ground model h(x) = <w, monomials(x)> of bounded total degree:
/// degree 1 is a plane (3 coefficients), degree 3 a cubic (10).
struct PolynomialSurface {
  int degree = 1;
  std::vector<double> coeffs;

  double predict(const Vec2& x) const;
};

/// Least-squares fit of the monomial model. Throws NumericalError naming
/// the rank on degenerate geometry (e.g. collinear points for a plane) and
/// ConfigError when there are fewer points than coefficients.
PolynomialSurface fit_polynomial(std::span<const double> x1, std::span<const double> x2,
                                 std::span<const double> h, int degree);

/// Weighted variant; weights must be nonnegative.
PolynomialSurface fit_polynomial(std::span<const double> x1, std::span<const double> x2,
                                 std::span<const double> h, int degree,
                                 std::span<const double> w);

inline PolynomialSurface fit_polynomial(const PointCloud& cloud, int degree) {
  return fit_polynomial(cloud.x1, cloud.x2, cloud.h, degree);
}

/// Fixed plane supplied by configuration, never fitted.
struct CalibratedPlane {
  double offset = 0.0;
  double slope_x = 0.0;
  double slope_y = 0.0;

  double predict(const Vec2& x) const { return offset + slope_x * x.x + slope_y * x.y; }
};

}  // namespace terrafit
