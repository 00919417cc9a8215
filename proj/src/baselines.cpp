#include "terrafit/baselines.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "terrafit/errors.hpp"

namespace terrafit {

std::vector<std::pair<int, int>> monomial_exponents(int degree) {
  if (degree < 0) throw ConfigError("polynomial degree must be nonnegative");
  std::vector<std::pair<int, int>> out;
  for (int total = 0; total <= degree; ++total) {
    std::vector<std::pair<int, int>> level;
    for (int a = total; a >= 0; --a) level.emplace_back(a, total - a);
    std::stable_sort(level.begin(), level.end(), [](const auto& l, const auto& r) {
      return std::abs(l.first - l.second) < std::abs(r.first - r.second);
    });
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

namespace {

double eval_monomial(const Vec2& x, int a, int b) {
  double v = 1.0;
  for (int i = 0; i < a; ++i) v *= x.x;
  for (int i = 0; i < b; ++i) v *= x.y;
  return v;
}

}  // namespace

double PolynomialSurface::predict(const Vec2& x) const {
  const auto exps = monomial_exponents(degree);
  double acc = 0.0;
  for (std::size_t i = 0; i < exps.size(); ++i)
    acc += coeffs[i] * eval_monomial(x, exps[i].first, exps[i].second);
  return acc;
}

PolynomialSurface fit_polynomial(std::span<const double> x1, std::span<const double> x2,
                                 std::span<const double> h, int degree) {
  return fit_polynomial(x1, x2, h, degree, {});
}

PolynomialSurface fit_polynomial(std::span<const double> x1, std::span<const double> x2,
                                 std::span<const double> h, int degree,
                                 std::span<const double> w) {
  const auto exps = monomial_exponents(degree);
  const Eigen::Index n = Eigen::Index(h.size());
  const Eigen::Index m = Eigen::Index(exps.size());
  if (x1.size() != h.size() || x2.size() != h.size())
    throw ConfigError("fit_polynomial: coordinate/height arrays differ in length");
  if (!w.empty() && w.size() != h.size())
    throw ConfigError("fit_polynomial: weight array length mismatch");
  if (n < m)
    throw ConfigError("fit_polynomial: " + std::to_string(n) + " points cannot determine " +
                      std::to_string(m) + " coefficients");

  Eigen::MatrixXd design(n, m);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec2 x{x1[std::size_t(i)], x2[std::size_t(i)]};
    const double sw = w.empty() ? 1.0 : std::sqrt(std::max(0.0, w[std::size_t(i)]));
    for (Eigen::Index j = 0; j < m; ++j)
      design(i, j) = sw * eval_monomial(x, exps[std::size_t(j)].first, exps[std::size_t(j)].second);
    rhs(i) = sw * h[std::size_t(i)];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < m)
    throw NumericalError("fit_polynomial: design is rank deficient (rank " +
                         std::to_string(qr.rank()) + " of " + std::to_string(m) +
                         "); point geometry does not determine the model");
  const Eigen::VectorXd sol = qr.solve(rhs);

  PolynomialSurface out;
  out.degree = degree;
  out.coeffs.assign(sol.data(), sol.data() + sol.size());
  return out;
}

}  // namespace terrafit
