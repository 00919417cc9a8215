#include "terrafit/smoothness.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "terrafit/errors.hpp"

namespace terrafit {

namespace {

// Coefficients of a polynomial in the span-local parameter t, low order
// first.
using Poly = std::vector<double>;

// (c0 + c1*t) * p
Poly linear_times(const Poly& p, double c0, double c1) {
  Poly out(p.size() + 1, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i] += c0 * p[i];
    out[i + 1] += c1 * p[i];
  }
  return out;
}

Poly derivative(Poly p, int times) {
  for (int d = 0; d < times; ++d) {
    if (p.size() <= 1) return {0.0};
    Poly out(p.size() - 1);
    for (std::size_t i = 1; i < p.size(); ++i) out[i - 1] = double(i) * p[i];
    p = std::move(out);
  }
  return p;
}

double integrate_product_01(const Poly& a, const Poly& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) acc += a[i] * b[j] / double(i + j + 1);
  return acc;
}

// The degree+1 uniform-B-spline basis polynomials active on one span,
// index j weighting control point span - degree + j.
std::vector<Poly> span_basis_polys(int degree) {
  std::vector<Poly> w{{1.0}};
  for (int k = 1; k <= degree; ++k) {
    std::vector<Poly> next(k + 1);
    const double inv_k = 1.0 / k;
    for (int j = 0; j <= k; ++j) {
      Poly acc{0.0};
      if (j > 0) {
        const Poly lo = linear_times(w[j - 1], double(k - j), 1.0);
        acc.resize(std::max(acc.size(), lo.size()), 0.0);
        for (std::size_t i = 0; i < lo.size(); ++i) acc[i] += lo[i];
      }
      if (j < k) {
        const Poly hi = linear_times(w[j], double(j + 1), -1.0);
        acc.resize(std::max(acc.size(), hi.size()), 0.0);
        for (std::size_t i = 0; i < hi.size(); ++i) acc[i] += hi[i];
      }
      for (double& c : acc) c *= inv_k;
      next[j] = std::move(acc);
    }
    w = std::move(next);
  }
  return w;
}

// G_m[a][b] = integral over one span of the m-th derivative products of the
// 1D basis polynomials (in local t; axis scaling handled by the caller).
Eigen::MatrixXd derivative_gram(const std::vector<Poly>& basis, int m) {
  const int s = int(basis.size());
  Eigen::MatrixXd g(s, s);
  std::vector<Poly> d(s);
  for (int a = 0; a < s; ++a) d[a] = derivative(basis[a], m);
  for (int a = 0; a < s; ++a)
    for (int b = 0; b < s; ++b) g(a, b) = integrate_product_01(d[a], d[b]);
  return g;
}

double binomial(int n, int k) {
  double v = 1.0;
  for (int i = 1; i <= k; ++i) v *= double(n - k + i) / double(i);
  return v;
}

}  // namespace

SmoothnessOperator::SmoothnessOperator(const ControlGrid& grid, int order)
    : order_(order),
      degree_(grid.degree()),
      n_u_(grid.n_u()),
      n_v_(grid.n_v()) {
  if (order < 1) throw ConfigError("smoothness order must be at least 1");
  if (order > degree_)
    throw ConfigError("smoothness order " + std::to_string(order) +
                      " exceeds spline degree " + std::to_string(degree_));

  const int s = degree_ + 1;
  const int m = s * s;
  const auto basis = span_basis_polys(degree_);

  std::vector<Eigen::MatrixXd> grams;
  grams.reserve(order + 1);
  for (int k = 0; k <= order; ++k) grams.push_back(derivative_gram(basis, k));

  // Mixed-derivative energy of one span in lattice units, then rescaled:
  // each order-n derivative contributes d_C^-n, the area element d_C^2.
  const double scale = std::pow(grid.spacing(), 2.0 - 2.0 * order);
  cell_stencil_ = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k <= order; ++k) {
    const double coef = binomial(order, k) * scale;
    const Eigen::MatrixXd& gu = grams[std::size_t(k)];
    const Eigen::MatrixXd& gv = grams[std::size_t(order - k)];
    for (int a = 0; a < s; ++a)
      for (int b = 0; b < s; ++b)
        for (int c = 0; c < s; ++c)
          for (int e = 0; e < s; ++e)
            cell_stencil_(a * s + b, c * s + e) += coef * gu(a, c) * gv(b, e);
  }
  cell_stencil_ = 0.5 * (cell_stencil_ + cell_stencil_.transpose()).eval();

  // Factor the per-cell energy into stacked rows: K = R^T R with one row per
  // non-null eigendirection.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cell_stencil_);
  const double lambda_max = eig.eigenvalues().maxCoeff();
  int rank = 0;
  for (int i = 0; i < m; ++i)
    if (eig.eigenvalues()(i) > 1e-12 * lambda_max) ++rank;
  row_stencil_.resize(rank, m);
  for (int i = m - rank, r = 0; i < m; ++i, ++r)
    row_stencil_.row(r) = std::sqrt(eig.eigenvalues()(i)) * eig.eigenvectors().col(i).transpose();

  const int spans_u = n_u_ - degree_;
  const int spans_v = n_v_ - degree_;
  cells_ = std::size_t(spans_u) * std::size_t(spans_v);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(cells_ * std::size_t(m) * std::size_t(m));
  for_each_cell([&](std::span<const std::int64_t> idx) {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        trips.emplace_back(int(idx[i]), int(idx[j]), cell_stencil_(i, j));
  });
  gram_.resize(grid.num_control_points(), grid.num_control_points());
  gram_.setFromTriplets(trips.begin(), trips.end());
  gram_.makeCompressed();
}

template <typename Fn>
void SmoothnessOperator::for_each_cell(Fn&& fn) const {
  const int s = degree_ + 1;
  std::vector<std::int64_t> idx(std::size_t(s) * s);
  for (int cu = 0; cu < n_u_ - degree_; ++cu) {
    for (int cv = 0; cv < n_v_ - degree_; ++cv) {
      for (int a = 0; a < s; ++a)
        for (int b = 0; b < s; ++b)
          idx[std::size_t(a) * s + b] = std::int64_t(cu + a) * n_v_ + (cv + b);
      fn(std::span<const std::int64_t>(idx));
    }
  }
}

double SmoothnessOperator::penalty_value(std::span<const double> p) const {
  if (std::int64_t(p.size()) != gram_.rows())
    throw ConfigError("control vector length does not match the smoothness operator");
  Eigen::Map<const Eigen::VectorXd> v(p.data(), Eigen::Index(p.size()));
  return v.dot(gram_ * v);
}

double SmoothnessOperator::penalty_via_rows(std::span<const double> p) const {
  if (std::int64_t(p.size()) != gram_.rows())
    throw ConfigError("control vector length does not match the smoothness operator");
  const int m = int(cell_stencil_.rows());
  double acc = 0.0;
  Eigen::VectorXd local(m);
  for_each_cell([&](std::span<const std::int64_t> idx) {
    for (int i = 0; i < m; ++i) local(i) = p[std::size_t(idx[i])];
    acc += (row_stencil_ * local).squaredNorm();
  });
  return acc;
}

std::vector<BasisRow> SmoothnessOperator::rows() const {
  const int m = int(cell_stencil_.rows());
  const int rank = int(row_stencil_.rows());
  std::vector<BasisRow> out;
  out.reserve(n_rows());
  for_each_cell([&](std::span<const std::int64_t> idx) {
    for (int r = 0; r < rank; ++r) {
      BasisRow row;
      row.count = m;
      for (int i = 0; i < m; ++i) {
        row.cols[i] = std::int32_t(idx[i]);
        row.weights[i] = row_stencil_(r, i);
      }
      out.push_back(row);
    }
  });
  return out;
}

SmoothnessOperator build_smoothness(const ControlGrid& grid, int order) {
  return SmoothnessOperator(grid, order);
}

}  // namespace terrafit
