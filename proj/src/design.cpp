#include "terrafit/design.hpp"

#include <string>

#include "terrafit/errors.hpp"
#include "terrafit/kernels.hpp"

namespace terrafit {

SparseDesign::SparseDesign(std::int64_t n_cols, int nnz_per_row, std::span<const BasisRow> rows)
    : n_cols_(n_cols), k_(nnz_per_row), n_rows_(rows.size()) {
  cols_.resize(n_rows_ * std::size_t(k_));
  vals_.resize(n_rows_ * std::size_t(k_));
  for (std::size_t i = 0; i < n_rows_; ++i) {
    if (rows[i].count != k_) throw ConfigError("basis row width does not match the design");
    for (int j = 0; j < k_; ++j) {
      cols_[stripe(i, j)] = rows[i].cols[j];
      vals_[stripe(i, j)] = rows[i].weights[j];
    }
  }
}

std::vector<double> SparseDesign::multiply(std::span<const double> p) const {
  if (std::int64_t(p.size()) != n_cols_) throw ConfigError("control vector length mismatch");
  std::vector<double> y(n_rows_, 0.0);
  for (std::size_t i = 0; i < n_rows_; ++i) {
    double acc = 0.0;
    for (int j = 0; j < k_; ++j) acc += vals_[stripe(i, j)] * p[cols_[stripe(i, j)]];
    y[i] = acc;
  }
  return y;
}

void SparseDesign::residuals(std::span<const double> p, std::span<const double> h,
                             std::span<double> dh) const {
  if (std::int64_t(p.size()) != n_cols_) throw ConfigError("control vector length mismatch");
  if (h.size() != n_rows_ || dh.size() != n_rows_)
    throw ConfigError("height/residual length mismatch");
  kernels::active_ops().residuals(n_rows_, k_, cols_.data(), vals_.data(), p.data(), h.data(),
                                  dh.data());
}

DesignBuild build_design(const ControlGrid& grid, std::span<const double> x1,
                         std::span<const double> x2, OutOfDomainPolicy policy) {
  if (x1.size() != x2.size()) throw ConfigError("coordinate arrays differ in length");
  if (x1.empty()) throw ConfigError("cannot build a design from an empty point set");

  const int k = (grid.degree() + 1) * (grid.degree() + 1);
  std::vector<BasisRow> rows;
  rows.reserve(x1.size());
  std::vector<std::uint32_t> kept;
  kept.reserve(x1.size());
  std::size_t dropped = 0;

  for (std::size_t i = 0; i < x1.size(); ++i) {
    const Vec2 x{x1[i], x2[i]};
    if (!grid.contains(x)) {
      if (policy == OutOfDomainPolicy::Require)
        throw DomainError("point " + std::to_string(i) + " lies outside the spline domain");
      ++dropped;
      continue;
    }
    rows.push_back(grid.basis_at(x));
    kept.push_back(std::uint32_t(i));
  }
  if (rows.empty()) throw DomainError("all points lie outside the spline domain");

  return DesignBuild{SparseDesign(grid.num_control_points(), k, rows), std::move(kept), dropped};
}

}  // namespace terrafit
