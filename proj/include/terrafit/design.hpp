#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "terrafit/spline_grid.hpp"

namespace terrafit {

/// Row-sparse measurement matrix mapping control points to predicted
/// heights: one row of (degree+1)^2 basis weights per retained point.
/// Stored striped (column-of-rows) so the batched kernels can stream it.
/// Immutable after construction.
class SparseDesign {
 public:
  SparseDesign(std::int64_t n_cols, int nnz_per_row, std::span<const BasisRow> rows);

  std::size_t rows() const { return n_rows_; }
  std::int64_t cols() const { return n_cols_; }
  int nnz_per_row() const { return k_; }

  const std::int32_t* col_data() const { return cols_.data(); }
  const double* val_data() const { return vals_.data(); }

  std::int32_t col(std::size_t row, int j) const { return cols_[stripe(row, j)]; }
  double val(std::size_t row, int j) const { return vals_[stripe(row, j)]; }

  /// y = B p (row-wise dot products), mainly for tests and small batches.
  std::vector<double> multiply(std::span<const double> p) const;

  /// dh = h - B p using the active batched kernel.
  void residuals(std::span<const double> p, std::span<const double> h,
                 std::span<double> dh) const;

 private:
  std::size_t stripe(std::size_t row, int j) const { return std::size_t(j) * n_rows_ + row; }

  std::int64_t n_cols_;
  int k_;
  std::size_t n_rows_;
  std::vector<std::int32_t> cols_;
  std::vector<double> vals_;
};

enum class OutOfDomainPolicy {
  DropAndCount,  // skip points outside the grid domain, report how many
  Require,       // any out-of-domain point is an error
};

struct DesignBuild {
  SparseDesign design;
  std::vector<std::uint32_t> kept;  // input indices of retained rows, in order
  std::size_t dropped = 0;
};

/// Stacks basis rows for the given plane positions. Row order follows the
/// retained input order.
DesignBuild build_design(const ControlGrid& grid, std::span<const double> x1,
                         std::span<const double> x2,
                         OutOfDomainPolicy policy = OutOfDomainPolicy::DropAndCount);

}  // namespace terrafit
