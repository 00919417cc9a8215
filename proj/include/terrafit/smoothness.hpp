#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <span>
#include <vector>

#include "terrafit/spline_grid.hpp"

namespace terrafit {

/// Quadratic smoothness penalty on the control points: the integral of the
/// squared order-n surface derivatives over the spline's valid domain,
///
///   sum_k binom(n,k) integral (d^n s / du^k dv^(n-k))^2 du dv,
///
/// assembled per span from closed-form integrals of the 1D basis-derivative
/// products. Exposed both as stacked linear rows B_S (penalty = |B_S p|^2)
/// and as the Gram matrix B_S^T B_S the solver folds into its normal
/// equations. The order-2 penalty vanishes exactly on affine height fields.
/// Immutable after construction and safe to share across threads.
class SmoothnessOperator {
 public:
  SmoothnessOperator(const ControlGrid& grid, int order);

  int order() const { return order_; }
  std::int64_t n_cols() const { return gram_.rows(); }
  std::size_t n_rows() const { return cells_ * std::size_t(row_stencil_.rows()); }

  const Eigen::SparseMatrix<double>& gram() const { return gram_; }

  /// p^T Gram p.
  double penalty_value(std::span<const double> p) const;

  /// sum of squared stacked-row responses; agrees with penalty_value up to
  /// roundoff.
  double penalty_via_rows(std::span<const double> p) const;

  /// Materializes the stacked rows of B_S as generic sparse rows.
  std::vector<BasisRow> rows() const;

 private:
  int order_;
  int degree_;
  int n_u_;
  int n_v_;
  std::size_t cells_;
  Eigen::MatrixXd cell_stencil_;  // (degree+1)^2 square, PSD
  Eigen::MatrixXd row_stencil_;   // rank x (degree+1)^2, cell_stencil = R^T R
  Eigen::SparseMatrix<double> gram_;

  template <typename Fn>
  void for_each_cell(Fn&& fn) const;
};

/// Errors if order > degree (the required derivative does not exist) or
/// order < 1.
SmoothnessOperator build_smoothness(const ControlGrid& grid, int order = 2);

}  // namespace terrafit
