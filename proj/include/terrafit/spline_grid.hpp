#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "terrafit/geometry.hpp"

namespace terrafit {

/// Highest supported spline degree per axis.
inline constexpr int kMaxSplineDegree = 4;

/// Basis weights of one surface query: the (degree+1)^2 control points
/// supporting the query and their tensor-product weights. Weights are
/// nonnegative and sum to 1 anywhere inside the grid's valid domain.
struct BasisRow {
  static constexpr int kMaxSupport = (kMaxSplineDegree + 1) * (kMaxSplineDegree + 1);

  std::array<std::int32_t, kMaxSupport> cols{};
  std::array<double, kMaxSupport> weights{};
  int count = 0;
};

/// Evaluates the degree+1 uniform B-spline basis values on a knot span at
/// local parameter t in [0,1). w must hold degree+1 entries; w[j] weights
/// the control point (span - degree + j).
void uniform_basis(int degree, double t, double* w);

/// Uniform tensor-product B-spline surface over a rectangular control-point
/// lattice. Control point (i,j) sits at origin + (i,j)*spacing; queries are
/// valid where a full (degree+1)^2 support exists. Immutable after
/// construction; fitting produces a new grid via with_heights().
class ControlGrid {
 public:
  ControlGrid(Vec2 origin, double spacing, int degree, int n_u, int n_v);

  /// Builds a grid whose valid evaluation domain covers [min, max] of
  /// `bounds`, with the control lattice extended degree spans beyond each
  /// side so every in-bounds query has full basis support.
  static ControlGrid from_bounds(const Bounds2& bounds, double spacing, int degree);

  int degree() const { return degree_; }
  double spacing() const { return spacing_; }
  Vec2 origin() const { return origin_; }
  int n_u() const { return n_u_; }
  int n_v() const { return n_v_; }
  std::int64_t num_control_points() const { return std::int64_t(n_u_) * n_v_; }

  const std::vector<double>& heights() const { return p_; }
  double height(int iu, int iv) const { return p_[index(iu, iv)]; }
  std::int64_t index(int iu, int iv) const { return std::int64_t(iu) * n_v_ + iv; }

  Vec2 control_position(int iu, int iv) const {
    return {origin_.x + iu * spacing_, origin_.y + iv * spacing_};
  }

  /// Half-open valid evaluation domain [lo, hi).
  Bounds2 valid_domain() const;
  bool contains(const Vec2& x) const;

  /// Tensor-product basis at x. Throws DomainError outside the valid domain.
  BasisRow basis_at(const Vec2& x) const;

  /// Surface height <basis_at(x), p>. Throws DomainError outside the domain.
  double predict_height(const Vec2& x) const;

  /// Same geometry, new control-point heights.
  ControlGrid with_heights(std::vector<double> heights) const;

  bool same_geometry(const ControlGrid& other) const;

 private:
  // Knot coordinate of x along one axis; control point i has greatest
  // influence at knot coordinate i + (degree+1)/2.
  double knot_coord(double x, double o) const {
    return (x - o) / spacing_ + 0.5 * (degree_ + 1);
  }

  Vec2 origin_;
  double spacing_;
  int degree_;
  int n_u_;
  int n_v_;
  std::vector<double> p_;
};

}  // namespace terrafit
