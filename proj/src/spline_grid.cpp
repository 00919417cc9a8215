#include "terrafit/spline_grid.hpp"

#include <cmath>
#include <string>

#include "terrafit/errors.hpp"

namespace terrafit {

void uniform_basis(int degree, double t, double* w) {
  w[0] = 1.0;
  for (int k = 1; k <= degree; ++k) {
    // Raise the degree in place; w[j] at level k depends on w[j-1], w[j]
    // at level k-1, so fill from high j to low.
    const double inv_k = 1.0 / k;
    for (int j = k; j >= 0; --j) {
      const double lo = (j > 0) ? (t + k - j) * w[j - 1] : 0.0;
      const double hi = (j < k) ? (j + 1 - t) * w[j] : 0.0;
      w[j] = (lo + hi) * inv_k;
    }
  }
}

ControlGrid::ControlGrid(Vec2 origin, double spacing, int degree, int n_u, int n_v)
    : origin_(origin), spacing_(spacing), degree_(degree), n_u_(n_u), n_v_(n_v) {
  if (spacing <= 0.0) throw ConfigError("control-point spacing must be positive");
  if (degree < 1 || degree > kMaxSplineDegree)
    throw ConfigError("spline degree must be in [1, " + std::to_string(kMaxSplineDegree) + "]");
  if (n_u < degree + 1 || n_v < degree + 1)
    throw ConfigError("control grid needs at least degree+1 points per axis");
  p_.assign(std::size_t(num_control_points()), 0.0);
}

ControlGrid ControlGrid::from_bounds(const Bounds2& bounds, double spacing, int degree) {
  if (spacing <= 0.0) throw ConfigError("control-point spacing must be positive");
  if (!(bounds.max.x > bounds.min.x) || !(bounds.max.y > bounds.min.y))
    throw ConfigError("degenerate bounds: max must exceed min in both axes");

  // Place the lattice so the valid domain starts exactly at bounds.min and
  // extends past bounds.max; this leaves `degree` control points beyond
  // each edge of the domain.
  const auto count_for = [&](double lo, double hi) {
    return int(std::floor((hi - lo) / spacing)) + degree + 1;
  };
  const Vec2 origin{bounds.min.x - 0.5 * (degree - 1) * spacing,
                    bounds.min.y - 0.5 * (degree - 1) * spacing};
  return ControlGrid(origin, spacing, degree, count_for(bounds.min.x, bounds.max.x),
                     count_for(bounds.min.y, bounds.max.y));
}

Bounds2 ControlGrid::valid_domain() const {
  const double off_lo = 0.5 * (degree_ - 1) * spacing_;
  return {{origin_.x + off_lo, origin_.y + off_lo},
          {origin_.x + (n_u_ - 0.5 * (degree_ + 1)) * spacing_,
           origin_.y + (n_v_ - 0.5 * (degree_ + 1)) * spacing_}};
}

namespace {

// Span index and local parameter for a knot coordinate, with a relative
// tolerance so queries sitting exactly on the domain boundary stay valid
// under roundoff.
bool locate_span(double u, int degree, int n, int& span, double& t) {
  const double tol = 1e-9 * std::max(1.0, std::abs(u));
  if (u < degree) {
    if (u < degree - tol) return false;
    u = degree;
  }
  if (u >= n) {
    if (u >= n + tol) return false;
    u = std::nextafter(double(n), 0.0);
  }
  span = std::min(int(std::floor(u)), n - 1);
  t = u - span;
  return true;
}

}  // namespace

bool ControlGrid::contains(const Vec2& x) const {
  int su, sv;
  double tu, tv;
  return locate_span(knot_coord(x.x, origin_.x), degree_, n_u_, su, tu) &&
         locate_span(knot_coord(x.y, origin_.y), degree_, n_v_, sv, tv);
}

BasisRow ControlGrid::basis_at(const Vec2& x) const {
  int su, sv;
  double tu, tv;
  if (!locate_span(knot_coord(x.x, origin_.x), degree_, n_u_, su, tu) ||
      !locate_span(knot_coord(x.y, origin_.y), degree_, n_v_, sv, tv)) {
    throw DomainError("query (" + std::to_string(x.x) + ", " + std::to_string(x.y) +
                      ") is outside the spline's valid domain");
  }

  double wu[kMaxSplineDegree + 1];
  double wv[kMaxSplineDegree + 1];
  uniform_basis(degree_, tu, wu);
  uniform_basis(degree_, tv, wv);

  BasisRow row;
  row.count = (degree_ + 1) * (degree_ + 1);
  int out = 0;
  for (int a = 0; a <= degree_; ++a) {
    const std::int64_t base = index(su - degree_ + a, sv - degree_);
    for (int b = 0; b <= degree_; ++b, ++out) {
      row.cols[out] = std::int32_t(base + b);
      row.weights[out] = wu[a] * wv[b];
    }
  }
  return row;
}

double ControlGrid::predict_height(const Vec2& x) const {
  const BasisRow row = basis_at(x);
  double acc = 0.0;
  for (int k = 0; k < row.count; ++k) acc += row.weights[k] * p_[row.cols[k]];
  return acc;
}

ControlGrid ControlGrid::with_heights(std::vector<double> heights) const {
  if (std::int64_t(heights.size()) != num_control_points())
    throw ConfigError("height vector size does not match the control lattice");
  ControlGrid out = *this;
  out.p_ = std::move(heights);
  return out;
}

bool ControlGrid::same_geometry(const ControlGrid& other) const {
  return origin_.x == other.origin_.x && origin_.y == other.origin_.y &&
         spacing_ == other.spacing_ && degree_ == other.degree_ && n_u_ == other.n_u_ &&
         n_v_ == other.n_v_;
}

}  // namespace terrafit
