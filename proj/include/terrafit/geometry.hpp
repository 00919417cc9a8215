#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace terrafit {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double planar_distance(const Vec2& v) { return std::hypot(v.x, v.y); }

struct Bounds2 {
  Vec2 min;
  Vec2 max;

  bool contains(const Vec2& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
  }
  double width() const { return max.x - min.x; }
  double height() const { return max.y - min.y; }
};

/// Semantic grouping of a measurement for ground estimation.
enum class Category : std::uint8_t { Ground = 0, NonGround = 1, DontCare = 2 };

/// A set of range measurements: plane coordinates (x1, x2) and height h,
/// stored column-wise. Labels are optional and, when present, align 1:1
/// with the coordinate arrays.
struct PointCloud {
  std::vector<double> x1;
  std::vector<double> x2;
  std::vector<double> h;
  std::vector<Category> labels;  // empty, or size() entries

  std::size_t size() const { return h.size(); }
  bool empty() const { return h.empty(); }
  bool has_labels() const { return !labels.empty(); }

  Vec2 position(std::size_t i) const { return {x1[i], x2[i]}; }

  void push_back(double px1, double px2, double ph) {
    x1.push_back(px1);
    x2.push_back(px2);
    h.push_back(ph);
  }
  void push_back(double px1, double px2, double ph, Category c) {
    push_back(px1, px2, ph);
    labels.push_back(c);
  }

  /// Axis-aligned bounding box of the plane coordinates.
  Bounds2 bounds() const {
    Bounds2 b{{x1.empty() ? 0.0 : x1[0], x2.empty() ? 0.0 : x2[0]},
              {x1.empty() ? 0.0 : x1[0], x2.empty() ? 0.0 : x2[0]}};
    for (std::size_t i = 0; i < size(); ++i) {
      b.min.x = std::min(b.min.x, x1[i]);
      b.min.y = std::min(b.min.y, x2[i]);
      b.max.x = std::max(b.max.x, x1[i]);
      b.max.y = std::max(b.max.y, x2[i]);
    }
    return b;
  }
};

}  // namespace terrafit
