#pragma once

#include <filesystem>
#include <vector>

#include "terrafit/evaluation.hpp"
#include "terrafit/geometry.hpp"

namespace terrafit {

struct HeightGridSpec {
  Vec2 origin;            // lower-left corner of cell (0,0)
  double cell_size = 0.5;
  int n_x = 0;
  int n_y = 0;
};

/// Combined height map: fitted ground height per cell, the maximum observed
/// reflection height above ground in cells with returns (absent otherwise,
/// stored as NaN), and their sum.
struct HeightGrid {
  HeightGridSpec spec;
  std::vector<double> ground;    // NaN where the surface is undefined
  std::vector<double> limit;     // NaN where a cell saw no returns
  std::vector<double> combined;  // ground + limit, or ground alone

  std::size_t index(int ix, int iy) const {
    return std::size_t(iy) * std::size_t(spec.n_x) + std::size_t(ix);
  }
  Vec2 cell_center(int ix, int iy) const {
    return {spec.origin.x + (ix + 0.5) * spec.cell_size,
            spec.origin.y + (iy + 0.5) * spec.cell_size};
  }
};

/// Ground layer sampled at cell centers; limit layer from per-cell maxima of
/// point height above the cell's ground, clamped at 0. Points outside the
/// raster are ignored.
HeightGrid rasterize(const SurfaceFn& surface, const PointCloud& cloud,
                     const HeightGridSpec& spec);

/// base.raster: float32 little-endian, layers ground/limit/combined, row
/// major within a layer. base.meta: text sidecar with the geometry.
void save_height_grid(const std::filesystem::path& base, const HeightGrid& grid);

HeightGrid load_height_grid(const std::filesystem::path& base);

}  // namespace terrafit
