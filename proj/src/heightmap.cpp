#include "terrafit/heightmap.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "terrafit/errors.hpp"

namespace terrafit {

namespace {
constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();
}

HeightGrid rasterize(const SurfaceFn& surface, const PointCloud& cloud,
                     const HeightGridSpec& spec) {
  if (spec.n_x <= 0 || spec.n_y <= 0 || !(spec.cell_size > 0.0))
    throw ConfigError("rasterize: grid must have positive cell size and extent");

  HeightGrid grid;
  grid.spec = spec;
  const std::size_t cells = std::size_t(spec.n_x) * std::size_t(spec.n_y);
  grid.ground.assign(cells, kAbsent);
  grid.limit.assign(cells, kAbsent);
  grid.combined.assign(cells, kAbsent);

  for (int iy = 0; iy < spec.n_y; ++iy) {
    for (int ix = 0; ix < spec.n_x; ++ix) {
      const std::optional<double> g = surface(grid.cell_center(ix, iy));
      if (g) grid.ground[grid.index(ix, iy)] = *g;
    }
  }

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const int ix = int(std::floor((cloud.x1[i] - spec.origin.x) / spec.cell_size));
    const int iy = int(std::floor((cloud.x2[i] - spec.origin.y) / spec.cell_size));
    if (ix < 0 || ix >= spec.n_x || iy < 0 || iy >= spec.n_y) continue;
    const std::size_t cell = grid.index(ix, iy);
    if (std::isnan(grid.ground[cell])) continue;
    const double above = std::max(0.0, cloud.h[i] - grid.ground[cell]);
    if (std::isnan(grid.limit[cell]) || above > grid.limit[cell]) grid.limit[cell] = above;
  }

  for (std::size_t c = 0; c < cells; ++c) {
    if (std::isnan(grid.ground[c])) continue;
    grid.combined[c] = grid.ground[c] + (std::isnan(grid.limit[c]) ? 0.0 : grid.limit[c]);
  }
  return grid;
}

void save_height_grid(const std::filesystem::path& base, const HeightGrid& grid) {
  const std::filesystem::path raster = base.string() + ".raster";
  const std::filesystem::path meta = base.string() + ".meta";

  std::ofstream out(raster, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write raster " + raster.string());
  const auto write_layer = [&](const std::vector<double>& layer) {
    std::vector<float> f(layer.size());
    for (std::size_t i = 0; i < layer.size(); ++i) f[i] = float(layer[i]);
    out.write(reinterpret_cast<const char*>(f.data()), std::streamsize(f.size() * 4));
  };
  write_layer(grid.ground);
  write_layer(grid.limit);
  write_layer(grid.combined);
  if (!out) throw IoError("failed writing raster " + raster.string());

  std::ofstream m(meta, std::ios::trunc);
  if (!m) throw IoError("cannot write sidecar " + meta.string());
  m.precision(17);
  m << "origin_x " << grid.spec.origin.x << "\norigin_y " << grid.spec.origin.y
    << "\ncell_size " << grid.spec.cell_size << "\nn_x " << grid.spec.n_x << "\nn_y "
    << grid.spec.n_y << "\nlayers ground limit combined\nabsent nan\n";
}

HeightGrid load_height_grid(const std::filesystem::path& base) {
  const std::filesystem::path raster = base.string() + ".raster";
  const std::filesystem::path meta = base.string() + ".meta";

  std::ifstream m(meta);
  if (!m) throw IoError("cannot open sidecar " + meta.string());
  HeightGrid grid;
  std::string key;
  while (m >> key) {
    if (key == "origin_x") m >> grid.spec.origin.x;
    else if (key == "origin_y") m >> grid.spec.origin.y;
    else if (key == "cell_size") m >> grid.spec.cell_size;
    else if (key == "n_x") m >> grid.spec.n_x;
    else if (key == "n_y") m >> grid.spec.n_y;
    else {
      std::string rest;
      std::getline(m, rest);
    }
  }
  if (grid.spec.n_x <= 0 || grid.spec.n_y <= 0)
    throw IoError("sidecar " + meta.string() + " lacks grid dimensions");

  const std::size_t cells = std::size_t(grid.spec.n_x) * std::size_t(grid.spec.n_y);
  std::ifstream in(raster, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open raster " + raster.string());
  if (std::size_t(in.tellg()) != cells * 3 * 4)
    throw IoError("raster " + raster.string() + " size does not match the sidecar geometry");
  in.seekg(0);

  const auto read_layer = [&](std::vector<double>& layer) {
    std::vector<float> f(cells);
    in.read(reinterpret_cast<char*>(f.data()), std::streamsize(cells * 4));
    layer.assign(f.begin(), f.end());
  };
  read_layer(grid.ground);
  read_layer(grid.limit);
  read_layer(grid.combined);
  if (!in) throw IoError("failed reading raster " + raster.string());
  return grid;
}

}  // namespace terrafit
