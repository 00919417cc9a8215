#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "terrafit/errors.hpp"
#include "terrafit/heightmap.hpp"

using namespace terrafit;
namespace fs = std::filesystem;

namespace {

SurfaceFn flat_surface(double z) {
  return [z](const Vec2&) -> std::optional<double> { return z; };
}

HeightGridSpec small_spec() {
  HeightGridSpec spec;
  spec.origin = {0.0, 0.0};
  spec.cell_size = 1.0;
  spec.n_x = 10;
  spec.n_y = 6;
  return spec;
}

}  // namespace

TEST_SUITE_BEGIN("heightmap");

TEST_CASE("empty cloud leaves the limit layer absent everywhere") {
  const HeightGrid grid = rasterize(flat_surface(0.2), PointCloud{}, small_spec());
  for (std::size_t c = 0; c < grid.limit.size(); ++c) {
    CHECK(std::isnan(grid.limit[c]));
    CHECK(grid.ground[c] == doctest::Approx(0.2));
    CHECK(grid.combined[c] == doctest::Approx(0.2));
  }
}

TEST_CASE("a single return sets its cell's height limit") {
  PointCloud cloud;
  cloud.push_back(3.5, 2.5, 1.7);
  const HeightGrid grid = rasterize(flat_surface(0.0), cloud, small_spec());
  CHECK(grid.limit[grid.index(3, 2)] == doctest::Approx(1.7));
  CHECK(grid.combined[grid.index(3, 2)] == doctest::Approx(1.7));
  CHECK(std::isnan(grid.limit[grid.index(4, 2)]));
}

TEST_CASE("points below ground clamp to zero instead of negative limits") {
  PointCloud cloud;
  cloud.push_back(1.5, 1.5, -0.8);
  const HeightGrid grid = rasterize(flat_surface(0.0), cloud, small_spec());
  CHECK(grid.limit[grid.index(1, 1)] == 0.0);
  CHECK(grid.combined[grid.index(1, 1)] == 0.0);
}

TEST_CASE("combined never drops below ground and equals it without returns") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coord(0.0, 10.0);
  std::uniform_real_distribution<double> height(-1.0, 3.0);
  PointCloud cloud;
  for (int i = 0; i < 500; ++i) cloud.push_back(coord(rng), coord(rng) * 0.6, height(rng));

  const HeightGrid grid = rasterize(flat_surface(0.1), cloud, small_spec());
  for (std::size_t c = 0; c < grid.combined.size(); ++c) {
    CHECK(grid.combined[c] >= grid.ground[c] - 1e-12);
    if (std::isnan(grid.limit[c])) CHECK(grid.combined[c] == grid.ground[c]);
  }
}

TEST_CASE("rasterization is permutation invariant") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> coord(0.0, 10.0);
  std::uniform_real_distribution<double> height(-1.0, 3.0);
  PointCloud cloud;
  for (int i = 0; i < 300; ++i) cloud.push_back(coord(rng), coord(rng) * 0.6, height(rng));

  PointCloud shuffled;
  std::vector<std::size_t> order(cloud.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t i : order) shuffled.push_back(cloud.x1[i], cloud.x2[i], cloud.h[i]);

  const HeightGrid a = rasterize(flat_surface(0.0), cloud, small_spec());
  const HeightGrid b = rasterize(flat_surface(0.0), shuffled, small_spec());
  for (std::size_t c = 0; c < a.limit.size(); ++c) {
    if (std::isnan(a.limit[c])) {
      CHECK(std::isnan(b.limit[c]));
    } else {
      CHECK(a.limit[c] == b.limit[c]);
    }
  }
}

TEST_CASE("a box on flat ground shows up in the limit layer") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PointCloud cloud;
  // ground returns everywhere
  for (int i = 0; i < 4000; ++i)
    cloud.push_back(10.0 * unit(rng), 6.0 * unit(rng), 0.005 * (unit(rng) - 0.5));
  // a 2 m box with footprint [4,6] x [2,4]
  for (int i = 0; i < 1000; ++i)
    cloud.push_back(4.0 + 2.0 * unit(rng), 2.0 + 2.0 * unit(rng), 2.0 * unit(rng));

  const HeightGrid grid = rasterize(flat_surface(0.0), cloud, small_spec());
  // cells fully under the box footprint
  CHECK(grid.limit[grid.index(4, 2)] > 1.5);
  CHECK(grid.limit[grid.index(5, 3)] > 1.5);
  // far-away road cells carry only the ground jitter
  CHECK(grid.limit[grid.index(0, 0)] < 0.05);
  CHECK(grid.limit[grid.index(9, 5)] < 0.05);
}

TEST_CASE("zero-area grids are rejected") {
  HeightGridSpec spec = small_spec();
  spec.n_x = 0;
  CHECK_THROWS_AS(rasterize(flat_surface(0.0), PointCloud{}, spec), ConfigError);
  spec = small_spec();
  spec.cell_size = 0.0;
  CHECK_THROWS_AS(rasterize(flat_surface(0.0), PointCloud{}, spec), ConfigError);
}

TEST_CASE("raster files round-trip through the sidecar") {
  PointCloud cloud;
  cloud.push_back(3.5, 2.5, 1.7);
  cloud.push_back(8.25, 4.75, 0.4);
  const HeightGrid grid = rasterize(flat_surface(0.25), cloud, small_spec());

  const fs::path base = fs::temp_directory_path() / "terrafit_raster_rt";
  save_height_grid(base, grid);
  const HeightGrid back = load_height_grid(base);
  CHECK(back.spec.n_x == grid.spec.n_x);
  CHECK(back.spec.n_y == grid.spec.n_y);
  CHECK(back.spec.cell_size == grid.spec.cell_size);
  for (std::size_t c = 0; c < grid.combined.size(); ++c) {
    if (std::isnan(grid.limit[c])) {
      CHECK(std::isnan(back.limit[c]));
    } else {
      CHECK(back.limit[c] == doctest::Approx(grid.limit[c]).epsilon(1e-6));
    }
    CHECK(back.combined[c] == doctest::Approx(grid.combined[c]).epsilon(1e-6));
  }
  fs::remove(base.string() + ".raster");
  fs::remove(base.string() + ".meta");
}

TEST_SUITE_END();
