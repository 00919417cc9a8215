#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "terrafit/dataset.hpp"
#include "terrafit/errors.hpp"

using namespace terrafit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("terrafit_test_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

void write_bytes(const fs::path& p, const void* data, std::size_t n) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(static_cast<const char*>(data), std::streamsize(n));
}

}  // namespace

TEST_SUITE_BEGIN("dataset");

TEST_CASE("scan records parse as little-endian float quadruples") {
  TempDir tmp;
  const fs::path p = tmp.path / "one.bin";
  const float record[4] = {1.0f, 2.0f, -1.6f, 0.5f};
  write_bytes(p, record, sizeof record);

  const ScanData scan = read_scan(p);
  REQUIRE(scan.cloud.size() == 1);
  CHECK(scan.cloud.x1[0] == doctest::Approx(1.0));
  CHECK(scan.cloud.x2[0] == doctest::Approx(2.0));
  CHECK(scan.cloud.h[0] == doctest::Approx(-1.6));
  CHECK(scan.filtered_nonfinite == 0);
}

TEST_CASE("empty scan file yields an empty cloud") {
  TempDir tmp;
  const fs::path p = tmp.path / "empty.bin";
  write_bytes(p, "", 0);
  CHECK(read_scan(p).cloud.empty());
}

TEST_CASE("truncated scan file names the byte offset") {
  TempDir tmp;
  const fs::path p = tmp.path / "bad.bin";
  char junk[17] = {};
  write_bytes(p, junk, 17);
  CHECK_THROWS_WITH_AS(read_scan(p), doctest::Contains("byte offset 16"), IoError);
}

TEST_CASE("non-finite records are filtered and counted") {
  TempDir tmp;
  const fs::path p = tmp.path / "nan.bin";
  float records[8] = {1, 2, 3, 0, std::numeric_limits<float>::quiet_NaN(), 5, 6, 0};
  write_bytes(p, records, sizeof records);
  const ScanData scan = read_scan(p);
  CHECK(scan.cloud.size() == 1);
  CHECK(scan.filtered_nonfinite == 1);
}

TEST_CASE("label ids map to categories through the builtin table") {
  const ClassMap map = ClassMap::builtin();
  CHECK(map.category(40) == Category::Ground);   // road
  CHECK(map.category(44) == Category::Ground);   // parking
  CHECK(map.category(48) == Category::Ground);   // sidewalk
  CHECK(map.category(49) == Category::Ground);   // other-ground
  CHECK(map.category(60) == Category::Ground);   // lane-marking
  CHECK(map.category(72) == Category::Ground);   // terrain
  CHECK(map.category(0) == Category::DontCare);  // unlabeled
  CHECK(map.category(1) == Category::DontCare);  // outlier
  CHECK(map.category(10) == Category::NonGround);  // car
  CHECK(map.category(252) == Category::NonGround); // moving-car
  CHECK(map.category(31337) == Category::NonGround);  // unknown id
}

TEST_CASE("labels read the low 16 bits and enforce the record count") {
  TempDir tmp;
  const fs::path p = tmp.path / "a.label";
  // high half-word carries an instance id that must be ignored
  const std::uint32_t ids[3] = {40u | (7u << 16), 10u, 0u};
  write_bytes(p, ids, sizeof ids);

  const auto cats = read_labels(p, 3, ClassMap::builtin());
  REQUIRE(cats.size() == 3);
  CHECK(cats[0] == Category::Ground);
  CHECK(cats[1] == Category::NonGround);
  CHECK(cats[2] == Category::DontCare);

  CHECK_THROWS_AS(read_labels(p, 4, ClassMap::builtin()), IoError);
}

TEST_CASE("the bundled class map file parses and matches the builtin table") {
  const ClassMap bundled = ClassMap::from_file(fs::path(TERRAFIT_DATA_DIR) /
                                               "semantic_kitti_classes.txt");
  const ClassMap builtin = ClassMap::builtin();
  CHECK(bundled.size() == builtin.size());
  for (const std::uint16_t id : {0, 1, 10, 40, 44, 48, 49, 50, 60, 70, 72, 99, 252, 259})
    CHECK(bundled.category(id) == builtin.category(id));
}

TEST_CASE("class map files override the builtin table") {
  TempDir tmp;
  const fs::path p = tmp.path / "classes.txt";
  std::ofstream out(p);
  out << "# id name category\n"
      << "40 road nonground\n"
      << "7 custom-ground ground\n"
      << "3 noise dontcare\n";
  out.close();

  const ClassMap map = ClassMap::from_file(p);
  CHECK(map.category(40) == Category::NonGround);
  CHECK(map.category(7) == Category::Ground);
  CHECK(map.category(3) == Category::DontCare);

  std::ofstream(tmp.path / "bad.txt") << "40 road gibberish\n";
  CHECK_THROWS_AS(ClassMap::from_file(tmp.path / "bad.txt"), IoError);
  CHECK_THROWS_AS(ClassMap::from_file(tmp.path / "missing.txt"), IoError);
}

TEST_CASE("synthetic terrain respects fractions and the ground function") {
  SynthSpec spec;
  spec.terrain = SynthSpec::Terrain::Plane;
  spec.slope_x = 0.02;
  spec.n_points = 1000;
  spec.noise_sigma = 0.02;
  spec.outlier_fraction = 0.5;
  spec.seed = 4;

  const PointCloud cloud = synth_terrain(spec);
  REQUIRE(cloud.size() == 1000);
  REQUIRE(cloud.has_labels());

  std::size_t ground = 0, nonground = 0, dontcare = 0;
  for (Category c : cloud.labels) {
    if (c == Category::Ground) ++ground;
    else if (c == Category::NonGround) ++nonground;
    else ++dontcare;
  }
  CHECK(ground + nonground + dontcare == cloud.size());
  CHECK(nonground > 400);
  CHECK(nonground < 600);
  CHECK(dontcare == 0);

  std::size_t within = 0, ground_total = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (cloud.labels[i] != Category::Ground) continue;
    ++ground_total;
    if (std::abs(cloud.h[i] - spec.ground_height(cloud.x1[i], cloud.x2[i])) <=
        4.0 * spec.noise_sigma)
      ++within;
  }
  CHECK(double(within) >= 0.999 * double(ground_total));
}

TEST_CASE("outlier-free terrain is all ground") {
  SynthSpec spec;
  spec.n_points = 500;
  spec.outlier_fraction = 0.0;
  const PointCloud cloud = synth_terrain(spec);
  for (Category c : cloud.labels) CHECK(c == Category::Ground);
}

TEST_CASE("invalid fractions are rejected") {
  SynthSpec spec;
  spec.outlier_fraction = 1.0001;
  CHECK_THROWS_AS(synth_terrain(spec), ConfigError);
  spec.outlier_fraction = -0.1;
  CHECK_THROWS_AS(synth_terrain(spec), ConfigError);
  spec.outlier_fraction = 0.8;
  spec.dontcare_fraction = 0.3;
  CHECK_THROWS_AS(synth_terrain(spec), ConfigError);
}

TEST_CASE("synthetic clouds round-trip through the scan format bit-exactly") {
  TempDir tmp;
  SynthSpec spec;
  spec.n_points = 2000;
  spec.outlier_fraction = 0.3;
  spec.seed = 12;
  const PointCloud cloud = synth_terrain(spec);

  const fs::path p = tmp.path / "rt.bin";
  write_scan(p, cloud);
  const ScanData back = read_scan(p);
  REQUIRE(back.cloud.size() == cloud.size());
  CHECK(std::memcmp(back.cloud.x1.data(), cloud.x1.data(), cloud.size() * 8) == 0);
  CHECK(std::memcmp(back.cloud.x2.data(), cloud.x2.data(), cloud.size() * 8) == 0);
  CHECK(std::memcmp(back.cloud.h.data(), cloud.h.data(), cloud.size() * 8) == 0);
}

TEST_CASE("label files round-trip") {
  TempDir tmp;
  const std::vector<std::uint32_t> ids{1, 0, 0, 1, 1};
  const fs::path p = tmp.path / "pred.label";
  write_labels(p, ids);
  CHECK(read_label_ids(p, ids.size()) == ids);
}

TEST_CASE("labeled scans filter in lockstep") {
  TempDir tmp;
  const float records[12] = {1, 2, 3, 0,
                             std::numeric_limits<float>::infinity(), 0, 0, 0,
                             4, 5, 6, 0};
  const std::uint32_t ids[3] = {40, 10, 50};
  write_bytes(tmp.path / "s.bin", records, sizeof records);
  write_bytes(tmp.path / "s.label", ids, sizeof ids);

  const ScanData scan = read_labeled_scan(tmp.path / "s.bin", tmp.path / "s.label",
                                          ClassMap::builtin());
  REQUIRE(scan.cloud.size() == 2);
  CHECK(scan.filtered_nonfinite == 1);
  CHECK(scan.cloud.labels[0] == Category::Ground);
  CHECK(scan.cloud.labels[1] == Category::NonGround);  // the building survives, the inf row fell
}

TEST_CASE("surface artifacts round-trip") {
  TempDir tmp;
  ControlGrid grid({-3.0, 2.0}, 1.5, 2, 6, 5);
  std::vector<double> p(std::size_t(grid.num_control_points()));
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = 0.01 * double(i) - 0.2;
  grid = grid.with_heights(p);

  const fs::path path = tmp.path / "surface.ubs";
  save_control_grid(path, grid);
  const ControlGrid back = load_control_grid(path);
  CHECK(back.same_geometry(grid));
  CHECK(back.heights() == grid.heights());

  std::ofstream(tmp.path / "junk.ubs") << "not a surface";
  CHECK_THROWS_AS(load_control_grid(tmp.path / "junk.ubs"), IoError);
}

TEST_SUITE_END();
