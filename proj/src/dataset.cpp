#include "terrafit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "terrafit/errors.hpp"

namespace terrafit {

namespace {

// Published SemanticKITTI ids; moving duplicates (>= 252) share their
// static class's category.
struct BuiltinClass {
  std::uint16_t id;
  const char* name;
  Category category;
};

constexpr BuiltinClass kSemanticKitti[] = {
    {0, "unlabeled", Category::DontCare},
    {1, "outlier", Category::DontCare},
    {10, "car", Category::NonGround},
    {11, "bicycle", Category::NonGround},
    {13, "bus", Category::NonGround},
    {15, "motorcycle", Category::NonGround},
    {16, "on-rails", Category::NonGround},
    {18, "truck", Category::NonGround},
    {20, "other-vehicle", Category::NonGround},
    {30, "person", Category::NonGround},
    {31, "bicyclist", Category::NonGround},
    {32, "motorcyclist", Category::NonGround},
    {40, "road", Category::Ground},
    {44, "parking", Category::Ground},
    {48, "sidewalk", Category::Ground},
    {49, "other-ground", Category::Ground},
    {50, "building", Category::NonGround},
    {51, "fence", Category::NonGround},
    {52, "other-structure", Category::NonGround},
    {60, "lane-marking", Category::Ground},
    {70, "vegetation", Category::NonGround},
    {71, "trunk", Category::NonGround},
    {72, "terrain", Category::Ground},
    {80, "pole", Category::NonGround},
    {81, "traffic-sign", Category::NonGround},
    {99, "other-object", Category::NonGround},
    {252, "moving-car", Category::NonGround},
    {253, "moving-bicyclist", Category::NonGround},
    {254, "moving-person", Category::NonGround},
    {255, "moving-motorcyclist", Category::NonGround},
    {256, "moving-on-rails", Category::NonGround},
    {257, "moving-bus", Category::NonGround},
    {258, "moving-truck", Category::NonGround},
    {259, "moving-other-vehicle", Category::NonGround},
};

Category category_from_token(const std::string& token, const std::filesystem::path& path) {
  if (token == "ground") return Category::Ground;
  if (token == "nonground") return Category::NonGround;
  if (token == "dontcare") return Category::DontCare;
  throw IoError("class map " + path.string() + ": unknown category '" + token +
                "' (expected ground, nonground or dontcare)");
}

}  // namespace

ClassMap ClassMap::builtin() {
  ClassMap map;
  for (const BuiltinClass& c : kSemanticKitti) map.table_.emplace(c.id, c.category);
  return map;
}

ClassMap ClassMap::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open class map " + path.string());
  ClassMap map;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    long id;
    std::string name, cat;
    if (!(row >> id)) continue;  // blank line
    if (!(row >> name >> cat))
      throw IoError("class map " + path.string() + ": line " + std::to_string(line_no) +
                    " needs 'id name category'");
    if (id < 0 || id > 0xffff)
      throw IoError("class map " + path.string() + ": id " + std::to_string(id) +
                    " outside the 16-bit range");
    map.table_[std::uint16_t(id)] = category_from_token(cat, path);
  }
  if (map.table_.empty()) throw IoError("class map " + path.string() + " defines no classes");
  return map;
}

Category ClassMap::category(std::uint16_t class_id) const {
  const auto it = table_.find(class_id);
  return it == table_.end() ? Category::NonGround : it->second;
}

ScanData read_scan(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open scan " + path.string());
  const std::streamoff size = in.tellg();
  if (size % 16 != 0)
    throw IoError("scan " + path.string() + " is truncated: " + std::to_string(size) +
                  " bytes is not a multiple of the 16-byte record (stray data at byte offset " +
                  std::to_string(size - size % 16) + ")");
  in.seekg(0);

  const std::size_t n = std::size_t(size) / 16;
  std::vector<float> raw(n * 4);
  if (n > 0 && !in.read(reinterpret_cast<char*>(raw.data()), size))
    throw IoError("failed reading scan " + path.string());

  ScanData out;
  out.cloud.x1.reserve(n);
  out.cloud.x2.reserve(n);
  out.cloud.h.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const float x = raw[4 * i], y = raw[4 * i + 1], z = raw[4 * i + 2];
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
      ++out.filtered_nonfinite;
      continue;
    }
    out.cloud.push_back(double(x), double(y), double(z));
  }
  return out;
}

void write_scan(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write scan " + path.string());
  std::vector<float> raw(cloud.size() * 4, 0.0f);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    raw[4 * i] = float(cloud.x1[i]);
    raw[4 * i + 1] = float(cloud.x2[i]);
    raw[4 * i + 2] = float(cloud.h[i]);
  }
  if (!raw.empty() &&
      !out.write(reinterpret_cast<const char*>(raw.data()), std::streamsize(raw.size() * 4)))
    throw IoError("failed writing scan " + path.string());
}

ScanData read_labeled_scan(const std::filesystem::path& scan_path,
                           const std::filesystem::path& label_path, const ClassMap& map) {
  std::ifstream in(scan_path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open scan " + scan_path.string());
  const std::streamoff size = in.tellg();
  if (size % 16 != 0)
    throw IoError("scan " + scan_path.string() + " is truncated: " + std::to_string(size) +
                  " bytes is not a multiple of the 16-byte record (stray data at byte offset " +
                  std::to_string(size - size % 16) + ")");
  in.seekg(0);
  const std::size_t n = std::size_t(size) / 16;
  std::vector<float> raw(n * 4);
  if (n > 0 && !in.read(reinterpret_cast<char*>(raw.data()), size))
    throw IoError("failed reading scan " + scan_path.string());

  const std::vector<std::uint32_t> ids = read_label_ids(label_path, n);

  ScanData out;
  for (std::size_t i = 0; i < n; ++i) {
    const float x = raw[4 * i], y = raw[4 * i + 1], z = raw[4 * i + 2];
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
      ++out.filtered_nonfinite;
      continue;
    }
    out.cloud.push_back(double(x), double(y), double(z),
                        map.category(std::uint16_t(ids[i] & 0xffffu)));
  }
  return out;
}

std::vector<std::uint32_t> read_label_ids(const std::filesystem::path& path,
                                          std::size_t n_points) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open labels " + path.string());
  const std::streamoff size = in.tellg();
  if (std::size_t(size) != n_points * 4)
    throw IoError("labels " + path.string() + ": " + std::to_string(size / 4) +
                  " records do not match the scan's " + std::to_string(n_points) + " points");
  in.seekg(0);
  std::vector<std::uint32_t> ids(n_points);
  if (n_points > 0 && !in.read(reinterpret_cast<char*>(ids.data()), size))
    throw IoError("failed reading labels " + path.string());
  return ids;
}

std::vector<Category> read_labels(const std::filesystem::path& path, std::size_t n_points,
                                  const ClassMap& map) {
  const std::vector<std::uint32_t> ids = read_label_ids(path, n_points);
  std::vector<Category> out(n_points);
  for (std::size_t i = 0; i < n_points; ++i)
    out[i] = map.category(std::uint16_t(ids[i] & 0xffffu));
  return out;
}

void write_labels(const std::filesystem::path& path, std::span<const std::uint32_t> ids) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write labels " + path.string());
  if (!ids.empty() &&
      !out.write(reinterpret_cast<const char*>(ids.data()), std::streamsize(ids.size() * 4)))
    throw IoError("failed writing labels " + path.string());
}

double SynthSpec::ground_height(double x1, double x2) const {
  switch (terrain) {
    case Terrain::Flat:
      return base_height;
    case Terrain::Plane:
      return base_height + slope_x * x1 + slope_y * x2;
    case Terrain::Sine:
      return base_height + slope_x * x1 + slope_y * x2 + curvature_x * x1 * x1 +
             curvature_y * x2 * x2 +
             amplitude * std::sin(2.0 * std::numbers::pi * x1 / wavelength_x) *
                 std::sin(2.0 * std::numbers::pi * x2 / wavelength_y);
    case Terrain::Ramp:
      return base_height + slope_x * std::max(0.0, x1 - ramp_start);
  }
  return base_height;
}

PointCloud synth_terrain(const SynthSpec& spec) {
  if (spec.outlier_fraction < 0.0 || spec.outlier_fraction > 1.0)
    throw ConfigError("synth: outlier_fraction must lie in [0,1]");
  if (spec.dontcare_fraction < 0.0 || spec.dontcare_fraction > 1.0 ||
      spec.outlier_fraction + spec.dontcare_fraction > 1.0)
    throw ConfigError("synth: dontcare_fraction invalid or fractions exceed 1");
  if (!(spec.area.max.x > spec.area.min.x) || !(spec.area.max.y > spec.area.min.y))
    throw ConfigError("synth: degenerate area");

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const Vec2 center{0.5 * (spec.area.min.x + spec.area.max.x),
                    0.5 * (spec.area.min.y + spec.area.max.y)};

  const auto sample_position = [&]() -> Vec2 {
    if (!spec.radial_density) {
      return {spec.area.min.x + unit(rng) * spec.area.width(),
              spec.area.min.y + unit(rng) * spec.area.height()};
    }
    // Mixture of area-uniform and center-heavy radial draws, clipped by
    // rejection; mimics the falling sample density of a spinning scanner.
    const double r_max = 0.5 * std::hypot(spec.area.width(), spec.area.height());
    for (;;) {
      double r;
      if (unit(rng) < 0.5) {
        r = r_max * std::sqrt(unit(rng));
      } else {
        r = r_max * unit(rng) * unit(rng);
      }
      const double theta = 2.0 * std::numbers::pi * unit(rng);
      const Vec2 pos{center.x + r * std::cos(theta), center.y + r * std::sin(theta)};
      if (spec.area.contains(pos)) return pos;
    }
  };

  // Wall-style outliers cluster on box footprints with a shared height.
  struct Wall {
    Vec2 center;
    double half_x, half_y, height;
  };
  std::vector<Wall> walls;
  if (spec.outlier_kind == SynthSpec::OutlierKind::Walls) {
    for (int i = 0; i < std::max(1, spec.wall_count); ++i) {
      const Vec2 c = sample_position();
      walls.push_back({c, 0.5 + 3.0 * unit(rng), 0.5 + 3.0 * unit(rng),
                       0.5 + (spec.wall_height_max - 0.5) * unit(rng)});
    }
  }

  const auto outlier_offset = [&]() -> double {
    switch (spec.outlier_kind) {
      case SynthSpec::OutlierKind::Uniform:
        return spec.outlier_lo + (spec.outlier_hi - spec.outlier_lo) * unit(rng);
      case SynthSpec::OutlierKind::BiasedExp: {
        std::exponential_distribution<double> exp_draw(
            1.0 / std::max(1e-6, spec.outlier_mean - spec.outlier_lo));
        for (;;) {
          const double v = spec.outlier_lo + exp_draw(rng);
          if (v <= spec.outlier_hi) return v;
        }
      }
      case SynthSpec::OutlierKind::Walls:
        return 0.0;  // handled at the call site
    }
    return 0.0;
  };

  PointCloud cloud;
  cloud.x1.reserve(spec.n_points);
  cloud.x2.reserve(spec.n_points);
  cloud.h.reserve(spec.n_points);
  cloud.labels.reserve(spec.n_points);

  for (std::size_t i = 0; i < spec.n_points; ++i) {
    const double role = unit(rng);
    Vec2 pos = sample_position();
    double height;
    Category cat;
    if (role < spec.outlier_fraction) {
      cat = Category::NonGround;
      if (spec.outlier_kind == SynthSpec::OutlierKind::Walls) {
        const Wall& wall = walls[std::size_t(rng() % walls.size())];
        pos = {wall.center.x + (2.0 * unit(rng) - 1.0) * wall.half_x,
               wall.center.y + (2.0 * unit(rng) - 1.0) * wall.half_y};
        if (!spec.area.contains(pos)) pos = sample_position();
        height = spec.ground_height(pos.x, pos.y) + spec.outlier_lo +
                 unit(rng) * (wall.height - spec.outlier_lo);
      } else {
        height = spec.ground_height(pos.x, pos.y) + outlier_offset();
      }
      height += spec.noise_sigma * gauss(rng);
    } else if (role < spec.outlier_fraction + spec.dontcare_fraction) {
      cat = Category::DontCare;
      height = spec.ground_height(pos.x, pos.y) + 4.0 * (unit(rng) - 0.25);
    } else {
      cat = Category::Ground;
      height = spec.ground_height(pos.x, pos.y) + spec.noise_sigma * gauss(rng);
    }
    // Quantize through the storage type so scan files round-trip exactly.
    cloud.push_back(double(float(pos.x)), double(float(pos.y)), double(float(height)), cat);
  }
  return cloud;
}

namespace {
constexpr char kGridMagic[8] = {'U', 'B', 'S', 'F', '0', '0', '0', '1'};
}

void save_control_grid(const std::filesystem::path& path, const ControlGrid& grid) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write surface artifact " + path.string());
  out.write(kGridMagic, 8);
  const std::int32_t dims[3] = {grid.degree(), grid.n_u(), grid.n_v()};
  out.write(reinterpret_cast<const char*>(dims), sizeof dims);
  const double geo[3] = {grid.origin().x, grid.origin().y, grid.spacing()};
  out.write(reinterpret_cast<const char*>(geo), sizeof geo);
  out.write(reinterpret_cast<const char*>(grid.heights().data()),
            std::streamsize(grid.heights().size() * sizeof(double)));
  if (!out) throw IoError("failed writing surface artifact " + path.string());
}

ControlGrid load_control_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open surface artifact " + path.string());
  char magic[8];
  std::int32_t dims[3];
  double geo[3];
  if (!in.read(magic, 8) || std::memcmp(magic, kGridMagic, 8) != 0)
    throw IoError(path.string() + " is not a surface artifact (bad magic)");
  if (!in.read(reinterpret_cast<char*>(dims), sizeof dims) ||
      !in.read(reinterpret_cast<char*>(geo), sizeof geo))
    throw IoError("surface artifact " + path.string() + " is truncated");
  ControlGrid grid({geo[0], geo[1]}, geo[2], dims[0], dims[1], dims[2]);
  std::vector<double> heights(std::size_t(grid.num_control_points()));
  if (!in.read(reinterpret_cast<char*>(heights.data()),
               std::streamsize(heights.size() * sizeof(double))))
    throw IoError("surface artifact " + path.string() + " is truncated");
  return grid.with_heights(std::move(heights));
}

}  // namespace terrafit
