#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "terrafit/geometry.hpp"
#include "terrafit/spline_grid.hpp"

namespace terrafit {

/// Maps dataset semantic class ids to ground/non-ground/don't-care. Ships
/// with the published SemanticKITTI id table; a plain-text file of
/// "id name category" triples overrides it. Ids absent from the map are
/// treated as NonGround.
class ClassMap {
 public:
  static ClassMap builtin();
  static ClassMap from_file(const std::filesystem::path& path);

  Category category(std::uint16_t class_id) const;
  std::size_t size() const { return table_.size(); }

 private:
  std::unordered_map<std::uint16_t, Category> table_;
};

struct ScanData {
  PointCloud cloud;
  std::size_t filtered_nonfinite = 0;
};

/// Reads a binary scan of little-endian float32 (x, y, z, intensity)
/// records; x, y become the plane coordinates and z the height. Non-finite
/// records are filtered and counted. A zero-byte file is an empty cloud;
/// a size not divisible by 16 is an error.
ScanData read_scan(const std::filesystem::path& path);

/// Writes the cloud in the same record format with zero intensity.
void write_scan(const std::filesystem::path& path, const PointCloud& cloud);

/// Reads a scan together with its label file, filtering non-finite records
/// from both streams in lockstep so labels stay aligned.
ScanData read_labeled_scan(const std::filesystem::path& scan_path,
                           const std::filesystem::path& label_path, const ClassMap& map);

/// Reads one little-endian uint32 label per point; the low 16 bits hold the
/// class id, which the map folds to a category. The file must contain
/// exactly n_points records.
std::vector<Category> read_labels(const std::filesystem::path& path, std::size_t n_points,
                                  const ClassMap& map);

/// Raw label words, for round-trips and custom encodings.
std::vector<std::uint32_t> read_label_ids(const std::filesystem::path& path,
                                          std::size_t n_points);

void write_labels(const std::filesystem::path& path, std::span<const std::uint32_t> ids);

/// Synthetic labeled terrain generator; doubles as the test oracle since
/// the true ground function stays available via ground_height().
struct SynthSpec {
  enum class Terrain { Flat, Plane, Sine, Ramp };
  enum class OutlierKind { Uniform, BiasedExp, Walls };

  Terrain terrain = Terrain::Plane;
  double base_height = 0.0;
  double slope_x = 0.0;
  double slope_y = 0.0;
  double amplitude = 0.0;      // Sine
  double wavelength_x = 30.0;  // Sine
  double wavelength_y = 40.0;  // Sine
  double curvature_x = 0.0;    // Sine: quadratic bowl/dome terms
  double curvature_y = 0.0;
  double ramp_start = 0.0;     // Ramp: slope_x applies beyond this x1

  Bounds2 area{{-50.0, -20.0}, {50.0, 20.0}};
  std::size_t n_points = 20000;
  double noise_sigma = 0.02;
  bool radial_density = true;  // concentrate samples near the origin

  double outlier_fraction = 0.0;
  OutlierKind outlier_kind = OutlierKind::BiasedExp;
  double outlier_lo = 0.05;   // Uniform/BiasedExp: offsets above ground
  double outlier_hi = 4.0;
  double outlier_mean = 1.09; // BiasedExp
  int wall_count = 12;        // Walls
  double wall_height_max = 2.5;

  double dontcare_fraction = 0.0;
  std::uint64_t seed = 1;

  double ground_height(double x1, double x2) const;
};

/// Emits exactly labeled points; coordinates are quantized through float32
/// so serializing to the scan format round-trips bit-exactly.
PointCloud synth_terrain(const SynthSpec& spec);

/// Fitted-surface artifact: an 8-byte magic, the lattice geometry, then the
/// control-point heights as little-endian float64.
void save_control_grid(const std::filesystem::path& path, const ControlGrid& grid);
ControlGrid load_control_grid(const std::filesystem::path& path);

}  // namespace terrafit
