#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "terrafit/baselines.hpp"
#include "terrafit/geometry.hpp"
#include "terrafit/robust.hpp"
#include "terrafit/solver.hpp"

namespace terrafit {

/// Height query against any fitted ground model; nullopt outside the
/// model's domain.
using SurfaceFn = std::function<std::optional<double>(const Vec2&)>;

SurfaceFn surface_fn(const ControlGrid& grid);
SurfaceFn surface_fn(const PolynomialSurface& poly);
SurfaceFn surface_fn(const CalibratedPlane& plane);

enum class FitMode { GroundOnly, AllPoints };

std::string to_string(FitMode mode);
FitMode fit_mode_from_string(const std::string& name);

struct SplitConfig {
  std::uint64_t seed = 1;
  double fraction = 0.10;
  FitMode mode = FitMode::GroundOnly;
};

struct Split {
  PointCloud train;       // ground remainder, plus non-ground in AllPoints mode
  PointCloud validation;  // held-out ground points
};

/// Uniformly samples the configured fraction of ground points into the
/// validation set; don't-care points never enter either side. Deterministic
/// per seed.
Split holdout_split(const PointCloud& cloud, const SplitConfig& cfg);

/// Absolute height error, overall and averaged within 5 m planar-distance
/// intervals covering [0, 50) m. Bins without samples stay absent (count 0,
/// no mean); farther points count toward the overall mean only.
struct EvalReport {
  static constexpr int kBins = 10;
  static constexpr double kBinWidth = 5.0;

  std::string model;
  double mean_abs_error = 0.0;
  std::size_t count = 0;
  std::size_t skipped_out_of_domain = 0;
  std::array<double, kBins> bin_mean{};   // valid only where bin_count > 0
  std::array<std::size_t, kBins> bin_count{};
};

EvalReport abs_error_report(const SurfaceFn& surface, const PointCloud& validation,
                            const std::string& model_name = "");

/// Sample-count-weighted merge of per-scan reports.
EvalReport merge_reports(const std::vector<EvalReport>& reports);

struct Histogram {
  double bin_width = 0.1;
  double lo_edge = 0.0;                 // left edge of bin 0
  std::vector<double> frequency;        // sums to 1
  double mean = 0.0;
  std::size_t count = 0;
};

/// Relative-frequency histogram of surface-to-point height differences
/// (positive above the surface) over the given points.
Histogram outlier_histogram(const SurfaceFn& surface, const PointCloud& nonground,
                            double bin_width = 0.1);

struct Classification {
  std::vector<std::uint8_t> is_ground;  // 1 ground, 0 obstacle
  std::size_t n_ground = 0;
  std::size_t n_obstacle = 0;
  std::size_t n_out_of_domain = 0;      // flagged obstacle
};

/// Ground iff |h - surface(x)| < threshold; out-of-domain points are
/// obstacles and counted separately.
Classification classify_ground(const SurfaceFn& surface, const PointCloud& cloud,
                               double threshold = 0.10);

enum class ModelKind { Ubs, Cubic, Plane, Calibrated };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// One configuration of a study sweep.
struct StudyCell {
  std::string study;
  std::string label;  // key=value listing for the results table
  ModelKind model = ModelKind::Ubs;
  FitMode mode = FitMode::GroundOnly;
  RobustConfig robust;
  GridSpec grid;
  bool robustify_baselines = false;
};

struct SweepRow {
  StudyCell cell;
  std::optional<EvalReport> report;  // empty on failure
  std::string error;
};

struct SweepContext {
  SplitConfig split;
  CalibratedPlane calibrated;
  double bounds_margin = 0.0;
};

/// Fits one cell on one scan's training split and evaluates on its
/// validation split.
EvalReport run_cell_on_scan(const StudyCell& cell, const PointCloud& scan,
                            const SweepContext& ctx, std::uint64_t scan_seed);

/// Runs every cell over all scans, aggregating per cell; per-cell failures
/// are recorded and the sweep continues.
std::vector<SweepRow> sweep(const std::vector<StudyCell>& cells,
                            const std::vector<PointCloud>& scans, const SweepContext& ctx);

/// Flat tab-separated table: one row per (cell, bin) plus an "all" row.
std::string sweep_table(const std::vector<SweepRow>& rows);

}  // namespace terrafit
