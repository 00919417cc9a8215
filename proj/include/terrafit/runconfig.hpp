#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "terrafit/baselines.hpp"
#include "terrafit/dataset.hpp"
#include "terrafit/evaluation.hpp"
#include "terrafit/robust.hpp"
#include "terrafit/solver.hpp"

namespace terrafit {

struct DatasetConfig {
  std::string scan_dir;
  std::string label_dir;
  std::vector<std::string> scan_ids;  // empty: every *.bin in scan_dir, sorted
  int max_scans = 0;                  // 0: no limit
  std::string class_map;              // empty: builtin SemanticKITTI table
};

struct GridConfig {
  GridSpec spec;              // spacing 2 m, degree 2
  bool auto_bounds = true;    // fit bounds from the data
  Bounds2 fixed_bounds{{-50.0, -50.0}, {50.0, 50.0}};
  double margin = 0.0;        // widens auto bounds, meters
};

struct EvalConfig {
  std::uint64_t seed = 1;
  double holdout_fraction = 0.10;
  FitMode mode = FitMode::GroundOnly;
  double classify_threshold = 0.10;
  bool robustify_baselines = false;
};

struct RobustifierCell {
  Robustifier kind = Robustifier::TLS;
  double c = 0.4;
};

struct SweepConfig {
  std::vector<std::string> models{"ubs", "cubic", "plane", "calibrated"};
  std::vector<RobustifierCell> robustifiers{
      {Robustifier::OLS, 0.4}, {Robustifier::TLS, 1.0}, {Robustifier::GMC, 1.0},
      {Robustifier::TLS, 0.6}, {Robustifier::GMC, 0.6}, {Robustifier::TLS, 0.4},
      {Robustifier::GMC, 0.4}, {Robustifier::TLS, 0.2}, {Robustifier::GMC, 0.2}};
  std::vector<double> asymmetry{2.5, 2.0, 1.5, 1.0};
  std::vector<std::pair<double, double>> grid_cells{
      {2.0, 1.0}, {2.0, 2.0}, {2.0, 10.0}, {5.0, 2.0},  {5.0, 5.0},
      {5.0, 10.0}, {10.0, 1.0}, {10.0, 5.0}, {10.0, 10.0}};
};

struct BenchConfig {
  double area_x = 150.0;
  double area_y = 100.0;
  std::vector<double> spacings{1.0, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0};
  std::size_t n_points = 150000;
  int repetitions = 3;
};

struct SynthConfig {
  SynthSpec spec;
  int n_scans = 1;
};

struct RunConfig {
  int schema_version = 1;
  DatasetConfig dataset;
  GridConfig grid;
  RobustConfig robust;
  EvalConfig eval;
  CalibratedPlane calibrated{-1.73, 0.0, 0.0};
  SweepConfig sweep;
  BenchConfig bench;
  SynthConfig synth;
  std::string output_dir = "runs/out";
};

/// Parses and validates; error messages name the offending field path.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Emits the configuration with every default materialized; parsing the
/// output reproduces the configuration.
std::string serialize_run_config(const RunConfig& cfg);

/// Applies a "dotted.path=value" override onto the serialized form.
void apply_override(RunConfig& cfg, const std::string& assignment);

/// Expands one named study ("models", "robustifiers", "asymmetry", "grid")
/// into sweep cells.
std::vector<StudyCell> enumerate_study(const RunConfig& cfg, const std::string& study);

}  // namespace terrafit
