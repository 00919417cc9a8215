#include "terrafit/runconfig.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "terrafit/errors.hpp"

namespace terrafit {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config field '" + path + "': " + what);
}

template <typename T>
void get_to(const json& node, const std::string& path, const char* key, T& out) {
  if (!node.contains(key)) return;
  try {
    node.at(key).get_to(out);
  } catch (const json::exception& e) {
    fail(path + "." + key, e.what());
  }
}

std::string terrain_to_string(SynthSpec::Terrain t) {
  switch (t) {
    case SynthSpec::Terrain::Flat: return "flat";
    case SynthSpec::Terrain::Plane: return "plane";
    case SynthSpec::Terrain::Sine: return "sine";
    case SynthSpec::Terrain::Ramp: return "ramp";
  }
  return "?";
}

SynthSpec::Terrain terrain_from_string(const std::string& s, const std::string& path) {
  if (s == "flat") return SynthSpec::Terrain::Flat;
  if (s == "plane") return SynthSpec::Terrain::Plane;
  if (s == "sine") return SynthSpec::Terrain::Sine;
  if (s == "ramp") return SynthSpec::Terrain::Ramp;
  fail(path, "unknown terrain '" + s + "'");
}

std::string outlier_kind_to_string(SynthSpec::OutlierKind k) {
  switch (k) {
    case SynthSpec::OutlierKind::Uniform: return "uniform";
    case SynthSpec::OutlierKind::BiasedExp: return "biased_exp";
    case SynthSpec::OutlierKind::Walls: return "walls";
  }
  return "?";
}

SynthSpec::OutlierKind outlier_kind_from_string(const std::string& s, const std::string& path) {
  if (s == "uniform") return SynthSpec::OutlierKind::Uniform;
  if (s == "biased_exp") return SynthSpec::OutlierKind::BiasedExp;
  if (s == "walls") return SynthSpec::OutlierKind::Walls;
  fail(path, "unknown outlier kind '" + s + "'");
}

void parse_dataset(const json& node, DatasetConfig& out) {
  get_to(node, "dataset", "scan_dir", out.scan_dir);
  get_to(node, "dataset", "label_dir", out.label_dir);
  get_to(node, "dataset", "scan_ids", out.scan_ids);
  get_to(node, "dataset", "max_scans", out.max_scans);
  get_to(node, "dataset", "class_map", out.class_map);
  if (out.max_scans < 0) fail("dataset.max_scans", "must be >= 0");
}

void parse_grid(const json& node, GridConfig& out) {
  get_to(node, "grid", "control_point_distance", out.spec.spacing);
  get_to(node, "grid", "degree", out.spec.degree);
  get_to(node, "grid", "bounds_margin", out.margin);
  if (node.contains("bounds")) {
    const json& b = node.at("bounds");
    if (b.is_string() && b.get<std::string>() == "auto") {
      out.auto_bounds = true;
    } else if (b.is_array() && b.size() == 4) {
      out.auto_bounds = false;
      try {
        out.fixed_bounds = {{b.at(0).get<double>(), b.at(1).get<double>()},
                            {b.at(2).get<double>(), b.at(3).get<double>()}};
      } catch (const json::exception& e) {
        fail("grid.bounds", e.what());
      }
    } else {
      fail("grid.bounds", "expected \"auto\" or [min_x, min_y, max_x, max_y]");
    }
  }
  if (!(out.spec.spacing > 0.0)) fail("grid.control_point_distance", "must be > 0");
  if (out.spec.degree < 1 || out.spec.degree > kMaxSplineDegree)
    fail("grid.degree", "must lie in [1, " + std::to_string(kMaxSplineDegree) + "]");
  if (out.margin < 0.0) fail("grid.bounds_margin", "must be >= 0");
}

void parse_robust(const json& node, RobustConfig& out) {
  std::string kind = to_string(out.robustifier);
  get_to(node, "robust", "robustifier", kind);
  try {
    out.robustifier = robustifier_from_string(kind);
  } catch (const ConfigError& e) {
    fail("robust.robustifier", e.what());
  }
  get_to(node, "robust", "c", out.c);
  get_to(node, "robust", "mu0", out.mu0);
  get_to(node, "robust", "alpha", out.alpha);
  get_to(node, "robust", "iterations", out.max_iters);
  get_to(node, "robust", "r_asymm", out.r_asymm);
  get_to(node, "robust", "smoothness_weight", out.w_smooth);
  get_to(node, "robust", "smoothness_order", out.smoothness_order);
  get_to(node, "robust", "ridge", out.ridge_eps);
  try {
    out.finalize();
  } catch (const ConfigError& e) {
    fail("robust", e.what());
  }
}

void parse_eval(const json& node, EvalConfig& out) {
  get_to(node, "evaluation", "seed", out.seed);
  get_to(node, "evaluation", "holdout_fraction", out.holdout_fraction);
  get_to(node, "evaluation", "classify_threshold", out.classify_threshold);
  get_to(node, "evaluation", "robustify_baselines", out.robustify_baselines);
  if (node.contains("mode")) {
    try {
      out.mode = fit_mode_from_string(node.at("mode").get<std::string>());
    } catch (const std::exception& e) {
      fail("evaluation.mode", e.what());
    }
  }
  if (!(out.holdout_fraction > 0.0) || !(out.holdout_fraction < 1.0))
    fail("evaluation.holdout_fraction", "must lie strictly between 0 and 1");
  if (!(out.classify_threshold > 0.0)) fail("evaluation.classify_threshold", "must be > 0");
}

void parse_synth(const json& node, SynthConfig& out) {
  SynthSpec& s = out.spec;
  if (node.contains("terrain"))
    s.terrain = terrain_from_string(node.at("terrain").get<std::string>(), "synth.terrain");
  get_to(node, "synth", "base_height", s.base_height);
  get_to(node, "synth", "slope_x", s.slope_x);
  get_to(node, "synth", "slope_y", s.slope_y);
  get_to(node, "synth", "amplitude", s.amplitude);
  get_to(node, "synth", "wavelength_x", s.wavelength_x);
  get_to(node, "synth", "wavelength_y", s.wavelength_y);
  get_to(node, "synth", "curvature_x", s.curvature_x);
  get_to(node, "synth", "curvature_y", s.curvature_y);
  get_to(node, "synth", "ramp_start", s.ramp_start);
  if (node.contains("area")) {
    const json& a = node.at("area");
    if (!a.is_array() || a.size() != 4) fail("synth.area", "expected [min_x, min_y, max_x, max_y]");
    s.area = {{a.at(0).get<double>(), a.at(1).get<double>()},
              {a.at(2).get<double>(), a.at(3).get<double>()}};
  }
  get_to(node, "synth", "n_points", s.n_points);
  get_to(node, "synth", "noise_sigma", s.noise_sigma);
  get_to(node, "synth", "radial_density", s.radial_density);
  get_to(node, "synth", "outlier_fraction", s.outlier_fraction);
  if (node.contains("outlier_kind"))
    s.outlier_kind =
        outlier_kind_from_string(node.at("outlier_kind").get<std::string>(), "synth.outlier_kind");
  get_to(node, "synth", "outlier_lo", s.outlier_lo);
  get_to(node, "synth", "outlier_hi", s.outlier_hi);
  get_to(node, "synth", "outlier_mean", s.outlier_mean);
  get_to(node, "synth", "wall_count", s.wall_count);
  get_to(node, "synth", "wall_height_max", s.wall_height_max);
  get_to(node, "synth", "dontcare_fraction", s.dontcare_fraction);
  get_to(node, "synth", "seed", s.seed);
  get_to(node, "synth", "n_scans", out.n_scans);
  if (out.n_scans < 1) fail("synth.n_scans", "must be >= 1");
}

void parse_sweep(const json& node, SweepConfig& out) {
  get_to(node, "sweep", "models", out.models);
  for (const std::string& m : out.models) model_kind_from_string(m);
  if (node.contains("robustifiers")) {
    out.robustifiers.clear();
    for (const json& cell : node.at("robustifiers")) {
      RobustifierCell rc;
      if (!cell.contains("kind")) fail("sweep.robustifiers", "each cell needs a 'kind'");
      rc.kind = robustifier_from_string(cell.at("kind").get<std::string>());
      if (cell.contains("c")) rc.c = cell.at("c").get<double>();
      out.robustifiers.push_back(rc);
    }
  }
  get_to(node, "sweep", "asymmetry", out.asymmetry);
  if (node.contains("grid_cells")) {
    out.grid_cells.clear();
    for (const json& cell : node.at("grid_cells")) {
      if (!cell.is_array() || cell.size() != 2)
        fail("sweep.grid_cells", "each cell is [control_point_distance, smoothness_weight]");
      out.grid_cells.emplace_back(cell.at(0).get<double>(), cell.at(1).get<double>());
    }
  }
}

void parse_bench(const json& node, BenchConfig& out) {
  get_to(node, "bench", "area_x", out.area_x);
  get_to(node, "bench", "area_y", out.area_y);
  get_to(node, "bench", "spacings", out.spacings);
  get_to(node, "bench", "n_points", out.n_points);
  get_to(node, "bench", "repetitions", out.repetitions);
  if (out.repetitions < 1) fail("bench.repetitions", "must be >= 1");
  if (out.spacings.empty()) fail("bench.spacings", "must not be empty");
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be a JSON object");

  RunConfig cfg;
  get_to(root, "", "schema_version", cfg.schema_version);
  if (cfg.schema_version != 1)
    fail("schema_version", "unsupported version " + std::to_string(cfg.schema_version));

  if (root.contains("dataset")) parse_dataset(root.at("dataset"), cfg.dataset);
  if (root.contains("grid")) parse_grid(root.at("grid"), cfg.grid);
  if (root.contains("robust")) parse_robust(root.at("robust"), cfg.robust);
  else cfg.robust.finalize();
  if (root.contains("evaluation")) parse_eval(root.at("evaluation"), cfg.eval);
  if (root.contains("calibrated_plane")) {
    const json& cp = root.at("calibrated_plane");
    get_to(cp, "calibrated_plane", "offset", cfg.calibrated.offset);
    get_to(cp, "calibrated_plane", "slope_x", cfg.calibrated.slope_x);
    get_to(cp, "calibrated_plane", "slope_y", cfg.calibrated.slope_y);
  }
  if (root.contains("sweep")) parse_sweep(root.at("sweep"), cfg.sweep);
  if (root.contains("synth")) parse_synth(root.at("synth"), cfg.synth);
  if (root.contains("bench")) parse_bench(root.at("bench"), cfg.bench);
  get_to(root, "", "output_dir", cfg.output_dir);
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string serialize_run_config(const RunConfig& cfg) {
  json root;
  root["schema_version"] = cfg.schema_version;
  root["dataset"] = {{"scan_dir", cfg.dataset.scan_dir},
                     {"label_dir", cfg.dataset.label_dir},
                     {"scan_ids", cfg.dataset.scan_ids},
                     {"max_scans", cfg.dataset.max_scans},
                     {"class_map", cfg.dataset.class_map}};
  json grid = {{"control_point_distance", cfg.grid.spec.spacing},
               {"degree", cfg.grid.spec.degree},
               {"bounds_margin", cfg.grid.margin}};
  if (cfg.grid.auto_bounds) {
    grid["bounds"] = "auto";
  } else {
    grid["bounds"] = {cfg.grid.fixed_bounds.min.x, cfg.grid.fixed_bounds.min.y,
                      cfg.grid.fixed_bounds.max.x, cfg.grid.fixed_bounds.max.y};
  }
  root["grid"] = grid;
  root["robust"] = {{"robustifier", to_string(cfg.robust.robustifier)},
                    {"c", cfg.robust.c},
                    {"mu0", cfg.robust.mu0},
                    {"alpha", cfg.robust.alpha},
                    {"iterations", cfg.robust.max_iters},
                    {"r_asymm", cfg.robust.r_asymm},
                    {"smoothness_weight", cfg.robust.w_smooth},
                    {"smoothness_order", cfg.robust.smoothness_order},
                    {"ridge", cfg.robust.ridge_eps}};
  root["evaluation"] = {{"seed", cfg.eval.seed},
                        {"holdout_fraction", cfg.eval.holdout_fraction},
                        {"mode", to_string(cfg.eval.mode)},
                        {"classify_threshold", cfg.eval.classify_threshold},
                        {"robustify_baselines", cfg.eval.robustify_baselines}};
  root["calibrated_plane"] = {{"offset", cfg.calibrated.offset},
                              {"slope_x", cfg.calibrated.slope_x},
                              {"slope_y", cfg.calibrated.slope_y}};
  json robustifiers = json::array();
  for (const RobustifierCell& rc : cfg.sweep.robustifiers)
    robustifiers.push_back({{"kind", to_string(rc.kind)}, {"c", rc.c}});
  json grid_cells = json::array();
  for (const auto& [dc, ws] : cfg.sweep.grid_cells) grid_cells.push_back({dc, ws});
  root["sweep"] = {{"models", cfg.sweep.models},
                   {"robustifiers", robustifiers},
                   {"asymmetry", cfg.sweep.asymmetry},
                   {"grid_cells", grid_cells}};
  const SynthSpec& s = cfg.synth.spec;
  root["synth"] = {{"terrain", terrain_to_string(s.terrain)},
                   {"base_height", s.base_height},
                   {"slope_x", s.slope_x},
                   {"slope_y", s.slope_y},
                   {"amplitude", s.amplitude},
                   {"wavelength_x", s.wavelength_x},
                   {"wavelength_y", s.wavelength_y},
                   {"curvature_x", s.curvature_x},
                   {"curvature_y", s.curvature_y},
                   {"ramp_start", s.ramp_start},
                   {"area", {s.area.min.x, s.area.min.y, s.area.max.x, s.area.max.y}},
                   {"n_points", s.n_points},
                   {"noise_sigma", s.noise_sigma},
                   {"radial_density", s.radial_density},
                   {"outlier_fraction", s.outlier_fraction},
                   {"outlier_kind", outlier_kind_to_string(s.outlier_kind)},
                   {"outlier_lo", s.outlier_lo},
                   {"outlier_hi", s.outlier_hi},
                   {"outlier_mean", s.outlier_mean},
                   {"wall_count", s.wall_count},
                   {"wall_height_max", s.wall_height_max},
                   {"dontcare_fraction", s.dontcare_fraction},
                   {"seed", s.seed},
                   {"n_scans", cfg.synth.n_scans}};
  root["bench"] = {{"area_x", cfg.bench.area_x},
                   {"area_y", cfg.bench.area_y},
                   {"spacings", cfg.bench.spacings},
                   {"n_points", cfg.bench.n_points},
                   {"repetitions", cfg.bench.repetitions}};
  root["output_dir"] = cfg.output_dir;
  return root.dump(2) + "\n";
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' must look like dotted.path=value");
  std::string pointer = "/" + assignment.substr(0, eq);
  for (char& ch : pointer)
    if (ch == '.') ch = '/';
  const std::string value = assignment.substr(eq + 1);

  json root = json::parse(serialize_run_config(cfg));
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::exception&) {
    parsed = value;  // bare strings stay strings
  }
  try {
    root[json::json_pointer(pointer)] = parsed;
  } catch (const json::exception& e) {
    throw ConfigError("override '" + assignment + "': " + e.what());
  }
  cfg = parse_run_config(root.dump());
}

std::vector<StudyCell> enumerate_study(const RunConfig& cfg, const std::string& study) {
  std::vector<StudyCell> cells;
  const auto base_cell = [&](ModelKind model) {
    StudyCell cell;
    cell.study = study;
    cell.model = model;
    cell.mode = cfg.eval.mode;
    cell.robust = cfg.robust;
    cell.grid = cfg.grid.spec;
    cell.robustify_baselines = cfg.eval.robustify_baselines;
    return cell;
  };

  if (study == "models") {
    for (const std::string& name : cfg.sweep.models) {
      StudyCell cell = base_cell(model_kind_from_string(name));
      cell.label = "model=" + name;
      cells.push_back(std::move(cell));
    }
  } else if (study == "robustifiers") {
    for (const RobustifierCell& rc : cfg.sweep.robustifiers) {
      StudyCell cell = base_cell(ModelKind::Ubs);
      cell.robust.robustifier = rc.kind;
      cell.robust.c = rc.kind == Robustifier::OLS ? cfg.robust.c : rc.c;
      cell.robust.mu0 = 0.0;   // re-derive the schedule per robustifier
      cell.robust.alpha = 0.0;
      cell.robust.finalize();
      cell.label = "robustifier=" + to_string(rc.kind);
      if (rc.kind != Robustifier::OLS) cell.label += ";c=" + std::to_string(rc.c);
      cells.push_back(std::move(cell));
    }
  } else if (study == "asymmetry") {
    for (double r : cfg.sweep.asymmetry) {
      StudyCell cell = base_cell(ModelKind::Ubs);
      cell.robust.r_asymm = r;
      cell.robust.finalize();
      cell.label = "r_asymm=" + std::to_string(r);
      cells.push_back(std::move(cell));
    }
  } else if (study == "grid") {
    for (const auto& [dc, ws] : cfg.sweep.grid_cells) {
      StudyCell cell = base_cell(ModelKind::Ubs);
      cell.grid.spacing = dc;
      cell.robust.w_smooth = ws;
      cell.robust.finalize();
      cell.label = "d_c=" + std::to_string(dc) + ";w_s=" + std::to_string(ws);
      cells.push_back(std::move(cell));
    }
  } else {
    throw ConfigError("unknown study '" + study +
                      "' (expected models, robustifiers, asymmetry or grid)");
  }
  return cells;
}

}  // namespace terrafit
