#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <thread>

#include "terrafit/dataset.hpp"
#include "terrafit/errors.hpp"
#include "terrafit/evaluation.hpp"
#include "terrafit/heightmap.hpp"
#include "terrafit/kernels.hpp"
#include "terrafit/runconfig.hpp"
#include "terrafit/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace terrafit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir;
};

RunConfig make_config(const CommonOpts& opts) {
  RunConfig cfg;
  if (!opts.config_path.empty()) {
    cfg = load_run_config(opts.config_path);
  } else {
    cfg.robust.finalize();
  }
  for (const std::string& o : opts.overrides) apply_override(cfg, o);
  if (!opts.output_dir.empty()) cfg.output_dir = opts.output_dir;
  return cfg;
}

fs::path prepare_output_dir(const RunConfig& cfg) {
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::string cpu_model() {
  std::ifstream info("/proc/cpuinfo");
  std::string line;
  while (std::getline(info, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) return line.substr(colon + 2);
    }
  }
  return "unknown";
}

json hardware_fingerprint() {
  return {{"cpu", cpu_model()},
          {"hardware_threads", std::thread::hardware_concurrency()},
          {"kernel_variant", kernels::active_ops().name}};
}

void write_manifest(const fs::path& dir, const std::string& command, const RunConfig& cfg,
                    const std::vector<std::string>& outputs, json extra = json::object()) {
  json manifest = {{"command", command},
                   {"outputs", outputs},
                   {"config", json::parse(serialize_run_config(cfg))}};
  for (auto& [key, value] : extra.items()) manifest[key] = value;
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw IoError("cannot write manifest in " + dir.string());
  out << manifest.dump(2) << "\n";
}

struct Scan {
  std::string id;
  PointCloud cloud;
};

std::vector<Scan> load_scans(const RunConfig& cfg, bool need_labels) {
  const DatasetConfig& ds = cfg.dataset;
  if (ds.scan_dir.empty()) throw ConfigError("dataset.scan_dir is not set");
  if (need_labels && ds.label_dir.empty())
    throw ConfigError("dataset.label_dir is required for labeled evaluation");

  std::vector<std::string> ids = ds.scan_ids;
  if (ids.empty()) {
    if (!fs::is_directory(ds.scan_dir))
      throw IoError("dataset.scan_dir " + ds.scan_dir + " is not a directory");
    for (const auto& entry : fs::directory_iterator(ds.scan_dir))
      if (entry.path().extension() == ".bin") ids.push_back(entry.path().stem().string());
    std::sort(ids.begin(), ids.end());
  }
  if (ds.max_scans > 0 && ids.size() > std::size_t(ds.max_scans)) ids.resize(std::size_t(ds.max_scans));
  if (ids.empty()) throw ConfigError("dataset selects no scans");

  const ClassMap map =
      ds.class_map.empty() ? ClassMap::builtin() : ClassMap::from_file(ds.class_map);

  std::vector<Scan> scans;
  scans.reserve(ids.size());
  for (const std::string& id : ids) {
    const fs::path scan_path = fs::path(ds.scan_dir) / (id + ".bin");
    if (ds.label_dir.empty()) {
      scans.push_back({id, read_scan(scan_path).cloud});
    } else {
      const fs::path label_path = fs::path(ds.label_dir) / (id + ".label");
      scans.push_back({id, read_labeled_scan(scan_path, label_path, map).cloud});
    }
  }
  return scans;
}

PointCloud select_points(const PointCloud& cloud, FitMode mode) {
  if (!cloud.has_labels()) return cloud;
  PointCloud out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Category cat = cloud.labels[i];
    if (cat == Category::DontCare) continue;
    if (mode == FitMode::GroundOnly && cat != Category::Ground) continue;
    out.push_back(cloud.x1[i], cloud.x2[i], cloud.h[i], cat);
  }
  return out;
}

ControlGrid grid_for(const RunConfig& cfg, const PointCloud& pts) {
  Bounds2 b = cfg.grid.auto_bounds ? pts.bounds() : cfg.grid.fixed_bounds;
  if (cfg.grid.auto_bounds) {
    b.min.x -= cfg.grid.margin;
    b.min.y -= cfg.grid.margin;
    b.max.x += cfg.grid.margin;
    b.max.y += cfg.grid.margin;
  }
  return ControlGrid::from_bounds(b, cfg.grid.spec.spacing, cfg.grid.spec.degree);
}

int cmd_fit(const CommonOpts& opts, bool with_heightmap, double heightmap_cell) {
  const RunConfig cfg = make_config(opts);
  const fs::path dir = prepare_output_dir(cfg);
  const std::vector<Scan> scans = load_scans(cfg, false);

  std::vector<std::string> outputs;
  for (const Scan& scan : scans) {
    const PointCloud pts = select_points(scan.cloud, cfg.eval.mode);
    if (pts.empty()) throw ConfigError("scan " + scan.id + " has no usable points");
    const ControlGrid grid = grid_for(cfg, pts);
    const FitResult fit = gnc_fit(pts, grid, cfg.robust);

    const fs::path surface_path = dir / ("surface_" + scan.id + ".ubs");
    save_control_grid(surface_path, fit.surface);
    outputs.push_back(surface_path.filename().string());

    const fs::path trace_path = dir / ("trace_" + scan.id + ".jsonl");
    std::ofstream trace(trace_path, std::ios::trunc);
    trace << trace_to_jsonl(fit.trace);
    outputs.push_back(trace_path.filename().string());

    if (with_heightmap) {
      const Bounds2 b = pts.bounds();
      HeightGridSpec spec;
      spec.origin = b.min;
      spec.cell_size = heightmap_cell;
      spec.n_x = int(std::ceil(b.width() / heightmap_cell));
      spec.n_y = int(std::ceil(b.height() / heightmap_cell));
      const HeightGrid hm = rasterize(surface_fn(fit.surface), scan.cloud, spec);
      const fs::path base = dir / ("heightmap_" + scan.id);
      save_height_grid(base, hm);
      outputs.push_back(base.filename().string() + ".raster");
      outputs.push_back(base.filename().string() + ".meta");
    }

    std::printf("fit %s: %zu points (%zu out of domain), %d iterations, final cost %.6g\n",
                scan.id.c_str(), fit.kept.size(), fit.dropped, int(fit.trace.size()),
                fit.trace.empty() ? 0.0 : fit.trace.back().cost_post_weights);
  }
  write_manifest(dir, "fit", cfg, outputs);
  return kExitOk;
}

int cmd_eval(const CommonOpts& opts, const std::string& study) {
  const RunConfig cfg = make_config(opts);
  const fs::path dir = prepare_output_dir(cfg);
  const std::vector<Scan> scans = load_scans(cfg, true);

  std::vector<PointCloud> clouds;
  clouds.reserve(scans.size());
  for (const Scan& s : scans) clouds.push_back(s.cloud);

  std::vector<StudyCell> cells;
  if (study.empty()) {
    StudyCell cell;
    cell.study = "eval";
    cell.label = "model=ubs";
    cell.model = ModelKind::Ubs;
    cell.mode = cfg.eval.mode;
    cell.robust = cfg.robust;
    cell.grid = cfg.grid.spec;
    cells.push_back(cell);
  } else {
    cells = enumerate_study(cfg, study);
  }

  SweepContext ctx;
  ctx.split.seed = cfg.eval.seed;
  ctx.split.fraction = cfg.eval.holdout_fraction;
  ctx.split.mode = cfg.eval.mode;
  ctx.calibrated = cfg.calibrated;
  ctx.bounds_margin = cfg.grid.margin;

  const std::vector<SweepRow> rows = sweep(cells, clouds, ctx);
  const std::string table = sweep_table(rows);

  const fs::path table_path = dir / "results.tsv";
  std::ofstream out(table_path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + table_path.string());
  out << table;

  for (const SweepRow& row : rows) {
    if (row.report) {
      std::printf("%-14s %-28s mean abs error %7.4f m over %zu points\n",
                  row.cell.study.c_str(), row.cell.label.c_str(), row.report->mean_abs_error,
                  row.report->count);
    } else {
      std::printf("%-14s %-28s FAILED: %s\n", row.cell.study.c_str(), row.cell.label.c_str(),
                  row.error.c_str());
    }
  }
  write_manifest(dir, study.empty() ? "eval" : "eval --study " + study, cfg, {"results.tsv"});
  return kExitOk;
}

int cmd_classify(const CommonOpts& opts, const std::string& surface_artifact) {
  const RunConfig cfg = make_config(opts);
  const fs::path dir = prepare_output_dir(cfg);
  const std::vector<Scan> scans = load_scans(cfg, false);

  const fs::path label_dir = dir / "labels_pred";
  fs::create_directories(label_dir);

  json summary = json::array();
  std::vector<std::string> outputs;
  for (const Scan& scan : scans) {
    SurfaceFn surface;
    if (!surface_artifact.empty()) {
      surface = surface_fn(load_control_grid(surface_artifact));
    } else {
      const PointCloud pts = select_points(scan.cloud, FitMode::AllPoints);
      const ControlGrid grid = grid_for(cfg, pts);
      surface = surface_fn(gnc_fit(pts, grid, cfg.robust).surface);
    }
    const Classification cls = classify_ground(surface, scan.cloud, cfg.eval.classify_threshold);

    std::vector<std::uint32_t> ids(cls.is_ground.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = cls.is_ground[i] ? 1u : 0u;
    const fs::path out_path = label_dir / (scan.id + ".label");
    write_labels(out_path, ids);
    outputs.push_back("labels_pred/" + scan.id + ".label");

    summary.push_back({{"scan", scan.id},
                       {"ground", cls.n_ground},
                       {"obstacle", cls.n_obstacle},
                       {"out_of_domain", cls.n_out_of_domain},
                       {"threshold", cfg.eval.classify_threshold}});
    std::printf("classify %s: %zu ground / %zu obstacle (%zu out of domain)\n", scan.id.c_str(),
                cls.n_ground, cls.n_obstacle, cls.n_out_of_domain);
  }
  std::ofstream sum(dir / "classify_summary.json", std::ios::trunc);
  sum << summary.dump(2) << "\n";
  outputs.push_back("classify_summary.json");
  write_manifest(dir, "classify", cfg, outputs);
  return kExitOk;
}

PointCloud bench_workload(const BenchConfig& bench, std::size_t n_points, std::uint64_t seed) {
  SynthSpec spec;
  spec.terrain = SynthSpec::Terrain::Sine;
  spec.base_height = -1.7;
  spec.slope_x = 0.01;
  spec.amplitude = 0.3;
  spec.area = {{-0.5 * bench.area_x, -0.5 * bench.area_y},
               {0.5 * bench.area_x, 0.5 * bench.area_y}};
  spec.n_points = n_points;
  spec.noise_sigma = 0.02;
  spec.outlier_fraction = 0.35;
  spec.outlier_kind = SynthSpec::OutlierKind::Walls;
  spec.wall_count = 40;
  spec.seed = seed;
  return synth_terrain(spec);
}

double median_warm_start_ms(const PointCloud& cloud, const ControlGrid& surface,
                            const GridSpec& spec, const RobustConfig& robust, int reps) {
  std::vector<double> ms;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const ControlGrid next = warm_start_step(cloud, surface, spec, robust);
    const auto t1 = std::chrono::steady_clock::now();
    (void)next;
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(ms.begin(), ms.end());
  return ms[ms.size() / 2];
}

int cmd_bench(const CommonOpts& opts) {
  const RunConfig cfg = make_config(opts);
  const fs::path dir = prepare_output_dir(cfg);
  const BenchConfig& bench = cfg.bench;

  const PointCloud cloud = bench_workload(bench, bench.n_points, 42);
  const Bounds2 area{{-0.5 * bench.area_x, -0.5 * bench.area_y},
                     {0.5 * bench.area_x, 0.5 * bench.area_y}};

  std::string table = "d_c_m\tcontrol_points_area\tcontrol_points_lattice\twarm_start_ms\trate_hz\n";
  std::printf("warm-start single-iteration rate, %zu points, %.0f m x %.0f m area\n",
              cloud.size(), bench.area_x, bench.area_y);
  for (double d : bench.spacings) {
    GridSpec spec{d, cfg.grid.spec.degree};
    const ControlGrid grid = ControlGrid::from_bounds(area, d, spec.degree);
    const FitResult cold = gnc_fit(cloud, grid, cfg.robust);
    const double ms =
        median_warm_start_ms(cloud, cold.surface, spec, cfg.robust, bench.repetitions);
    const double in_area = (bench.area_x / d) * (bench.area_y / d);
    char line[160];
    std::snprintf(line, sizeof line, "%g\t%.0f\t%lld\t%.3f\t%.3f\n", d, in_area,
                  static_cast<long long>(grid.num_control_points()), ms, 1000.0 / ms);
    table += line;
    std::printf("  d_C %-5g : %6.0f control points in area, %8.2f ms -> %7.3f Hz\n", d, in_area,
                ms, 1000.0 / ms);
  }

  // Scaling of one warm-start step when the workload doubles at a fixed grid.
  const double d_ref = 2.0;
  GridSpec ref_spec{d_ref, cfg.grid.spec.degree};
  const ControlGrid ref_grid = ControlGrid::from_bounds(area, d_ref, ref_spec.degree);
  const PointCloud doubled = bench_workload(bench, bench.n_points * 2, 43);
  const FitResult cold_single = gnc_fit(cloud, ref_grid, cfg.robust);
  const FitResult cold_double = gnc_fit(doubled, ref_grid, cfg.robust);
  const double t_single =
      median_warm_start_ms(cloud, cold_single.surface, ref_spec, cfg.robust, bench.repetitions);
  const double t_double =
      median_warm_start_ms(doubled, cold_double.surface, ref_spec, cfg.robust, bench.repetitions);
  char scaling[200];
  std::snprintf(scaling, sizeof scaling,
                "# point-count scaling at d_C=%g: %.3f ms -> %.3f ms (x%.2f for 2x points)\n",
                d_ref, t_single, t_double, t_double / t_single);
  table += scaling;
  std::printf("%s", scaling);

  const fs::path table_path = dir / "bench.tsv";
  std::ofstream out(table_path, std::ios::trunc);
  out << table;
  write_manifest(dir, "bench", cfg, {"bench.tsv"}, {{"hardware", hardware_fingerprint()}});
  return kExitOk;
}

int cmd_synth(const CommonOpts& opts) {
  const RunConfig cfg = make_config(opts);
  const fs::path dir = prepare_output_dir(cfg);
  const fs::path scan_dir = dir / "velodyne";
  const fs::path label_dir = dir / "labels";
  fs::create_directories(scan_dir);
  fs::create_directories(label_dir);

  std::vector<std::string> outputs;
  for (int s = 0; s < cfg.synth.n_scans; ++s) {
    SynthSpec spec = cfg.synth.spec;
    spec.seed = cfg.synth.spec.seed + std::uint64_t(s);
    const PointCloud cloud = synth_terrain(spec);

    char name[32];
    std::snprintf(name, sizeof name, "%06d", s);
    write_scan(scan_dir / (std::string(name) + ".bin"), cloud);

    std::vector<std::uint32_t> ids(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      switch (cloud.labels[i]) {
        case Category::Ground: ids[i] = 40; break;      // road
        case Category::NonGround: ids[i] = 50; break;   // building
        case Category::DontCare: ids[i] = 0; break;     // unlabeled
      }
    }
    write_labels(label_dir / (std::string(name) + ".label"), ids);
    outputs.push_back("velodyne/" + std::string(name) + ".bin");
    outputs.push_back("labels/" + std::string(name) + ".label");
    std::printf("synth %s: %zu points\n", name, cloud.size());
  }
  write_manifest(dir, "synth", cfg, outputs);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust B-spline ground-surface estimation for LIDAR point clouds"};
  app.require_subcommand(1);

  CommonOpts opts;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", opts.config_path, "JSON run configuration");
    sub->add_option("--set", opts.overrides, "Override a config key: dotted.path=value");
    sub->add_option("-o,--output", opts.output_dir, "Output directory (overrides config)");
  };

  CLI::App* fit = app.add_subcommand("fit", "Fit ground surfaces and write artifacts");
  bool with_heightmap = false;
  double heightmap_cell = 0.5;
  add_common(fit);
  fit->add_flag("--heightmap", with_heightmap, "Also export a combined height map per scan");
  fit->add_option("--heightmap-cell", heightmap_cell, "Height map cell size in meters");

  CLI::App* eval = app.add_subcommand("eval", "Holdout error evaluation and studies");
  std::string study;
  add_common(eval);
  eval->add_option("--study", study, "models, robustifiers, asymmetry or grid");

  CLI::App* classify = app.add_subcommand("classify", "Ground/obstacle point classification");
  std::string surface_artifact;
  add_common(classify);
  classify->add_option("--surface", surface_artifact, "Reuse a fitted surface artifact");

  CLI::App* bench = app.add_subcommand("bench", "Warm-start throughput benchmark");
  add_common(bench);

  CLI::App* synth = app.add_subcommand("synth", "Generate synthetic labeled scans");
  add_common(synth);

  try {
    app.parse(argc, argv);
    if (fit->parsed()) return cmd_fit(opts, with_heightmap, heightmap_cell);
    if (eval->parsed()) return cmd_eval(opts, study);
    if (classify->parsed()) return cmd_classify(opts, surface_artifact);
    if (bench->parsed()) return cmd_bench(opts);
    if (synth->parsed()) return cmd_synth(opts);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DomainError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
