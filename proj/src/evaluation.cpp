#include "terrafit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "terrafit/errors.hpp"

namespace terrafit {

SurfaceFn surface_fn(const ControlGrid& grid) {
  return [grid](const Vec2& x) -> std::optional<double> {
    if (!grid.contains(x)) return std::nullopt;
    return grid.predict_height(x);
  };
}

SurfaceFn surface_fn(const PolynomialSurface& poly) {
  return [poly](const Vec2& x) -> std::optional<double> { return poly.predict(x); };
}

SurfaceFn surface_fn(const CalibratedPlane& plane) {
  return [plane](const Vec2& x) -> std::optional<double> { return plane.predict(x); };
}

std::string to_string(FitMode mode) {
  return mode == FitMode::GroundOnly ? "ground_only" : "all_points";
}

FitMode fit_mode_from_string(const std::string& name) {
  if (name == "ground_only") return FitMode::GroundOnly;
  if (name == "all_points") return FitMode::AllPoints;
  throw ConfigError("unknown fit mode '" + name + "' (expected ground_only or all_points)");
}

Split holdout_split(const PointCloud& cloud, const SplitConfig& cfg) {
  if (!cloud.has_labels()) throw ConfigError("holdout_split: cloud carries no labels");
  if (!(cfg.fraction > 0.0) || !(cfg.fraction < 1.0))
    throw ConfigError("holdout_split: fraction must lie strictly between 0 and 1");

  std::vector<std::uint32_t> ground_idx;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (cloud.labels[i] == Category::Ground) ground_idx.push_back(std::uint32_t(i));
  if (ground_idx.empty()) throw ConfigError("holdout_split: no ground points in cloud");

  const std::size_t k = std::size_t(std::llround(cfg.fraction * double(ground_idx.size())));
  if (k == 0 || k >= ground_idx.size())
    throw ConfigError("holdout_split: fraction leaves an empty validation or training set");

  std::mt19937_64 rng(cfg.seed);
  for (std::size_t i = 0; i + 1 < ground_idx.size(); ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, ground_idx.size() - 1);
    std::swap(ground_idx[i], ground_idx[pick(rng)]);
  }

  std::vector<bool> held(cloud.size(), false);
  for (std::size_t i = 0; i < k; ++i) held[ground_idx[i]] = true;

  Split out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Category cat = cloud.labels[i];
    if (cat == Category::DontCare) continue;
    if (held[i]) {
      out.validation.push_back(cloud.x1[i], cloud.x2[i], cloud.h[i], cat);
    } else if (cat == Category::Ground ||
               (cfg.mode == FitMode::AllPoints && cat == Category::NonGround)) {
      out.train.push_back(cloud.x1[i], cloud.x2[i], cloud.h[i], cat);
    }
  }
  return out;
}

EvalReport abs_error_report(const SurfaceFn& surface, const PointCloud& validation,
                            const std::string& model_name) {
  if (validation.empty()) throw ConfigError("abs_error_report: empty validation set");

  EvalReport rep;
  rep.model = model_name;
  std::array<double, EvalReport::kBins> bin_sum{};
  double total = 0.0;

  for (std::size_t i = 0; i < validation.size(); ++i) {
    const Vec2 x = validation.position(i);
    const std::optional<double> pred = surface(x);
    if (!pred) {
      ++rep.skipped_out_of_domain;
      continue;
    }
    const double err = std::abs(*pred - validation.h[i]);
    total += err;
    ++rep.count;
    const double dist = planar_distance(x);
    const int bin = int(dist / EvalReport::kBinWidth);
    if (bin >= 0 && bin < EvalReport::kBins) {
      bin_sum[std::size_t(bin)] += err;
      ++rep.bin_count[std::size_t(bin)];
    }
  }
  if (rep.count == 0)
    throw DomainError("abs_error_report: every validation point lies outside the surface domain");

  rep.mean_abs_error = total / double(rep.count);
  for (int b = 0; b < EvalReport::kBins; ++b)
    if (rep.bin_count[std::size_t(b)] > 0)
      rep.bin_mean[std::size_t(b)] = bin_sum[std::size_t(b)] / double(rep.bin_count[std::size_t(b)]);
  return rep;
}

EvalReport merge_reports(const std::vector<EvalReport>& reports) {
  if (reports.empty()) throw ConfigError("merge_reports: nothing to merge");
  EvalReport out;
  out.model = reports.front().model;
  double total = 0.0;
  std::array<double, EvalReport::kBins> bin_sum{};
  for (const EvalReport& r : reports) {
    total += r.mean_abs_error * double(r.count);
    out.count += r.count;
    out.skipped_out_of_domain += r.skipped_out_of_domain;
    for (int b = 0; b < EvalReport::kBins; ++b) {
      bin_sum[std::size_t(b)] += r.bin_mean[std::size_t(b)] * double(r.bin_count[std::size_t(b)]);
      out.bin_count[std::size_t(b)] += r.bin_count[std::size_t(b)];
    }
  }
  if (out.count == 0) throw ConfigError("merge_reports: merged reports hold no samples");
  out.mean_abs_error = total / double(out.count);
  for (int b = 0; b < EvalReport::kBins; ++b)
    if (out.bin_count[std::size_t(b)] > 0)
      out.bin_mean[std::size_t(b)] = bin_sum[std::size_t(b)] / double(out.bin_count[std::size_t(b)]);
  return out;
}

Histogram outlier_histogram(const SurfaceFn& surface, const PointCloud& nonground,
                            double bin_width) {
  if (nonground.empty()) throw ConfigError("outlier_histogram: empty point set");
  if (!(bin_width > 0.0)) throw ConfigError("outlier_histogram: bin width must be positive");

  std::vector<double> diffs;
  diffs.reserve(nonground.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < nonground.size(); ++i) {
    const std::optional<double> pred = surface(nonground.position(i));
    if (!pred) continue;
    const double d = nonground.h[i] - *pred;
    diffs.push_back(d);
    sum += d;
  }
  if (diffs.empty())
    throw DomainError("outlier_histogram: every point lies outside the surface domain");

  const auto [lo_it, hi_it] = std::minmax_element(diffs.begin(), diffs.end());
  const long lo_bin = long(std::floor(*lo_it / bin_width));
  const long hi_bin = long(std::floor(*hi_it / bin_width));

  Histogram hist;
  hist.bin_width = bin_width;
  hist.lo_edge = double(lo_bin) * bin_width;
  hist.frequency.assign(std::size_t(hi_bin - lo_bin + 1), 0.0);
  hist.count = diffs.size();
  hist.mean = sum / double(diffs.size());
  const double share = 1.0 / double(diffs.size());
  for (double d : diffs) {
    long bin = long(std::floor(d / bin_width)) - lo_bin;
    bin = std::clamp(bin, 0L, long(hist.frequency.size()) - 1);
    hist.frequency[std::size_t(bin)] += share;
  }
  return hist;
}

Classification classify_ground(const SurfaceFn& surface, const PointCloud& cloud,
                               double threshold) {
  Classification out;
  out.is_ground.assign(cloud.size(), 0);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const std::optional<double> pred = surface(cloud.position(i));
    if (!pred) {
      ++out.n_out_of_domain;
      ++out.n_obstacle;
      continue;
    }
    if (std::abs(cloud.h[i] - *pred) < threshold) {
      out.is_ground[i] = 1;
      ++out.n_ground;
    } else {
      ++out.n_obstacle;
    }
  }
  return out;
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Ubs: return "ubs";
    case ModelKind::Cubic: return "cubic";
    case ModelKind::Plane: return "plane";
    case ModelKind::Calibrated: return "calibrated";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "ubs") return ModelKind::Ubs;
  if (name == "cubic") return ModelKind::Cubic;
  if (name == "plane") return ModelKind::Plane;
  if (name == "calibrated") return ModelKind::Calibrated;
  throw ConfigError("unknown model '" + name + "' (expected ubs, cubic, plane or calibrated)");
}

namespace {

// Polynomial baselines optionally run the same alternating scheme as the
// spline: weighted fit, then closed-form weight update on the residuals.
PolynomialSurface robust_polynomial(const PointCloud& train, int degree,
                                    const RobustConfig& config) {
  RobustConfig cfg = config;
  cfg.finalize();
  std::vector<double> w(train.size(), 1.0);
  PolynomialSurface poly = fit_polynomial(train.x1, train.x2, train.h, degree, w);
  if (cfg.robustifier == Robustifier::OLS) return poly;

  double mu = cfg.mu0;
  for (int k = 0; k < cfg.max_iters; ++k) {
    if (k > 0) poly = fit_polynomial(train.x1, train.x2, train.h, degree, w);
    for (std::size_t i = 0; i < train.size(); ++i) {
      const double dh =
          asymmetric_error(train.h[i] - poly.predict(train.position(i)), cfg.r_asymm);
      w[i] = (cfg.robustifier == Robustifier::GMC) ? weight_gmc(dh, mu, cfg.c)
                                                   : weight_tls(dh, mu, cfg.c);
    }
    const double mu_next = cfg.alpha * mu;
    if (cfg.robustifier == Robustifier::GMC && mu_next < 1.0) break;
    mu = mu_next;
  }
  return fit_polynomial(train.x1, train.x2, train.h, degree, w);
}

}  // namespace

EvalReport run_cell_on_scan(const StudyCell& cell, const PointCloud& scan,
                            const SweepContext& ctx, std::uint64_t scan_seed) {
  SplitConfig split_cfg = ctx.split;
  split_cfg.seed = scan_seed;
  split_cfg.mode = cell.mode;
  const Split split = holdout_split(scan, split_cfg);

  SurfaceFn surface;
  switch (cell.model) {
    case ModelKind::Ubs: {
      Bounds2 b = split.train.bounds();
      b.min.x -= ctx.bounds_margin;
      b.min.y -= ctx.bounds_margin;
      b.max.x += ctx.bounds_margin;
      b.max.y += ctx.bounds_margin;
      const ControlGrid grid = ControlGrid::from_bounds(b, cell.grid.spacing, cell.grid.degree);
      surface = surface_fn(gnc_fit(split.train, grid, cell.robust).surface);
      break;
    }
    case ModelKind::Cubic:
    case ModelKind::Plane: {
      const int degree = cell.model == ModelKind::Cubic ? 3 : 1;
      surface = surface_fn(cell.robustify_baselines
                               ? robust_polynomial(split.train, degree, cell.robust)
                               : fit_polynomial(split.train, degree));
      break;
    }
    case ModelKind::Calibrated:
      surface = surface_fn(ctx.calibrated);
      break;
  }
  return abs_error_report(surface, split.validation, to_string(cell.model));
}

std::vector<SweepRow> sweep(const std::vector<StudyCell>& cells,
                            const std::vector<PointCloud>& scans, const SweepContext& ctx) {
  if (scans.empty()) throw ConfigError("sweep: no scans to evaluate");
  std::vector<SweepRow> rows;
  rows.reserve(cells.size());
  for (const StudyCell& cell : cells) {
    SweepRow row{cell, std::nullopt, {}};
    try {
      std::vector<EvalReport> per_scan;
      per_scan.reserve(scans.size());
      for (std::size_t s = 0; s < scans.size(); ++s)
        per_scan.push_back(run_cell_on_scan(cell, scans[s], ctx, ctx.split.seed + s));
      row.report = merge_reports(per_scan);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string sweep_table(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "study\tcell\tmodel\tmode\tbin\tmean_abs_error_m\tcount\n";
  out.precision(6);
  out << std::fixed;
  for (const SweepRow& row : rows) {
    const auto prefix = [&]() -> std::ostringstream& {
      out << row.cell.study << '\t' << row.cell.label << '\t' << to_string(row.cell.model)
          << '\t' << to_string(row.cell.mode) << '\t';
      return out;
    };
    if (!row.report) {
      prefix() << "all\terror:" << row.error << "\t0\n";
      continue;
    }
    prefix() << "all\t" << row.report->mean_abs_error << '\t' << row.report->count << '\n';
    for (int b = 0; b < EvalReport::kBins; ++b) {
      if (row.report->bin_count[std::size_t(b)] == 0) continue;
      prefix() << b * int(EvalReport::kBinWidth) << '\t' << row.report->bin_mean[std::size_t(b)]
               << '\t' << row.report->bin_count[std::size_t(b)] << '\n';
    }
  }
  return out.str();
}

}  // namespace terrafit
