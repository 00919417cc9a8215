#include <doctest.h>

#include <cmath>

#include "terrafit/dataset.hpp"
#include "terrafit/errors.hpp"
#include "terrafit/evaluation.hpp"

using namespace terrafit;

namespace {

PointCloud labeled_cloud(std::size_t n_ground, std::size_t n_nonground, std::size_t n_dontcare) {
  PointCloud cloud;
  std::size_t i = 0;
  for (std::size_t g = 0; g < n_ground; ++g, ++i)
    cloud.push_back(double(i % 40), double(i / 40), 0.0, Category::Ground);
  for (std::size_t g = 0; g < n_nonground; ++g, ++i)
    cloud.push_back(double(i % 40), double(i / 40), 1.5, Category::NonGround);
  for (std::size_t g = 0; g < n_dontcare; ++g, ++i)
    cloud.push_back(double(i % 40), double(i / 40), 9.0, Category::DontCare);
  return cloud;
}

SurfaceFn flat_surface(double z) {
  return [z](const Vec2&) -> std::optional<double> { return z; };
}

}  // namespace

TEST_SUITE_BEGIN("evaluation");

TEST_CASE("holdout split sizes and determinism") {
  const PointCloud cloud = labeled_cloud(1000, 300, 50);
  SplitConfig cfg;
  cfg.seed = 7;
  cfg.fraction = 0.1;
  cfg.mode = FitMode::GroundOnly;

  const Split a = holdout_split(cloud, cfg);
  CHECK(a.validation.size() == 100);
  CHECK(a.train.size() == 900);  // ground remainder only

  const Split b = holdout_split(cloud, cfg);
  CHECK(a.validation.x1 == b.validation.x1);
  CHECK(a.validation.h == b.validation.h);

  cfg.seed = 8;
  const Split c = holdout_split(cloud, cfg);
  CHECK(a.validation.x1 != c.validation.x1);

  SUBCASE("all-points mode keeps non-ground in training") {
    cfg.mode = FitMode::AllPoints;
    const Split d = holdout_split(cloud, cfg);
    CHECK(d.validation.size() == 100);
    CHECK(d.train.size() == 1200);  // 900 ground + 300 non-ground, never don't-care
    for (Category cat : d.validation.labels) CHECK(cat == Category::Ground);
  }
}

TEST_CASE("holdout split input validation") {
  const PointCloud cloud = labeled_cloud(100, 10, 0);
  SplitConfig cfg;
  cfg.fraction = 0.0;
  CHECK_THROWS_AS(holdout_split(cloud, cfg), ConfigError);
  cfg.fraction = 1.0;
  CHECK_THROWS_AS(holdout_split(cloud, cfg), ConfigError);

  cfg.fraction = 0.1;
  PointCloud unlabeled;
  unlabeled.push_back(0, 0, 0);
  CHECK_THROWS_AS(holdout_split(unlabeled, cfg), ConfigError);

  const PointCloud no_ground = labeled_cloud(0, 50, 0);
  CHECK_THROWS_AS(holdout_split(no_ground, cfg), ConfigError);
}

TEST_CASE("error report on exact and offset surfaces") {
  PointCloud validation;
  for (int i = 0; i < 200; ++i)
    validation.push_back(0.25 * i, 0.0, 0.0, Category::Ground);  // spread over [0, 50)

  const EvalReport exact = abs_error_report(flat_surface(0.0), validation, "flat");
  CHECK(exact.mean_abs_error == 0.0);
  CHECK(exact.count == 200);
  CHECK(exact.model == "flat");

  const EvalReport offset = abs_error_report(flat_surface(0.03), validation);
  CHECK(offset.mean_abs_error == doctest::Approx(0.03).epsilon(1e-12));
  std::size_t binned = 0;
  for (int b = 0; b < EvalReport::kBins; ++b) {
    if (offset.bin_count[std::size_t(b)] == 0) continue;
    binned += offset.bin_count[std::size_t(b)];
    CHECK(offset.bin_mean[std::size_t(b)] == doctest::Approx(0.03).epsilon(1e-12));
  }
  CHECK(binned == offset.count);  // all points lie inside [0, 50)
}

TEST_CASE("points beyond 50 m count only toward the overall mean") {
  PointCloud validation;
  validation.push_back(10.0, 0.0, 0.0, Category::Ground);
  validation.push_back(80.0, 0.0, 0.0, Category::Ground);
  const EvalReport rep = abs_error_report(flat_surface(0.1), validation);
  CHECK(rep.count == 2);
  std::size_t binned = 0;
  for (auto c : rep.bin_count) binned += c;
  CHECK(binned == 1);
}

TEST_CASE("report errors") {
  CHECK_THROWS_AS(abs_error_report(flat_surface(0.0), PointCloud{}), ConfigError);
  PointCloud validation;
  validation.push_back(0, 0, 0, Category::Ground);
  const SurfaceFn nowhere = [](const Vec2&) -> std::optional<double> { return std::nullopt; };
  CHECK_THROWS_AS(abs_error_report(nowhere, validation), DomainError);
}

TEST_CASE("merged reports weight by sample count") {
  EvalReport a;
  a.mean_abs_error = 0.02;
  a.count = 100;
  a.bin_mean[0] = 0.02;
  a.bin_count[0] = 100;
  EvalReport b;
  b.mean_abs_error = 0.05;
  b.count = 300;
  b.bin_mean[0] = 0.05;
  b.bin_count[0] = 300;
  const EvalReport merged = merge_reports({a, b});
  CHECK(merged.count == 400);
  CHECK(merged.mean_abs_error == doctest::Approx((0.02 * 100 + 0.05 * 300) / 400));
  CHECK(merged.bin_mean[0] == doctest::Approx(0.0425));
}

TEST_CASE("outlier histogram is normalized and centered on the offsets") {
  PointCloud pts;
  for (int i = 0; i < 50; ++i) pts.push_back(double(i), 0.0, 1.0, Category::NonGround);

  const Histogram hist = outlier_histogram(flat_surface(0.0), pts, 0.1);
  double total = 0.0;
  for (double f : hist.frequency) total += f;
  CHECK(std::abs(total - 1.0) <= 1e-12);
  CHECK(hist.mean == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(hist.count == 50);
  // every sample sits at exactly +1 m -> a single occupied bin
  std::size_t occupied = 0;
  for (double f : hist.frequency)
    if (f > 0) ++occupied;
  CHECK(occupied == 1);

  CHECK_THROWS_AS(outlier_histogram(flat_surface(0.0), PointCloud{}, 0.1), ConfigError);
  CHECK_THROWS_AS(outlier_histogram(flat_surface(0.0), pts, 0.0), ConfigError);
}

TEST_CASE("distance classification bands") {
  PointCloud pts;
  pts.push_back(0, 0, 0.05, Category::Ground);    // inside the band
  pts.push_back(1, 0, 0.50, Category::NonGround); // above
  pts.push_back(2, 0, -0.50, Category::NonGround); // far below is an obstacle too
  const Classification cls = classify_ground(flat_surface(0.0), pts, 0.10);
  CHECK(cls.is_ground[0] == 1);
  CHECK(cls.is_ground[1] == 0);
  CHECK(cls.is_ground[2] == 0);
  CHECK(cls.n_ground == 1);
  CHECK(cls.n_obstacle == 2);
  CHECK(cls.n_out_of_domain == 0);

  const SurfaceFn nowhere = [](const Vec2&) -> std::optional<double> { return std::nullopt; };
  const Classification ood = classify_ground(nowhere, pts, 0.10);
  CHECK(ood.n_out_of_domain == 3);
  CHECK(ood.n_obstacle == 3);
}

TEST_CASE("classification on a synthetic labeled scene meets precision and recall") {
  SynthSpec spec;
  spec.terrain = SynthSpec::Terrain::Sine;
  spec.amplitude = 0.3;
  spec.slope_x = 0.01;
  spec.area = {{-25.0, -12.0}, {25.0, 12.0}};
  spec.n_points = 15000;
  spec.noise_sigma = 0.02;
  spec.outlier_fraction = 0.45;
  spec.outlier_kind = SynthSpec::OutlierKind::Walls;
  spec.outlier_lo = 0.25;
  spec.seed = 31;
  const PointCloud cloud = synth_terrain(spec);

  const ControlGrid grid = ControlGrid::from_bounds(spec.area, 2.0, 2);
  RobustConfig cfg;
  cfg.finalize();
  const FitResult fit = gnc_fit(cloud, grid, cfg);
  const Classification cls = classify_ground(surface_fn(fit.surface), cloud, 0.10);

  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const bool truth = cloud.labels[i] == Category::Ground;
    const bool pred = cls.is_ground[i] == 1;
    tp += truth && pred;
    fp += !truth && pred;
    fn += truth && !pred;
  }
  const double precision = double(tp) / double(tp + fp);
  const double recall = double(tp) / double(tp + fn);
  CHECK(precision >= 0.95);
  CHECK(recall >= 0.95);
}

TEST_CASE("ground-only holdout error approaches the analytic noise level") {
  // |N(0, sigma)| has mean sigma sqrt(2/pi); the fitted surface adds only a
  // little on a clean scene.
  SynthSpec spec;
  spec.terrain = SynthSpec::Terrain::Plane;
  spec.slope_x = 0.01;
  spec.area = {{-20.0, -10.0}, {20.0, 10.0}};
  spec.n_points = 12000;
  spec.noise_sigma = 0.02;
  spec.outlier_fraction = 0.0;
  spec.seed = 8;
  const PointCloud cloud = synth_terrain(spec);

  StudyCell cell;
  cell.model = ModelKind::Ubs;
  cell.mode = FitMode::GroundOnly;
  cell.robust.finalize();
  cell.grid = {2.0, 2};
  SweepContext ctx;
  const EvalReport rep = run_cell_on_scan(cell, cloud, ctx, 77);

  const double analytic = spec.noise_sigma * std::sqrt(2.0 / 3.14159265358979323846);
  CHECK(rep.mean_abs_error >= 0.8 * analytic);
  CHECK(rep.mean_abs_error <= 1.3 * analytic);
}

TEST_CASE("all-points fits cannot beat ground-only fits on the same scan") {
  SynthSpec spec;
  spec.terrain = SynthSpec::Terrain::Sine;
  spec.amplitude = 0.3;
  spec.area = {{-20.0, -10.0}, {20.0, 10.0}};
  spec.n_points = 10000;
  spec.noise_sigma = 0.02;
  spec.outlier_fraction = 0.45;
  spec.outlier_kind = SynthSpec::OutlierKind::Walls;
  spec.outlier_lo = 0.15;
  spec.seed = 21;
  const PointCloud cloud = synth_terrain(spec);

  StudyCell cell;
  cell.model = ModelKind::Ubs;
  cell.robust.finalize();
  cell.grid = {2.0, 2};
  SweepContext ctx;

  cell.mode = FitMode::GroundOnly;
  const EvalReport ground_only = run_cell_on_scan(cell, cloud, ctx, 77);
  cell.mode = FitMode::AllPoints;
  const EvalReport all_points = run_cell_on_scan(cell, cloud, ctx, 77);
  CHECK(all_points.mean_abs_error >= ground_only.mean_abs_error);
}

TEST_CASE("sweep survives failing cells and reports the rest") {
  SynthSpec spec;
  spec.n_points = 3000;
  spec.noise_sigma = 0.02;
  spec.area = {{-15.0, -8.0}, {15.0, 8.0}};
  spec.outlier_fraction = 0.3;
  spec.outlier_kind = SynthSpec::OutlierKind::BiasedExp;
  const std::vector<PointCloud> scans{synth_terrain(spec)};

  StudyCell good;
  good.study = "models";
  good.label = "model=ubs";
  good.model = ModelKind::Ubs;
  good.robust.finalize();
  good.grid = {2.0, 2};

  StudyCell bad = good;
  bad.label = "model=ubs-bad";
  bad.robust.mu0 = -1.0;  // finalize() inside the fit will reject this

  SweepContext ctx;
  ctx.split.seed = 5;
  const auto rows = sweep({good, bad}, scans, ctx);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].report.has_value());
  CHECK(!rows[1].report.has_value());
  CHECK(!rows[1].error.empty());

  const std::string table = sweep_table(rows);
  CHECK(table.find("study\tcell\tmodel") == 0);
  CHECK(table.find("model=ubs") != std::string::npos);
  CHECK(table.find("error:") != std::string::npos);
}

TEST_SUITE_END();
