#include <doctest.h>

#include "terrafit/errors.hpp"
#include "terrafit/runconfig.hpp"

using namespace terrafit;

TEST_SUITE_BEGIN("config");

TEST_CASE("defaults carry the published parameter set") {
  const RunConfig cfg = parse_run_config("{}");
  CHECK(cfg.robust.robustifier == Robustifier::TLS);
  CHECK(cfg.robust.c == doctest::Approx(0.4));
  CHECK(cfg.robust.mu0 == doctest::Approx(1.0));
  CHECK(cfg.robust.alpha == doctest::Approx(1.6));
  CHECK(cfg.robust.max_iters == 10);
  CHECK(cfg.robust.r_asymm == doctest::Approx(2.0));
  CHECK(cfg.robust.w_smooth == doctest::Approx(1.0));
  CHECK(cfg.robust.smoothness_order == 2);
  CHECK(cfg.grid.spec.spacing == doctest::Approx(2.0));
  CHECK(cfg.grid.spec.degree == 2);
  CHECK(cfg.eval.holdout_fraction == doctest::Approx(0.10));
  CHECK(cfg.eval.mode == FitMode::GroundOnly);
}

TEST_CASE("serialization materializes defaults and round-trips") {
  RunConfig cfg = parse_run_config("{}");
  const std::string text = serialize_run_config(cfg);
  CHECK(text.find("\"schema_version\": 1") != std::string::npos);
  CHECK(text.find("control_point_distance") != std::string::npos);

  const RunConfig back = parse_run_config(text);
  CHECK(serialize_run_config(back) == text);
}

TEST_CASE("round-trip preserves explicit settings") {
  RunConfig cfg = parse_run_config(R"({
    "grid": {"control_point_distance": 1.25, "bounds": [0, 0, 30, 20]},
    "robust": {"robustifier": "gmc", "iterations": 8},
    "evaluation": {"mode": "all_points", "seed": 99}
  })");
  CHECK(cfg.grid.spec.spacing == doctest::Approx(1.25));
  CHECK(!cfg.grid.auto_bounds);
  CHECK(cfg.grid.fixed_bounds.max.x == doctest::Approx(30.0));
  CHECK(cfg.robust.robustifier == Robustifier::GMC);
  CHECK(cfg.robust.alpha == doctest::Approx(1.0 / 1.6));
  CHECK(cfg.robust.mu0 == doctest::Approx(std::pow(1.6, 7)));
  CHECK(cfg.eval.mode == FitMode::AllPoints);

  const RunConfig back = parse_run_config(serialize_run_config(cfg));
  CHECK(serialize_run_config(back) == serialize_run_config(cfg));
}

TEST_CASE("validation errors carry field paths") {
  CHECK_THROWS_WITH_AS(parse_run_config(R"({"grid": {"degree": 9}})"),
                       doctest::Contains("grid.degree"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config(R"({"grid": {"control_point_distance": -2}})"),
                       doctest::Contains("grid.control_point_distance"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config(R"({"robust": {"robustifier": "huber"}})"),
                       doctest::Contains("robust.robustifier"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config(R"({"evaluation": {"holdout_fraction": 1.5}})"),
                       doctest::Contains("holdout_fraction"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config(R"({"schema_version": 3})"),
                       doctest::Contains("schema_version"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("not json at all"), ConfigError);
}

TEST_CASE("dotted-path overrides") {
  RunConfig cfg = parse_run_config("{}");
  apply_override(cfg, "robust.c=0.6");
  apply_override(cfg, "grid.control_point_distance=5");
  apply_override(cfg, "evaluation.mode=all_points");
  CHECK(cfg.robust.c == doctest::Approx(0.6));
  CHECK(cfg.grid.spec.spacing == doctest::Approx(5.0));
  CHECK(cfg.eval.mode == FitMode::AllPoints);

  CHECK_THROWS_AS(apply_override(cfg, "no-equals-sign"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "robust.c=-1"), ConfigError);
}

TEST_CASE("study enumeration covers the configured cells") {
  const RunConfig cfg = parse_run_config("{}");

  const auto models = enumerate_study(cfg, "models");
  CHECK(models.size() == 4);
  CHECK(models[0].label == "model=ubs");

  const auto robustifiers = enumerate_study(cfg, "robustifiers");
  CHECK(robustifiers.size() == 9);  // OLS plus TLS/GMC at four thresholds
  CHECK(robustifiers[0].robust.robustifier == Robustifier::OLS);
  for (const StudyCell& cell : robustifiers) {
    CHECK(cell.model == ModelKind::Ubs);
    if (cell.robust.robustifier == Robustifier::GMC) CHECK(cell.robust.alpha < 1.0);
    if (cell.robust.robustifier == Robustifier::TLS) CHECK(cell.robust.alpha > 1.0);
  }

  const auto asym = enumerate_study(cfg, "asymmetry");
  CHECK(asym.size() == 4);
  CHECK(asym[1].robust.r_asymm == doctest::Approx(2.0));

  const auto grid = enumerate_study(cfg, "grid");
  CHECK(grid.size() == 9);
  CHECK(grid[0].grid.spacing == doctest::Approx(2.0));
  CHECK(grid[0].robust.w_smooth == doctest::Approx(1.0));
  CHECK(grid.back().grid.spacing == doctest::Approx(10.0));
  CHECK(grid.back().robust.w_smooth == doctest::Approx(10.0));

  CHECK_THROWS_AS(enumerate_study(cfg, "nope"), ConfigError);
}

TEST_SUITE_END();
