#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "terrafit/design.hpp"
#include "terrafit/geometry.hpp"
#include "terrafit/robust.hpp"
#include "terrafit/smoothness.hpp"
#include "terrafit/spline_grid.hpp"

namespace terrafit {

/// Lattice geometry requested by configuration; fits validate candidate
/// grids against it.
struct GridSpec {
  double spacing = 2.0;
  int degree = 2;
};

/// Per-iteration record of the alternating fit. The control-point solve
/// minimizes the symmetric weighted objective; the weight update minimizes
/// the asymmetric one. Costs are recorded around both steps at the
/// iteration's fixed mu.
struct IterationStats {
  int k = 0;
  double mu = 0.0;
  double cost_pre_solve = 0.0;     // symmetric objective, incoming p
  double cost_post_solve = 0.0;    // symmetric objective, solved p
  double cost_pre_weights = 0.0;   // asymmetric objective, incoming w
  double cost_post_weights = 0.0;  // asymmetric objective, updated w
  double data_cost = 0.0;          // sum w dh^2 at iteration end
  double smooth_cost = 0.0;        // w_smooth * penalty(p)
  double phi_cost = 0.0;           // sum Phi_mu(w)
  double inlier_fraction = 0.0;    // fraction of weights > 0.5
  std::array<double, 10> weight_hist{};
};

struct FitResult {
  ControlGrid surface;
  std::vector<double> weights;      // final weights, aligned with `kept`
  std::vector<std::uint32_t> kept;  // input indices retained by the design
  std::size_t dropped = 0;
  std::vector<IterationStats> trace;
};

/// argmin_p |diag(w,s)^(1/2) ([B; B_S] p - [h; 0])|^2 with s = w_smooth on
/// every smoothness row, solved through the ridge-stabilized normal
/// equations. Generic path; gnc_fit uses a structure-cached equivalent.
std::vector<double> solve_wls(const SparseDesign& design, std::span<const double> h,
                              std::span<const double> w, const SmoothnessOperator* smooth,
                              double w_smooth, double ridge_eps);

/// Alternating graduated non-convexity fit: weighted control-point solves
/// and closed-form weight updates under the mu schedule. The first solve
/// uses unit weights; OLS stops after it. Out-of-domain points are dropped
/// and counted. Reentrant; concurrent fits on distinct inputs are safe.
FitResult gnc_fit(const PointCloud& points, const ControlGrid& grid, const RobustConfig& cfg);

/// One weighted solve seeded by the previous surface: weights come from the
/// previous residuals at the schedule's terminal mu.
ControlGrid warm_start_step(const PointCloud& points, const ControlGrid& prev,
                            const GridSpec& spec, const RobustConfig& cfg);

/// One JSON object per iteration, newline separated.
std::string trace_to_jsonl(const std::vector<IterationStats>& trace);

}  // namespace terrafit
