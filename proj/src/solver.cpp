#include "terrafit/solver.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>

#include "terrafit/errors.hpp"
#include "terrafit/kernels.hpp"

namespace terrafit {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

/// Normal-equation engine for grid-based designs. The pattern of
/// B^T diag(w) B is contained in the lattice band |du| <= degree,
/// |dv| <= degree, which is weight-independent, so the sparsity and the
/// symbolic factorization are built once and only values are refilled
/// between iterations.
class NormalSystem {
 public:
  NormalSystem(const ControlGrid& grid, const SparseDesign& design,
               const SmoothnessOperator* smooth, double w_smooth, double ridge)
      : design_(design), n_v_(grid.n_v()), degree_(grid.degree()) {
    const std::int64_t n = grid.num_control_points();
    build_band_pattern(grid.n_u(), n);

    base_.assign(std::size_t(a_.nonZeros()), 0.0);
    if (smooth && w_smooth > 0.0) {
      const SpMat& g = smooth->gram();
      for (int col = 0; col < g.outerSize(); ++col) {
        for (SpMat::InnerIterator it(g, col); it; ++it) {
          if (it.row() <= it.col())
            base_[std::size_t(slot(it.row(), it.col()))] += w_smooth * it.value();
        }
      }
    }
    for (std::int64_t j = 0; j < n; ++j) base_[std::size_t(slot(j, j))] += ridge;
  }

  /// Solves (B^T diag(w) B + base) p = B^T diag(w) h.
  Eigen::VectorXd solve(std::span<const double> w, std::span<const double> h, int iteration) {
    double* vals = a_.valuePtr();
    std::copy(base_.begin(), base_.end(), vals);

    const std::size_t n_rows = design_.rows();
    const int k = design_.nnz_per_row();
    const std::int32_t* cols = design_.col_data();
    const double* dvals = design_.val_data();

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(a_.rows());
    std::int32_t c[BasisRow::kMaxSupport];
    double v[BasisRow::kMaxSupport];
    for (std::size_t r = 0; r < n_rows; ++r) {
      const double wr = w[r];
      if (wr == 0.0) continue;
      for (int j = 0; j < k; ++j) {
        const std::size_t s = std::size_t(j) * n_rows + r;
        c[j] = cols[s];
        v[j] = dvals[s];
      }
      const double wh = wr * h[r];
      for (int a = 0; a < k; ++a) {
        const double wa = wr * v[a];
        rhs[c[a]] += v[a] * wh;
        // Basis columns are strictly increasing, so (c[a], c[b]) with
        // b >= a indexes the upper triangle directly.
        for (int b = a; b < k; ++b) vals[std::size_t(slot(c[a], c[b]))] += wa * v[b];
      }
    }

    if (!analyzed_) {
      ldlt_.analyzePattern(a_);
      analyzed_ = true;
    }
    ldlt_.factorize(a_);
    if (ldlt_.info() != Eigen::Success)
      throw NumericalError("normal-equation factorization failed at iteration " +
                           std::to_string(iteration));
    Eigen::VectorXd p = ldlt_.solve(rhs);
    if (ldlt_.info() != Eigen::Success)
      throw NumericalError("normal-equation solve failed at iteration " +
                           std::to_string(iteration));
    return p;
  }

 private:
  // Column j of the upper-triangle band holds rows i <= j whose lattice
  // offsets are within +-degree per axis; rows appear in increasing order.
  std::int64_t slot(std::int64_t i, std::int64_t j) const {
    const std::int64_t ju = j / n_v_, jv = j % n_v_;
    const std::int64_t iu = i / n_v_, iv = i % n_v_;
    const std::int64_t lo_u = std::max<std::int64_t>(0, ju - degree_);
    const std::int64_t lo_v = std::max<std::int64_t>(0, jv - degree_);
    const std::int64_t hi_v = std::min<std::int64_t>(n_v_ - 1, jv + degree_);
    const std::int64_t width = hi_v - lo_v + 1;
    return a_.outerIndexPtr()[j] + (iu - lo_u) * width + (iv - lo_v);
  }

  void build_band_pattern(int n_u, std::int64_t n) {
    std::vector<Eigen::Triplet<double>> trips;
    for (std::int64_t j = 0; j < n; ++j) {
      const std::int64_t ju = j / n_v_, jv = j % n_v_;
      const std::int64_t lo_u = std::max<std::int64_t>(0, ju - degree_);
      const std::int64_t lo_v = std::max<std::int64_t>(0, jv - degree_);
      const std::int64_t hi_v = std::min<std::int64_t>(n_v_ - 1, jv + degree_);
      for (std::int64_t fu = lo_u; fu <= ju; ++fu) {
        const std::int64_t v_end = (fu == ju) ? jv : hi_v;
        for (std::int64_t fv = lo_v; fv <= v_end; ++fv)
          trips.emplace_back(int(fu * n_v_ + fv), int(j), 0.0);
      }
    }
    a_.resize(n, n);
    a_.setFromTriplets(trips.begin(), trips.end());
    a_.makeCompressed();

    // The slot arithmetic must agree with the compressed layout.
    for (std::int64_t j = 0; j < n; ++j) {
      for (std::int64_t s = a_.outerIndexPtr()[j]; s < a_.outerIndexPtr()[j + 1]; ++s) {
        if (slot(a_.innerIndexPtr()[s], j) != s)
          throw NumericalError("internal: band slot arithmetic mismatch");
      }
    }
    (void)n_u;
  }

  const SparseDesign& design_;
  int n_v_;
  int degree_;
  SpMat a_;
  std::vector<double> base_;
  Eigen::SimplicialLDLT<SpMat, Eigen::Upper> ldlt_;
  bool analyzed_ = false;
};

struct CostTerms {
  double data = 0.0;
  double phi = 0.0;
  double smooth = 0.0;
  double total() const { return data + phi + smooth; }
};

CostTerms objective(std::span<const double> dh, std::span<const double> w, Robustifier rob,
                    double mu, double c, double smooth_cost) {
  CostTerms t;
  t.smooth = smooth_cost;
  for (std::size_t i = 0; i < dh.size(); ++i) {
    t.data += w[i] * dh[i] * dh[i];
    t.phi += weight_penalty(rob, w[i], mu, c);
  }
  return t;
}

void update_weights(Robustifier rob, std::span<const double> dh_tilde, double mu, double c,
                    std::span<double> w) {
  const auto& ops = kernels::active_ops();
  switch (rob) {
    case Robustifier::GMC:
      ops.weights_gmc(dh_tilde.size(), dh_tilde.data(), mu, c, w.data());
      break;
    case Robustifier::TLS:
      ops.weights_tls(dh_tilde.size(), dh_tilde.data(), mu, c, w.data());
      break;
    case Robustifier::OLS:
      std::fill(w.begin(), w.end(), 1.0);
      break;
  }
}

}  // namespace

std::vector<double> solve_wls(const SparseDesign& design, std::span<const double> h,
                              std::span<const double> w, const SmoothnessOperator* smooth,
                              double w_smooth, double ridge_eps) {
  if (h.size() != design.rows() || w.size() != design.rows())
    throw ConfigError("solve_wls: weight/height length must equal the design row count");
  for (double wi : w)
    if (!(wi >= 0.0)) throw ConfigError("solve_wls: weights must be nonnegative");
  if (smooth && smooth->n_cols() != design.cols())
    throw ConfigError("solve_wls: smoothness operator column count mismatch");

  const std::int64_t n = design.cols();
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (std::size_t r = 0; r < design.rows(); ++r) {
    if (w[r] == 0.0) continue;
    for (int a = 0; a < design.nnz_per_row(); ++a) {
      const double wa = w[r] * design.val(r, a);
      rhs[design.col(r, a)] += wa * h[r];
      for (int b = 0; b < design.nnz_per_row(); ++b)
        trips.emplace_back(design.col(r, a), design.col(r, b), wa * design.val(r, b));
    }
  }
  if (smooth && w_smooth > 0.0) {
    const SpMat& g = smooth->gram();
    for (int col = 0; col < g.outerSize(); ++col)
      for (SpMat::InnerIterator it(g, col); it; ++it)
        trips.emplace_back(int(it.row()), int(it.col()), w_smooth * it.value());
  }
  for (std::int64_t j = 0; j < n; ++j) trips.emplace_back(int(j), int(j), ridge_eps);

  SpMat a(n, n);
  a.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<SpMat> ldlt(a);
  if (ldlt.info() != Eigen::Success)
    throw NumericalError("solve_wls: normal matrix is not positive definite");
  const Eigen::VectorXd p = ldlt.solve(rhs);
  if (ldlt.info() != Eigen::Success) throw NumericalError("solve_wls: backsolve failed");
  return {p.data(), p.data() + p.size()};
}

FitResult gnc_fit(const PointCloud& points, const ControlGrid& grid, const RobustConfig& config) {
  RobustConfig cfg = config;
  cfg.finalize();
  if (points.empty()) throw ConfigError("gnc_fit: empty point cloud");

  DesignBuild build = build_design(grid, points.x1, points.x2, OutOfDomainPolicy::DropAndCount);
  const std::size_t n = build.design.rows();
  const int support = (grid.degree() + 1) * (grid.degree() + 1);
  if (std::int64_t(n) < support && cfg.w_smooth <= 0.0)
    throw ConfigError("gnc_fit: needs at least (degree+1)^2 points or a smoothness weight");

  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = points.h[build.kept[i]];

  std::optional<SmoothnessOperator> smooth;
  if (cfg.w_smooth > 0.0) smooth.emplace(grid, cfg.smoothness_order);
  NormalSystem sys(grid, build.design, smooth ? &*smooth : nullptr, cfg.w_smooth, cfg.ridge_eps);

  const auto smooth_cost = [&](std::span<const double> p) {
    return smooth ? cfg.w_smooth * smooth->penalty_value(p) : 0.0;
  };

  const auto& ops = kernels::active_ops();
  std::vector<double> p = grid.heights();
  std::vector<double> w(n, 1.0);
  std::vector<double> dh(n), dh_tilde(n);
  const int iters = (cfg.robustifier == Robustifier::OLS) ? 1 : cfg.max_iters;
  double mu = cfg.mu0;

  FitResult out{grid, {}, std::move(build.kept), build.dropped, {}};
  out.trace.reserve(std::size_t(iters));

  for (int k = 0; k < iters; ++k) {
    IterationStats st;
    st.k = k;
    st.mu = mu;

    build.design.residuals(p, h, dh);
    st.cost_pre_solve = objective(dh, w, cfg.robustifier, mu, cfg.c, smooth_cost(p)).total();

    Eigen::VectorXd solved = sys.solve(w, h, k);
    p.assign(solved.data(), solved.data() + solved.size());

    build.design.residuals(p, h, dh);
    const double sc = smooth_cost(p);
    st.cost_post_solve = objective(dh, w, cfg.robustifier, mu, cfg.c, sc).total();

    ops.asymmetric_scale(n, dh.data(), cfg.r_asymm, dh_tilde.data());
    st.cost_pre_weights = objective(dh_tilde, w, cfg.robustifier, mu, cfg.c, sc).total();

    update_weights(cfg.robustifier, dh_tilde, mu, cfg.c, w);
    const CostTerms post = objective(dh_tilde, w, cfg.robustifier, mu, cfg.c, sc);
    st.cost_post_weights = post.total();
    st.phi_cost = post.phi;
    st.smooth_cost = sc;

    std::size_t inliers = 0;
    for (std::size_t i = 0; i < n; ++i) {
      st.data_cost += w[i] * dh[i] * dh[i];
      if (w[i] > 0.5) ++inliers;
      const int bin = std::min(9, int(w[i] * 10.0));
      st.weight_hist[std::size_t(bin)] += 1.0;
    }
    st.inlier_fraction = double(inliers) / double(n);
    for (double& b : st.weight_hist) b /= double(n);
    out.trace.push_back(st);

    // mu comes from the closed-form schedule rather than repeated products;
    // the stop test carries slack so roundoff at the mu = 1 boundary cannot
    // drop the final annealing step.
    const double mu_next = cfg.mu0 * std::pow(cfg.alpha, k + 1);
    if (cfg.robustifier == Robustifier::GMC && mu_next < 1.0 - 1e-9) break;
    mu = mu_next;
  }

  out.surface = grid.with_heights(std::move(p));
  out.weights = std::move(w);
  return out;
}

ControlGrid warm_start_step(const PointCloud& points, const ControlGrid& prev,
                            const GridSpec& spec, const RobustConfig& config) {
  RobustConfig cfg = config;
  cfg.finalize();
  if (prev.spacing() != spec.spacing || prev.degree() != spec.degree)
    throw ConfigError("warm_start_step: previous grid geometry does not match the configuration");
  if (points.empty()) throw ConfigError("warm_start_step: empty point cloud");

  DesignBuild build = build_design(prev, points.x1, points.x2, OutOfDomainPolicy::DropAndCount);
  const std::size_t n = build.design.rows();
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = points.h[build.kept[i]];

  std::vector<double> dh(n), w(n, 1.0);
  build.design.residuals(prev.heights(), h, dh);
  const auto& ops = kernels::active_ops();
  ops.asymmetric_scale(n, dh.data(), cfg.r_asymm, dh.data());
  update_weights(cfg.robustifier, dh, cfg.terminal_mu(), cfg.c, w);

  std::optional<SmoothnessOperator> smooth;
  if (cfg.w_smooth > 0.0) smooth.emplace(prev, cfg.smoothness_order);
  NormalSystem sys(prev, build.design, smooth ? &*smooth : nullptr, cfg.w_smooth, cfg.ridge_eps);
  Eigen::VectorXd p = sys.solve(w, h, 0);
  return prev.with_heights({p.data(), p.data() + p.size()});
}

std::string trace_to_jsonl(const std::vector<IterationStats>& trace) {
  std::string out;
  char buf[512];
  for (const IterationStats& st : trace) {
    std::snprintf(buf, sizeof buf,
                  "{\"k\":%d,\"mu\":%.17g,\"cost\":%.17g,\"inlier_fraction\":%.6f,"
                  "\"data_cost\":%.17g,\"smooth_cost\":%.17g,\"phi_cost\":%.17g,"
                  "\"cost_pre_solve\":%.17g,\"cost_post_solve\":%.17g,\"weight_hist\":[",
                  st.k, st.mu, st.cost_post_weights, st.inlier_fraction, st.data_cost,
                  st.smooth_cost, st.phi_cost, st.cost_pre_solve, st.cost_post_solve);
    out += buf;
    for (std::size_t i = 0; i < st.weight_hist.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s%.6f", i ? "," : "", st.weight_hist[i]);
      out += buf;
    }
    out += "]}\n";
  }
  return out;
}

}  // namespace terrafit
