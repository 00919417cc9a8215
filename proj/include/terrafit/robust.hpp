#pragma once

#include <string>

namespace terrafit {

enum class Robustifier { GMC, TLS, OLS };

std::string to_string(Robustifier r);
Robustifier robustifier_from_string(const std::string& name);

/// Parameters of the graduated non-convexity fit. Call finalize() after
/// construction or mutation: it fills the schedule fields that depend on the
/// robustifier (mu0, alpha) when they were not set explicitly, then
/// validates.
struct RobustConfig {
  Robustifier robustifier = Robustifier::TLS;
  double c = 0.4;             // error threshold, meters
  double mu0 = 0.0;           // initial convexity; 0 = pick per robustifier
  double alpha = 0.0;         // per-iteration mu factor; 0 = pick per robustifier
  int max_iters = 10;
  double r_asymm = 2.0;       // scale on positive (above-surface) residuals
  double w_smooth = 1.0;      // weight of the smoothness rows
  int smoothness_order = 2;
  double ridge_eps = 1e-9;

  RobustConfig& finalize();

  /// mu of the final weight update of a full schedule; warm starts reuse it.
  double terminal_mu() const;
};

/// Positive residuals (point above surface) scaled by r, negative kept.
double asymmetric_error(double dh, double r_asymm);

/// Closed-form optimal weight of the Geman-McClure penalty at convexity mu.
double weight_gmc(double dh_tilde, double mu, double c);

/// Closed-form optimal weight of the truncated-least-squares penalty:
/// 1 below mu/(mu+1) c^2, 0 above (mu+1)/mu c^2, continuous in between.
double weight_tls(double dh_tilde, double mu, double c);

/// Weight penalty Phi_mu(w) of the chosen robustifier (0 for OLS).
double weight_penalty(Robustifier r, double w, double mu, double c);

}  // namespace terrafit
