#include "terrafit/robust.hpp"

#include <cmath>

#include "kernels/kernels_detail.hpp"
#include "terrafit/errors.hpp"

namespace terrafit {

std::string to_string(Robustifier r) {
  switch (r) {
    case Robustifier::GMC: return "gmc";
    case Robustifier::TLS: return "tls";
    case Robustifier::OLS: return "ols";
  }
  return "?";
}

Robustifier robustifier_from_string(const std::string& name) {
  if (name == "gmc" || name == "GMC") return Robustifier::GMC;
  if (name == "tls" || name == "TLS") return Robustifier::TLS;
  if (name == "ols" || name == "OLS") return Robustifier::OLS;
  throw ConfigError("unknown robustifier '" + name + "' (expected gmc, tls or ols)");
}

RobustConfig& RobustConfig::finalize() {
  if (max_iters < 1) throw ConfigError("robust.max_iters must be at least 1");
  if (c <= 0.0) throw ConfigError("robust.c must be positive");
  if (r_asymm < 1.0) throw ConfigError("robust.r_asymm must be >= 1");
  if (w_smooth < 0.0) throw ConfigError("robust.w_smooth must be >= 0");
  if (ridge_eps < 0.0) throw ConfigError("robust.ridge_eps must be >= 0");

  if (alpha == 0.0) alpha = (robustifier == Robustifier::GMC) ? 1.0 / 1.6 : 1.6;
  if (mu0 == 0.0) {
    // GMC anneals downward; start convex enough that mu reaches 1 on the
    // last scheduled iteration. TLS anneals upward from 1.
    mu0 = (robustifier == Robustifier::GMC) ? std::pow(1.0 / alpha, max_iters - 1) : 1.0;
  }
  if (mu0 <= 0.0) throw ConfigError("robust.mu0 must be positive");
  if (robustifier == Robustifier::TLS && alpha <= 1.0)
    throw ConfigError("robust.alpha must exceed 1 for TLS");
  if (robustifier == Robustifier::GMC && (alpha <= 0.0 || alpha >= 1.0))
    throw ConfigError("robust.alpha must lie in (0,1) for GMC");
  return *this;
}

double RobustConfig::terminal_mu() const {
  return mu0 * std::pow(alpha, max_iters - 1);
}

double asymmetric_error(double dh, double r_asymm) {
  return kernels::detail::asym_one(dh, r_asymm);
}

double weight_gmc(double dh_tilde, double mu, double c) {
  return kernels::detail::gmc_one(dh_tilde, mu * c * c);
}

double weight_tls(double dh_tilde, double mu, double c) {
  return kernels::detail::tls_one(dh_tilde, kernels::detail::TlsConsts(mu, c));
}

double weight_penalty(Robustifier r, double w, double mu, double c) {
  switch (r) {
    case Robustifier::GMC: {
      const double s = std::sqrt(w) - 1.0;
      return mu * c * c * s * s;
    }
    case Robustifier::TLS:
      return mu * (1.0 - w) / (mu + w) * c * c;
    case Robustifier::OLS:
      return 0.0;
  }
  return 0.0;
}

}  // namespace terrafit
