#include "terrafit/kernels.hpp"

#include "kernels_detail.hpp"

namespace terrafit::kernels {

namespace {

using namespace detail;

void residuals(std::size_t n, int k, const std::int32_t* cols, const double* vals,
               const double* p, const double* h, double* dh) {
  for (std::size_t i = 0; i < n; ++i) dh[i] = residual_one(n, k, cols, vals, p, h[i], i);
}

void asymmetric_scale(std::size_t n, const double* dh, double r, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = asym_one(dh[i], r);
}

void weights_gmc(std::size_t n, const double* dh, double mu, double c, double* w) {
  const double mu_c2 = mu * c * c;
  for (std::size_t i = 0; i < n; ++i) w[i] = gmc_one(dh[i], mu_c2);
}

void weights_tls(std::size_t n, const double* dh, double mu, double c, double* w) {
  const TlsConsts consts(mu, c);
  for (std::size_t i = 0; i < n; ++i) w[i] = tls_one(dh[i], consts);
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{"scalar", residuals, asymmetric_scale, weights_gmc, weights_tls};
  return ops;
}

}  // namespace terrafit::kernels
