#if defined(__aarch64__)

#include <arm_neon.h>

#include "terrafit/kernels.hpp"
#include "kernels_detail.hpp"

namespace terrafit::kernels {

namespace {

using namespace detail;

void residuals(std::size_t n, int k, const std::int32_t* cols, const double* vals,
               const double* p, const double* h, double* dh) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t acc = vld1q_f64(h + i);
    for (int j = 0; j < k; ++j) {
      const std::size_t s = std::size_t(j) * n + i;
      float64x2_t pv = vdupq_n_f64(p[cols[s]]);
      pv = vsetq_lane_f64(p[cols[s + 1]], pv, 1);
      const float64x2_t vv = vld1q_f64(vals + s);
      acc = vfmsq_f64(acc, vv, pv);
    }
    vst1q_f64(dh + i, acc);
  }
  for (; i < n; ++i) dh[i] = residual_one(n, k, cols, vals, p, h[i], i);
}

void asymmetric_scale(std::size_t n, const double* dh, double r, double* out) {
  const float64x2_t vr = vdupq_n_f64(r);
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vld1q_f64(dh + i);
    const uint64x2_t above = vcgtq_f64(v, zero);
    vst1q_f64(out + i, vbslq_f64(above, vmulq_f64(vr, v), v));
  }
  for (; i < n; ++i) out[i] = asym_one(dh[i], r);
}

void weights_gmc(std::size_t n, const double* dh, double mu, double c, double* w) {
  const double mu_c2 = mu * c * c;
  const float64x2_t s = vdupq_n_f64(mu_c2);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vld1q_f64(dh + i);
    const float64x2_t q = vmulq_f64(v, v);
    const float64x2_t ratio = vdivq_f64(s, vaddq_f64(s, q));
    vst1q_f64(w + i, vmulq_f64(ratio, ratio));
  }
  for (; i < n; ++i) w[i] = gmc_one(dh[i], mu_c2);
}

void weights_tls(std::size_t n, const double* dh, double mu, double c, double* w) {
  const TlsConsts consts(mu, c);
  const float64x2_t lower = vdupq_n_f64(consts.lower);
  const float64x2_t upper = vdupq_n_f64(consts.upper);
  const float64x2_t num = vdupq_n_f64(consts.num);
  const float64x2_t vmu = vdupq_n_f64(consts.mu);
  const float64x2_t zero = vdupq_n_f64(0.0);
  const float64x2_t one = vdupq_n_f64(1.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vld1q_f64(dh + i);
    const float64x2_t q = vmulq_f64(v, v);
    const float64x2_t absd = vabsq_f64(v);
    float64x2_t mid = vsubq_f64(vdivq_f64(num, absd), vmu);
    mid = vminq_f64(vmaxq_f64(mid, zero), one);
    float64x2_t out = vbslq_f64(vcgtq_f64(q, upper), zero, mid);
    out = vbslq_f64(vcltq_f64(q, lower), one, out);
    vst1q_f64(w + i, out);
  }
  for (; i < n; ++i) w[i] = tls_one(dh[i], consts);
}

}  // namespace

const Ops* neon_ops() {
  static const Ops ops{"neon", residuals, asymmetric_scale, weights_gmc, weights_tls};
  return &ops;
}

}  // namespace terrafit::kernels

#endif  // __aarch64__
