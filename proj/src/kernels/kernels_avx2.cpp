#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "terrafit/kernels.hpp"
#include "kernels_detail.hpp"

namespace terrafit::kernels {

namespace {

using namespace detail;

void residuals(std::size_t n, int k, const std::int32_t* cols, const double* vals,
               const double* p, const double* h, double* dh) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_loadu_pd(h + i);
    for (int j = 0; j < k; ++j) {
      const std::size_t s = std::size_t(j) * n + i;
      const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(cols + s));
      const __m256d pv = _mm256_i32gather_pd(p, idx, 8);
      const __m256d vv = _mm256_loadu_pd(vals + s);
      acc = _mm256_fnmadd_pd(vv, pv, acc);
    }
    _mm256_storeu_pd(dh + i, acc);
  }
  for (; i < n; ++i) dh[i] = residual_one(n, k, cols, vals, p, h[i], i);
}

void asymmetric_scale(std::size_t n, const double* dh, double r, double* out) {
  const __m256d vr = _mm256_set1_pd(r);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(dh + i);
    const __m256d above = _mm256_cmp_pd(v, zero, _CMP_GT_OQ);
    _mm256_storeu_pd(out + i, _mm256_blendv_pd(v, _mm256_mul_pd(vr, v), above));
  }
  for (; i < n; ++i) out[i] = asym_one(dh[i], r);
}

void weights_gmc(std::size_t n, const double* dh, double mu, double c, double* w) {
  const double mu_c2 = mu * c * c;
  const __m256d s = _mm256_set1_pd(mu_c2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(dh + i);
    const __m256d q = _mm256_mul_pd(v, v);
    const __m256d ratio = _mm256_div_pd(s, _mm256_add_pd(s, q));
    _mm256_storeu_pd(w + i, _mm256_mul_pd(ratio, ratio));
  }
  for (; i < n; ++i) w[i] = gmc_one(dh[i], mu_c2);
}

void weights_tls(std::size_t n, const double* dh, double mu, double c, double* w) {
  const TlsConsts consts(mu, c);
  const __m256d lower = _mm256_set1_pd(consts.lower);
  const __m256d upper = _mm256_set1_pd(consts.upper);
  const __m256d num = _mm256_set1_pd(consts.num);
  const __m256d vmu = _mm256_set1_pd(consts.mu);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(dh + i);
    const __m256d q = _mm256_mul_pd(v, v);
    const __m256d absd = _mm256_and_pd(v, abs_mask);
    __m256d mid = _mm256_sub_pd(_mm256_div_pd(num, absd), vmu);
    mid = _mm256_min_pd(_mm256_max_pd(mid, zero), one);
    __m256d out = _mm256_blendv_pd(mid, zero, _mm256_cmp_pd(q, upper, _CMP_GT_OQ));
    out = _mm256_blendv_pd(out, one, _mm256_cmp_pd(q, lower, _CMP_LT_OQ));
    _mm256_storeu_pd(w + i, out);
  }
  for (; i < n; ++i) w[i] = tls_one(dh[i], consts);
}

}  // namespace

const Ops* avx2_ops() {
  static const Ops ops{"avx2", residuals, asymmetric_scale, weights_gmc, weights_tls};
  return &ops;
}

}  // namespace terrafit::kernels

#endif  // x86_64
