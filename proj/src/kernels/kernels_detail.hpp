#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>

// Scalar element routines shared by the reference kernels and the vector
// variants' tail loops. std::fma keeps the scalar path bit-identical to the
// fused multiply-adds the vector lanes execute.

namespace terrafit::kernels::detail {

inline double residual_one(std::size_t n, int k, const std::int32_t* cols, const double* vals,
                           const double* p, double h, std::size_t i) {
  double acc = h;
  for (int j = 0; j < k; ++j) {
    const std::size_t s = std::size_t(j) * n + i;
    acc = std::fma(-vals[s], p[cols[s]], acc);
  }
  return acc;
}

inline double asym_one(double dh, double r) { return dh > 0.0 ? r * dh : dh; }

inline double gmc_one(double dh, double mu_c2) {
  const double q = dh * dh;
  const double ratio = mu_c2 / (mu_c2 + q);
  return ratio * ratio;
}

struct TlsConsts {
  double lower;  // mu/(mu+1) c^2
  double upper;  // (mu+1)/mu c^2
  double num;    // c sqrt(mu(mu+1))
  double mu;

  TlsConsts(double mu_, double c) : mu(mu_) {
    lower = mu / (mu + 1.0) * c * c;
    upper = (mu + 1.0) / mu * c * c;
    num = c * std::sqrt(mu * (mu + 1.0));
  }
};

inline double tls_one(double dh, const TlsConsts& k) {
  const double q = dh * dh;
  if (q < k.lower) return 1.0;
  if (q > k.upper) return 0.0;
  const double w = k.num / std::fabs(dh) - k.mu;
  return std::fmin(std::fmax(w, 0.0), 1.0);
}

}  // namespace terrafit::kernels::detail
