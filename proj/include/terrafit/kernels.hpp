#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace terrafit::kernels {

/// Batched inner-loop kernels of the fitting pipeline. All variants of one
/// kernel produce bit-identical results on identical inputs (same operation
/// order, FMA in every lane), which the equivalence tests assert.
///
/// Sparse rows use a striped (ELL) layout: a design with n rows and k
/// nonzeros per row stores cols[j*n + i] / vals[j*n + i] for row i,
/// nonzero j.
struct Ops {
  const char* name;

  /// dh[i] = h[i] - sum_j vals[j*n+i] * p[cols[j*n+i]]
  void (*residuals)(std::size_t n, int k, const std::int32_t* cols, const double* vals,
                    const double* p, const double* h, double* dh);

  /// out[i] = r * dh[i] if dh[i] > 0 else dh[i]
  void (*asymmetric_scale)(std::size_t n, const double* dh, double r, double* out);

  /// w[i] = (mu c^2 / (mu c^2 + dh[i]^2))^2
  void (*weights_gmc)(std::size_t n, const double* dh, double mu, double c, double* w);

  /// w[i] = 1                          if dh[i]^2 < mu/(mu+1) c^2
  ///        0                          if dh[i]^2 > (mu+1)/mu c^2
  ///        c sqrt(mu(mu+1))/|dh[i]| - mu, clamped to [0,1], otherwise
  void (*weights_tls)(std::size_t n, const double* dh, double mu, double c, double* w);
};

/// Portable reference implementation.
const Ops& scalar_ops();

/// Best variant supported by the running CPU. The TERRAFIT_KERNELS
/// environment variable ("scalar", "avx2", "neon") overrides autodetection.
const Ops& active_ops();

/// All variants usable on this machine, reference first.
std::vector<const Ops*> available_ops();

/// Forces a variant by name; returns false if it is not available here.
bool force_ops(const char* name);

}  // namespace terrafit::kernels
