#include "pvstab/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace pvstab::kern::detail {

void axpy_neon(std::size_t n, double a, const double* x, double* y) {
  const float64x2_t av = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t yv = vld1q_f64(y + i);
    yv = vfmaq_f64(yv, av, vld1q_f64(x + i));
    vst1q_f64(y + i, yv);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

double dot_neon(std::size_t n, const double* x, const double* y) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    acc = vfmaq_f64(acc, vld1q_f64(x + i), vld1q_f64(y + i));
  double tail = vaddvq_f64(acc);
  for (; i < n; ++i) tail += x[i] * y[i];
  return tail;
}

void matvec_neon(const double* m, std::size_t rows, std::size_t cols,
                 const double* v, double* out) {
  for (std::size_t r = 0; r < rows; ++r) out[r] = dot_neon(cols, m + r * cols, v);
}

// Multiply-then-add, outer loop over a, inner over b: mirrors convolve_scalar
// operation for operation, so results are bit-identical.
void convolve_neon(const double* a, std::size_t na, const double* b,
                   std::size_t nb, double* out) {
  const std::size_t n_out = na + nb - 1;
  for (std::size_t i = 0; i < n_out; ++i) out[i] = 0.0;
  for (std::size_t i = 0; i < na; ++i) {
    const float64x2_t ai = vdupq_n_f64(a[i]);
    double* o = out + i;
    std::size_t k = 0;
    for (; k + 2 <= nb; k += 2) {
      const float64x2_t prod = vmulq_f64(ai, vld1q_f64(b + k));
      vst1q_f64(o + k, vaddq_f64(vld1q_f64(o + k), prod));
    }
    for (; k < nb; ++k) {
      const double prod = a[i] * b[k];
      o[k] += prod;
    }
  }
}

}  // namespace pvstab::kern::detail

#endif  // __aarch64__
