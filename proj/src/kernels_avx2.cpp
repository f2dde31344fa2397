#include "pvstab/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

namespace pvstab::kern::detail {

bool cpu_has_avx2() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

__attribute__((target("avx2,fma"))) void axpy_avx2(std::size_t n, double a,
                                                   const double* x,
                                                   double* y) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yv = _mm256_loadu_pd(y + i);
    yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
    _mm256_storeu_pd(y + i, yv);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

__attribute__((target("avx2,fma"))) double dot_avx2(std::size_t n,
                                                    const double* x,
                                                    const double* y) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  __m128d lo = _mm256_castpd256_pd128(acc);
  __m128d hi = _mm256_extractf128_pd(acc, 1);
  lo = _mm_add_pd(lo, hi);
  double tail = _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
  for (; i < n; ++i) tail += x[i] * y[i];
  return tail;
}

__attribute__((target("avx2,fma"))) void matvec_avx2(const double* m,
                                                     std::size_t rows,
                                                     std::size_t cols,
                                                     const double* v,
                                                     double* out) {
  for (std::size_t r = 0; r < rows; ++r) out[r] = dot_avx2(cols, m + r * cols, v);
}

// Multiply-then-add on every lane, outer loop over a, inner over b: the exact
// operation sequence of convolve_scalar, so results are bit-identical.
__attribute__((target("avx2"))) void convolve_avx2(const double* a,
                                                   std::size_t na,
                                                   const double* b,
                                                   std::size_t nb,
                                                   double* out) {
  const std::size_t n_out = na + nb - 1;
  for (std::size_t i = 0; i < n_out; ++i) out[i] = 0.0;
  for (std::size_t i = 0; i < na; ++i) {
    const __m256d ai = _mm256_set1_pd(a[i]);
    double* o = out + i;
    std::size_t k = 0;
    for (; k + 4 <= nb; k += 4) {
      const __m256d prod = _mm256_mul_pd(ai, _mm256_loadu_pd(b + k));
      _mm256_storeu_pd(o + k, _mm256_add_pd(_mm256_loadu_pd(o + k), prod));
    }
    for (; k < nb; ++k) {
      const double prod = a[i] * b[k];
      o[k] += prod;
    }
  }
}

}  // namespace pvstab::kern::detail

#endif  // x86
