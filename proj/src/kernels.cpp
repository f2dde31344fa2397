#include "pvstab/kernels.hpp"

#include <algorithm>
#include <atomic>

#include "pvstab/errors.hpp"

namespace pvstab::kern {

namespace detail {

void axpy_scalar(std::size_t n, double a, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot_scalar(std::size_t n, const double* x, const double* y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void matvec_scalar(const double* m, std::size_t rows, std::size_t cols,
                   const double* v, double* out) {
  for (std::size_t r = 0; r < rows; ++r)
    out[r] = dot_scalar(cols, m + r * cols, v);
}

void convolve_scalar(const double* a, std::size_t na, const double* b,
                     std::size_t nb, double* out) {
  std::fill(out, out + na + nb - 1, 0.0);
  for (std::size_t i = 0; i < na; ++i) {
    const double ai = a[i];
    double* o = out + i;
    for (std::size_t k = 0; k < nb; ++k) {
      const double prod = ai * b[k];  // no FMA: keeps all backends bit-equal
      o[k] += prod;
    }
  }
}

}  // namespace detail

namespace {

struct Ops {
  void (*axpy)(std::size_t, double, const double*, double*);
  double (*dot)(std::size_t, const double*, const double*);
  void (*matvec)(const double*, std::size_t, std::size_t, const double*,
                 double*);
  void (*convolve)(const double*, std::size_t, const double*, std::size_t,
                   double*);
  Backend id;
  const char* name;
};

constexpr Ops kScalarOps = {detail::axpy_scalar, detail::dot_scalar,
                            detail::matvec_scalar, detail::convolve_scalar,
                            Backend::Scalar, "scalar"};

#if defined(__x86_64__) || defined(__i386__)
constexpr Ops kAvx2Ops = {detail::axpy_avx2, detail::dot_avx2,
                          detail::matvec_avx2, detail::convolve_avx2,
                          Backend::Avx2, "avx2"};
#endif

#if defined(__aarch64__)
constexpr Ops kNeonOps = {detail::axpy_neon, detail::dot_neon,
                          detail::matvec_neon, detail::convolve_neon,
                          Backend::Neon, "neon"};
#endif

const Ops* resolve(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return &kScalarOps;
    case Backend::Avx2:
#if defined(__x86_64__) || defined(__i386__)
      if (detail::cpu_has_avx2()) return &kAvx2Ops;
      throw InputError("kernel backend avx2 not supported by this CPU");
#else
      throw InputError("kernel backend avx2 not available on this platform");
#endif
    case Backend::Neon:
#if defined(__aarch64__)
      return &kNeonOps;
#else
      throw InputError("kernel backend neon not available on this platform");
#endif
    case Backend::Auto:
    default:
#if defined(__x86_64__) || defined(__i386__)
      if (detail::cpu_has_avx2()) return &kAvx2Ops;
#elif defined(__aarch64__)
      return &kNeonOps;
#endif
      return &kScalarOps;
  }
}

std::atomic<const Ops*> g_ops{nullptr};

const Ops* ops() {
  const Ops* o = g_ops.load(std::memory_order_acquire);
  if (!o) {
    o = resolve(Backend::Auto);
    g_ops.store(o, std::memory_order_release);
  }
  return o;
}

}  // namespace

void set_backend(Backend b) {
  g_ops.store(resolve(b), std::memory_order_release);
}

Backend active_backend() { return ops()->id; }

const char* backend_name() { return ops()->name; }

void axpy(std::size_t n, double a, const double* x, double* y) {
  ops()->axpy(n, a, x, y);
}

double dot(std::size_t n, const double* x, const double* y) {
  return ops()->dot(n, x, y);
}

void matvec(const double* m, std::size_t rows, std::size_t cols,
            const double* v, double* out) {
  ops()->matvec(m, rows, cols, v, out);
}

void convolve(const double* a, std::size_t na, const double* b,
              std::size_t nb, double* out) {
  ops()->convolve(a, na, b, nb, out);
}

}  // namespace pvstab::kern
