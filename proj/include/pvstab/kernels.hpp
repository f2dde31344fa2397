#pragma once

#include <cstddef>

namespace pvstab::kern {

/// Implementation set for the dense numeric primitives underneath polynomial
/// arithmetic and the fixed-step integrator.
enum class Backend {
  Auto,    ///< widest instruction set the CPU supports (default)
  Scalar,  ///< portable reference implementation
  Avx2,    ///< x86-64 AVX2 (+FMA for axpy/dot/matvec)
  Neon,    ///< AArch64 Advanced SIMD
};

/// Selects the active kernel set. Throws InputError if the requested backend
/// is not available on this machine. Intended for startup/test configuration,
/// not for switching while kernels are in flight.
void set_backend(Backend b);

/// The backend actually in use (never Auto).
Backend active_backend();

/// Human-readable name of the active backend.
const char* backend_name();

/// y[i] += a * x[i] for i in [0, n).
void axpy(std::size_t n, double a, const double* x, double* y);

/// Returns sum_i x[i] * y[i].
double dot(std::size_t n, const double* x, const double* y);

/// out = m * v for a row-major (rows x cols) matrix. out has rows entries.
void matvec(const double* m, std::size_t rows, std::size_t cols,
            const double* v, double* out);

/// Full linear convolution: out[k] = sum_i a[i] * b[k-i] for
/// k in [0, na+nb-2]; out must hold na+nb-1 doubles and is overwritten.
/// All backends produce bit-identical results: the accumulation order is
/// fixed (outer i, inner k) and products are never fused into the adds.
void convolve(const double* a, std::size_t na, const double* b,
              std::size_t nb, double* out);

namespace detail {

// Reference kernels; exposed so vector variants can be checked against them.
void axpy_scalar(std::size_t n, double a, const double* x, double* y);
double dot_scalar(std::size_t n, const double* x, const double* y);
void matvec_scalar(const double* m, std::size_t rows, std::size_t cols,
                   const double* v, double* out);
void convolve_scalar(const double* a, std::size_t na, const double* b,
                     std::size_t nb, double* out);

#if defined(__x86_64__) || defined(__i386__)
bool cpu_has_avx2();
void axpy_avx2(std::size_t n, double a, const double* x, double* y);
double dot_avx2(std::size_t n, const double* x, const double* y);
void matvec_avx2(const double* m, std::size_t rows, std::size_t cols,
                 const double* v, double* out);
void convolve_avx2(const double* a, std::size_t na, const double* b,
                   std::size_t nb, double* out);
#endif

#if defined(__aarch64__)
void axpy_neon(std::size_t n, double a, const double* x, double* y);
double dot_neon(std::size_t n, const double* x, const double* y);
void matvec_neon(const double* m, std::size_t rows, std::size_t cols,
                 const double* v, double* out);
void convolve_neon(const double* a, std::size_t na, const double* b,
                   std::size_t nb, double* out);
#endif

}  // namespace detail

}  // namespace pvstab::kern
