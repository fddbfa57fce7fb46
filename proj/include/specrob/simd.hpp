#pragma once

#include <cstddef>
#include <string_view>

namespace specrob::simd {

// Inner-loop kernels over contiguous double arrays. Every entry has a scalar
// reference implementation; wider variants are selected at runtime and must
// agree with the reference up to FMA rounding.
struct Kernels {
  std::string_view name;

  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*sum_squares)(const double* x, std::size_t n);
  // C[M x N] += A[M x K] * B[K x N], all row-major with explicit leading dims.
  void (*gemm)(std::size_t m, std::size_t n, std::size_t k, const double* a,
               std::size_t lda, const double* b, std::size_t ldb, double* c,
               std::size_t ldc);
  // y[i] = max(x[i], 0)
  void (*relu)(const double* x, double* y, std::size_t n);
  // y[i] = clamp(y[i], lo, hi)
  void (*clamp)(double* y, double lo, double hi, std::size_t n);
};

const Kernels& scalar_kernels();

// nullptr when the variant was not compiled in or the CPU lacks support.
const Kernels* avx2_kernels();

// The table used by the library. Picks the widest supported variant once;
// SPECROB_SIMD=scalar forces the reference kernels.
const Kernels& kernels();

}  // namespace specrob::simd
