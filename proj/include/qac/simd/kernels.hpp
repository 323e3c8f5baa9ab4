#pragma once

// Data-parallel inner loops used by the numerical modules.
//
// Every kernel has a portable scalar reference and, on x86-64, an AVX2
// variant. `kernels()` returns the table picked at first use; the choice can
// be pinned with QAC_SIMD=scalar|avx2 in the environment. Reductions in the
// vector variants sum in a different order, so they agree with the scalar
// reference to rounding, not bit for bit. `sturm_count4` does the same
// per-lane arithmetic in both variants and agrees exactly.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace qac::simd {

struct Kernels {
  std::string_view name;

  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);

  // sum_i (-b1 x[i]^2 + b2 x[i]^4)
  double (*quartic_sum)(const double* x, std::size_t n, double b1, double b2);

  // sum_i w[i] * y[i]^2
  double (*weighted_square_sum)(const double* y, const double* w, std::size_t n);

  // sum_i 1 / (base + c[i])
  double (*inverse_sum)(double base, const double* c, std::size_t n);

  // For each of four shifts x, the number of eigenvalues of the symmetric
  // tridiagonal matrix (diag, off) strictly less than x. `off_sq` holds the
  // n-1 squared off-diagonal entries; `pivmin` guards zero pivots.
  void (*sturm_count4)(const double* diag, const double* off_sq, std::size_t n,
                       const double shifts[4], double pivmin, std::int64_t counts[4]);
};

const Kernels& scalar_kernels();

// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2.
const Kernels* avx2_kernels();

// Active table (see file comment).
const Kernels& kernels();

inline double dot(std::span<const double> x, std::span<const double> y) {
  return kernels().dot(x.data(), y.data(), x.size());
}

}  // namespace qac::simd
