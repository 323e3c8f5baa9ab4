#pragma once

#include <cstddef>
#include <cstdint>

namespace qac::simd::detail {

double dot_scalar(const double* x, const double* y, std::size_t n);
double quartic_sum_scalar(const double* x, std::size_t n, double b1, double b2);
double weighted_square_sum_scalar(const double* y, const double* w, std::size_t n);
double inverse_sum_scalar(double base, const double* c, std::size_t n);
void sturm_count4_scalar(const double* diag, const double* off_sq, std::size_t n,
                         const double shifts[4], double pivmin, std::int64_t counts[4]);

#if defined(QAC_HAVE_AVX2_TU)
double dot_avx2(const double* x, const double* y, std::size_t n);
double quartic_sum_avx2(const double* x, std::size_t n, double b1, double b2);
double weighted_square_sum_avx2(const double* y, const double* w, std::size_t n);
double inverse_sum_avx2(double base, const double* c, std::size_t n);
void sturm_count4_avx2(const double* diag, const double* off_sq, std::size_t n,
                       const double shifts[4], double pivmin, std::int64_t counts[4]);
#endif

}  // namespace qac::simd::detail
