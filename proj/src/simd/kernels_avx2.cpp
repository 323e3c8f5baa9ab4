// Built with -mavx2. Nothing in here may run before the dispatcher has
// confirmed AVX2 support on the host CPU.

#if defined(QAC_HAVE_AVX2_TU)

#include <immintrin.h>

#include "kernels_impl.hpp"

namespace qac::simd::detail {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double quartic_sum_avx2(const double* x, std::size_t n, double b1, double b2) {
  const __m256d vb1 = _mm256_set1_pd(b1);
  const __m256d vb2 = _mm256_set1_pd(b2);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    const __m256d v2 = _mm256_mul_pd(v, v);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(v2, _mm256_sub_pd(_mm256_mul_pd(vb2, v2), vb1)));
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double x2 = x[i] * x[i];
    s += x2 * (b2 * x2 - b1);
  }
  return s;
}

double weighted_square_sum_avx2(const double* y, const double* w, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(y + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_mul_pd(v, v)));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += w[i] * (y[i] * y[i]);
  return s;
}

double inverse_sum_avx2(double base, const double* c, std::size_t n) {
  const __m256d vbase = _mm256_set1_pd(base);
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_div_pd(one, _mm256_add_pd(vbase, _mm256_loadu_pd(c + i))));
  double s = hsum(acc);
  for (; i < n; ++i) s += 1.0 / (base + c[i]);
  return s;
}

void sturm_count4_avx2(const double* diag, const double* off_sq, std::size_t n,
                       const double shifts[4], double pivmin, std::int64_t counts[4]) {
  const __m256d x = _mm256_loadu_pd(shifts);
  const __m256d pos = _mm256_set1_pd(pivmin);
  const __m256d neg = _mm256_set1_pd(-pivmin);
  const __m256d zero = _mm256_setzero_pd();
  __m256i count = _mm256_setzero_si256();

  auto guard_and_count = [&](__m256d q) {
    const __m256d tiny = _mm256_and_pd(_mm256_cmp_pd(q, neg, _CMP_GT_OQ),
                                       _mm256_cmp_pd(q, pos, _CMP_LT_OQ));
    q = _mm256_blendv_pd(q, neg, tiny);
    // all-ones lanes are -1 as integers
    count = _mm256_sub_epi64(count, _mm256_castpd_si256(_mm256_cmp_pd(q, zero, _CMP_LT_OQ)));
    return q;
  };

  __m256d q = guard_and_count(_mm256_sub_pd(_mm256_set1_pd(diag[0]), x));
  for (std::size_t i = 1; i < n; ++i) {
    const __m256d t = _mm256_sub_pd(_mm256_set1_pd(diag[i]), x);
    q = guard_and_count(_mm256_sub_pd(t, _mm256_div_pd(_mm256_set1_pd(off_sq[i - 1]), q)));
  }
  _mm256_storeu_si256(reinterpret_cast<__m256i*>(counts), count);
}

}  // namespace qac::simd::detail

#endif
