#include "kernels_impl.hpp"

namespace qac::simd::detail {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double quartic_sum_scalar(const double* x, std::size_t n, double b1, double b2) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x2 = x[i] * x[i];
    s += x2 * (b2 * x2 - b1);
  }
  return s;
}

double weighted_square_sum_scalar(const double* y, const double* w, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * (y[i] * y[i]);
  return s;
}

double inverse_sum_scalar(double base, const double* c, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += 1.0 / (base + c[i]);
  return s;
}

void sturm_count4_scalar(const double* diag, const double* off_sq, std::size_t n,
                         const double shifts[4], double pivmin, std::int64_t counts[4]) {
  for (int lane = 0; lane < 4; ++lane) {
    const double x = shifts[lane];
    std::int64_t count = 0;
    double q = diag[0] - x;
    if (q > -pivmin && q < pivmin) q = -pivmin;
    if (q < 0.0) ++count;
    for (std::size_t i = 1; i < n; ++i) {
      q = (diag[i] - x) - off_sq[i - 1] / q;
      if (q > -pivmin && q < pivmin) q = -pivmin;
      if (q < 0.0) ++count;
    }
    counts[lane] = count;
  }
}

}  // namespace qac::simd::detail
