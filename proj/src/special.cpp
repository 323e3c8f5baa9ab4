#include "qac/special.hpp"

#include <cmath>
#include <numbers>

namespace qac {

double bessel_i0_series(double x) {
  // sum_k (x^2/4)^k / (k!)^2; all terms positive, so no cancellation.
  const double y = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 500; ++k) {
    term *= y / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

double bessel_i0_asymptotic_scaled(double x) {
  // e^{-x} I0(x) ~ (2 pi x)^{-1/2} sum_k [(2k-1)!!]^2 / (k! (8x)^k),
  // truncated just before the smallest term.
  double term = 1.0;
  double sum = 1.0;
  for (int k = 0; k < 200; ++k) {
    const double next = term * (2.0 * k + 1.0) * (2.0 * k + 1.0) / (8.0 * (k + 1.0) * x);
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

double bessel_i0(double x) {
  const double ax = std::abs(x);
  if (ax <= kBesselI0SeriesLimit) return bessel_i0_series(ax);
  return std::exp(ax) * bessel_i0_asymptotic_scaled(ax);
}

double bessel_i0_scaled(double x) {
  const double ax = std::abs(x);
  if (ax <= kBesselI0SeriesLimit) return std::exp(-ax) * bessel_i0_series(ax);
  return bessel_i0_asymptotic_scaled(ax);
}

}  // namespace qac
