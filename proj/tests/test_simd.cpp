// Scalar/AVX2 equivalence, and the special functions behind the lattice sums.
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "qac/simd/kernels.hpp"
#include "qac/special.hpp"

using namespace qac;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = -2.0, double hi = 2.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

// Reference sums in long double, written independently of the kernels.
long double ref_dot(const std::vector<double>& x, const std::vector<double>& y) {
  long double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (long double)x[i] * y[i];
  return s;
}

}  // namespace

TEST_CASE("scalar kernels match long-double references") {
  const auto& k = simd::scalar_kernels();
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 64u, 1001u}) {
    const auto x = random_vector(n, 1 + n), y = random_vector(n, 100 + n), w = random_vector(n, 7 + n, 0.1, 3.0);
    long double quartic = 0, wsq = 0, inv = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const long double q = x[i];
      quartic += -1.5L * q * q + 0.5L * q * q * q * q;
      wsq += (long double)w[i] * y[i] * y[i];
      inv += 1.0L / (2.5L + w[i]);
    }
    CHECK(k.dot(x.data(), y.data(), n) == doctest::Approx((double)ref_dot(x, y)).epsilon(1e-13));
    CHECK(k.quartic_sum(x.data(), n, 1.5, 0.5) == doctest::Approx((double)quartic).epsilon(1e-13));
    CHECK(k.weighted_square_sum(y.data(), w.data(), n) == doctest::Approx((double)wsq).epsilon(1e-13));
    CHECK(k.inverse_sum(2.5, w.data(), n) == doctest::Approx((double)inv).epsilon(1e-13));
  }
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
  const simd::Kernels* v = simd::avx2_kernels();
  if (!v) {
    MESSAGE("AVX2 unavailable; equivalence test skipped");
    return;
  }
  const auto& s = simd::scalar_kernels();
  for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 8u, 13u, 64u, 999u, 4096u}) {
    const auto x = random_vector(n, 11 + n), y = random_vector(n, 12 + n), w = random_vector(n, 13 + n, 0.0, 2.0);
    const double scale = 1e-14 * std::max<double>(1.0, n);
    CHECK(v->dot(x.data(), y.data(), n) == doctest::Approx(s.dot(x.data(), y.data(), n)).epsilon(scale));
    CHECK(v->quartic_sum(x.data(), n, 1.0, 2.0) ==
          doctest::Approx(s.quartic_sum(x.data(), n, 1.0, 2.0)).epsilon(scale));
    CHECK(v->weighted_square_sum(y.data(), w.data(), n) ==
          doctest::Approx(s.weighted_square_sum(y.data(), w.data(), n)).epsilon(scale));
    CHECK(v->inverse_sum(0.75, w.data(), n) == doctest::Approx(s.inverse_sum(0.75, w.data(), n)).epsilon(scale));
  }
}

TEST_CASE("Sturm counts: exact agreement between variants and with a direct count") {
  // Matrix with known spectrum: diag 2, off -1 has eigenvalues 2 - 2 cos(k pi / (n + 1)).
  const std::size_t n = 50;
  std::vector<double> diag(n, 2.0), off_sq(n - 1, 1.0);
  const double shifts[4] = {0.1, 1.05, 2.01, 3.9};
  std::int64_t expected[4] = {0, 0, 0, 0};
  for (int j = 0; j < 4; ++j)
    for (std::size_t k = 1; k <= n; ++k)
      if (2.0 - 2.0 * std::cos(k * M_PI / (n + 1)) < shifts[j]) ++expected[j];
  std::int64_t counts[4];
  simd::scalar_kernels().sturm_count4(diag.data(), off_sq.data(), n, shifts, 1e-300, counts);
  for (int j = 0; j < 4; ++j) CHECK(counts[j] == expected[j]);

  if (const auto* v = simd::avx2_kernels()) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    auto d = random_vector(777, 21, -5, 5), o = random_vector(776, 22, 0, 4);
    for (int trial = 0; trial < 200; ++trial) {
      const double sh[4] = {u(rng), u(rng), u(rng), u(rng)};
      std::int64_t a[4], b[4];
      simd::scalar_kernels().sturm_count4(d.data(), o.data(), d.size(), sh, 1e-300, a);
      v->sturm_count4(d.data(), o.data(), d.size(), sh, 1e-300, b);
      for (int j = 0; j < 4; ++j) REQUIRE(a[j] == b[j]);
    }
  }
}

TEST_CASE("I0 matches the standard library and is continuous at the branch switch") {
  for (double x : {0.0, 0.1, 1.0, 3.5, 8.0, 14.9, 15.0, 15.1, 30.0, 100.0, 600.0})
    CHECK(bessel_i0(x) == doctest::Approx(std::cyl_bessel_i(0.0, x)).epsilon(1e-13));
  CHECK(bessel_i0(-2.0) == bessel_i0(2.0));
  const double t = kBesselI0SeriesLimit;
  const double series = std::exp(-t) * bessel_i0_series(t);
  const double asymptotic = bessel_i0_asymptotic_scaled(t);
  CHECK(std::abs(series - asymptotic) < 1e-12);
  CHECK(bessel_i0_scaled(1e6) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI * 1e6)).epsilon(1e-6));
}
