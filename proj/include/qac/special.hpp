#pragma once

namespace qac {

// Switch point between the power series and the large-argument expansion of I0.
inline constexpr double kBesselI0SeriesLimit = 15.0;

/// Modified Bessel function I0(x).
double bessel_i0(double x);

/// exp(-|x|) I0(x), finite for all x.
double bessel_i0_scaled(double x);

// The two branches, exposed for the continuity check at the switch point.
double bessel_i0_series(double x);
double bessel_i0_asymptotic_scaled(double x);

}  // namespace qac
