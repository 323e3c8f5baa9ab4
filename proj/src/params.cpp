#include "qac/params.hpp"

#include <cmath>
#include <string>

#include "qac/errors.hpp"

namespace qac {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ConfigError(std::string("model.") + name + " must be a finite positive number, got " +
                      std::to_string(v));
}

}  // namespace

void OscillatorParams::validate() const {
  require_positive(m, "m");
  require_positive(a, "a");
  // J = 0 (decoupled sites) is admitted; the sampler's harmonic oracle runs there.
  if (!(J >= 0.0) || !std::isfinite(J))
    throw ConfigError("model.J must be a finite non-negative number, got " + std::to_string(J));
  require_positive(beta, "beta");
  if (!harmonic) {
    // V(q) = -b1 q^2 + b2 q^4 requires b1, b2 > 0.
    if (!(b1 > 0.0) || !std::isfinite(b1))
      throw ConfigError("model.b1 must be > 0 (quartic potential V = -b1 q^2 + b2 q^4 needs b1, b2 > 0)");
    if (!(b2 > 0.0) || !std::isfinite(b2))
      throw ConfigError("model.b2 must be > 0 (quartic potential V = -b1 q^2 + b2 q^4 needs b1, b2 > 0)");
  }
  if (d < 1) throw ConfigError("model.d must be >= 1, got " + std::to_string(d));
}

double OscillatorParams::upsilon() const {
  if (harmonic) return 0.0;
  return (2.0 * b1 - a) / (12.0 * b2);
}

double OscillatorParams::harmonic_gap() const { return std::sqrt(a / m); }

}  // namespace qac
