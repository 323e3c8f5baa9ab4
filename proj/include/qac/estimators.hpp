#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qac/gibbs.hpp"

namespace qac {

/// Real function of one displacement, used inside Matsubara products.
struct TestFunction {
  std::string name;
  std::function<double(double)> f;
  bool bounded = true;

  double operator()(double x) const { return f(x); }

  static TestFunction unit();
  static TestFunction identity();
  /// max(-L, min(L, x)).
  static TestFunction clip(double limit);
};

/// Default clipping level 5 sqrt(v) (1 in harmonic mode).
double default_clip_level(const OscillatorParams& params);

/// Default clamping level sqrt(v) for plus/minus boundaries.
double default_clamp_level(const OscillatorParams& params);

/// F evaluated on the loop of `site` at imaginary time `tau`.
struct MatsubaraFactor {
  TestFunction function;
  std::size_t site = 0;
  double tau = 0.0;
};

/// Slice index of tau on the grid k beta / P (tau = beta wraps to 0).
/// Throws DomainError for off-grid times.
int slice_of(double tau, double beta, int slices);

/// Observer of prod_i F_i(w_{l_i}(tau_i)).
Observer matsubara_observer(const LoopConfiguration& layout, std::vector<MatsubaraFactor> factors,
                            std::string name = "Gamma");

/// Observer of the slice average of w_l. Flagged unbounded.
Observer order_parameter_observer(const LoopConfiguration& layout, std::size_t site);

EstimateReport matsubara_estimate(const ChainSetup& setup, std::vector<MatsubaraFactor> factors);

EstimateReport order_parameter(const ChainSetup& setup, std::size_t site);

/// Checks that F is odd and strictly positive for positive argument on a
/// sample grid; throws PreconditionError otherwise.
void require_odd_positive(const TestFunction& f, double scale);

struct GksAudit {
  EstimateReport plus;   // estimate with the setup's (plus) boundary
  EstimateReport minus;  // mirrored run
  bool plus_nonnegative = false;  // plus >= -2 SE
  bool minus_nonpositive = false; // minus <= +2 SE
  bool exact_mirror = false;      // minus == -plus bit for bit
  bool pass() const { return plus_nonnegative && minus_nonpositive; }
};

/// Three-point Matsubara function under plus clamping and its exact mirror.
GksAudit gks_audit(const ChainSetup& plus_setup, const std::array<MatsubaraFactor, 3>& factors);

}  // namespace qac
