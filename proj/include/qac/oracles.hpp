#pragma once

// Reference computations that share no code path with the sampler. They
// are used by the acceptance suite and the unit tests.

#include <array>
#include <vector>

#include "qac/params.hpp"

namespace qac::oracle {

/// Gauss-Hermite nodes/weights for weight exp(-x^2/2)/sqrt(2 pi), i.e. an
/// expectation over a standard normal.
struct HermiteRule {
  std::vector<double> x, w;
  explicit HermiteRule(int n);
};

/// <w(0)^k>, k = 1..4, under the discretized single-site path density
/// exp(-(beta/P) sum_k V(w_k)) times the P-dimensional Gaussian with
/// covariance S_beta(tau_j, tau_k), by tensor Gauss-Hermite quadrature in
/// whitened coordinates. Cost nodes^P.
std::array<double, 4> single_site_moments(const OscillatorParams& params, int slices, int nodes);

}  // namespace qac::oracle
