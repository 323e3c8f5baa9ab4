#include "qac/oracles.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qac/loops.hpp"

namespace qac::oracle {

HermiteRule::HermiteRule(int n) : x(n), w(n) {
  // Physicists' Hermite roots by Newton iteration from the standard
  // asymptotic starting guesses, then rescaled to the probabilists' weight.
  const double pim4 = std::pow(std::numbers::pi, -0.25);
  std::vector<double> xp(n), wp(n);
  const int m = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    else if (i == 1) z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    else if (i == 2) z = 1.86 * z - 0.86 * xp[0];
    else if (i == 3) z = 1.91 * z - 0.91 * xp[1];
    else z = 2.0 * z - xp[i - 2];
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    xp[i] = z;
    xp[n - 1 - i] = -z;
    wp[i] = wp[n - 1 - i] = 2.0 / (pp * pp);
  }
  for (int i = 0; i < n; ++i) {
    x[i] = std::sqrt(2.0) * xp[i];
    w[i] = wp[i] / std::sqrt(std::numbers::pi);
  }
}

std::array<double, 4> single_site_moments(const OscillatorParams& params, int slices, int nodes) {
  const int p = slices;
  if (p < 1 || p > 4) throw std::invalid_argument("tensor oracle supports 1..4 slices");
  // Dense covariance and its Cholesky factor.
  std::vector<double> c(p * p), l(p * p, 0.0);
  for (int j = 0; j < p; ++j)
    for (int k = 0; k < p; ++k)
      c[j * p + k] = propagator(params.beta, params.m, params.a, params.beta * j / p, params.beta * k / p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = c[i * p + j];
      for (int k = 0; k < j; ++k) s -= l[i * p + k] * l[j * p + k];
      l[i * p + j] = i == j ? std::sqrt(s) : s / l[j * p + j];
    }
  }

  const HermiteRule rule(nodes);
  const double dtau = params.beta / p;
  auto v = [&](double q) { return params.harmonic ? 0.0 : -params.b1 * q * q + params.b2 * q * q * q * q; };

  std::vector<int> idx(p, 0);
  std::vector<double> z(p), w(p);
  double norm = 0.0;
  std::array<double, 4> sums{};
  while (true) {
    double weight = 1.0;
    for (int j = 0; j < p; ++j) {
      z[j] = rule.x[idx[j]];
      weight *= rule.w[idx[j]];
    }
    double action = 0.0;
    for (int i = 0; i < p; ++i) {
      w[i] = 0.0;
      for (int k = 0; k <= i; ++k) w[i] += l[i * p + k] * z[k];
      action += v(w[i]);
    }
    const double g = weight * std::exp(-dtau * action);
    norm += g;
    double power = 1.0;
    for (int k = 0; k < 4; ++k) {
      power *= w[0];
      sums[k] += g * power;
    }
    int pos = p - 1;
    while (pos >= 0 && ++idx[pos] == nodes) idx[pos--] = 0;
    if (pos < 0) break;
  }
  for (double& s : sums) s /= norm;
  return sums;
}

}  // namespace qac::oracle
