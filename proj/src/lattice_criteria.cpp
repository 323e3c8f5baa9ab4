#include "qac/lattice_criteria.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "qac/errors.hpp"
#include "qac/simd/kernels.hpp"
#include "qac/special.hpp"

namespace qac {

namespace {

void require_dimension(int d) {
  if (d < 3)
    throw DomainError("theta(d) needs d >= 3: 1/E(p) is not integrable at p = 0 for d = " +
                      std::to_string(d));
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Gauss-Legendre nodes/weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> x, w;
  explicit GaussLegendre(int n) : x(n), w(n) {
    for (int i = 0; i < n; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = z;
      w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

double bessel_integral(int d, const GaussLegendre& rule, double tail_start) {
  auto integrand = [d](double t) { return std::pow(bessel_i0_scaled(t), d); };
  double sum = 0.0;
  double lo = 0.0, hi = 0.5;
  while (lo < tail_start) {
    const double half = 0.5 * (hi - lo), centre = 0.5 * (hi + lo);
    double panel = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) panel += rule.w[i] * integrand(centre + half * rule.x[i]);
    sum += half * panel;
    lo = hi;
    hi *= 2.0;
  }
  // Tail from the large-t expansion e^{-t} I0(t) ~ (2 pi t)^{-1/2} (1 + 1/8t + 9/128t^2 + 225/3072t^3).
  constexpr std::array<double, 4> c{1.0, 1.0 / 8.0, 9.0 / 128.0, 225.0 / 3072.0};
  std::array<double, 4> power{1.0, 0.0, 0.0, 0.0};
  for (int k = 0; k < d; ++k) {
    std::array<double, 4> next{};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; i + j < 4; ++j) next[i + j] += power[i] * c[j];
    power = next;
  }
  double tail = 0.0;
  for (int j = 0; j < 4; ++j) {
    const double e = 0.5 * d + j - 1.0;
    tail += power[j] * std::pow(tail_start, -e) / e;
  }
  tail *= std::pow(2.0 * std::numbers::pi, -0.5 * d);
  return sum + tail;
}

}  // namespace

double theta_midpoint(int d, int nodes) {
  require_dimension(d);
  if (nodes < 2 || nodes % 2 != 0) throw ConfigError("theta grid needs an even node count");
  // By evenness only the positive half-axis is needed, and by permutation
  // symmetry only non-decreasing index tuples on the outer d-1 axes.
  const int half = nodes / 2;
  std::vector<double> c(half);
  for (int j = 0; j < half; ++j) c[j] = 1.0 - std::cos((j + 0.5) * 2.0 * std::numbers::pi / nodes);

  const auto& k = simd::kernels();
  const int outer = d - 1;
  const double outer_perms = factorial(outer);
  std::vector<int> idx(outer, 0);
  double total = 0.0;
  while (true) {
    double base = 0.0;
    double mult = outer_perms;
    int run = 1;
    for (int i = 0; i < outer; ++i) {
      base += c[idx[i]];
      if (i > 0 && idx[i] == idx[i - 1]) {
        ++run;
        mult /= run;
      } else {
        run = 1;
      }
    }
    total += mult * k.inverse_sum(base, c.data(), c.size());

    int pos = outer - 1;
    while (pos >= 0 && idx[pos] == half - 1) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int i = pos + 1; i < outer; ++i) idx[i] = idx[pos];
  }
  return d * total / std::pow(static_cast<double>(half), d);
}

LatticeDispersion theta_grid(int d, int coarse_nodes) {
  require_dimension(d);
  const double coarse = theta_midpoint(d, coarse_nodes);
  const double fine = theta_midpoint(d, 2 * coarse_nodes);
  // Midpoint error is O(h^{d-2}) from the origin singularity, O(h^2) otherwise.
  const double order = std::min(d - 2, 2);
  const double factor = std::pow(2.0, order);
  const double extrapolated = (factor * fine - coarse) / (factor - 1.0);
  return {d, extrapolated, std::abs(extrapolated - fine)};
}

LatticeDispersion theta_bessel(int d) {
  require_dimension(d);
  constexpr double tail_start = 4194304.0;  // 2^22
  const double fine = bessel_integral(d, GaussLegendre(24), tail_start);
  const double coarse = bessel_integral(d, GaussLegendre(16), tail_start);
  return {d, d * fine, d * std::abs(fine - coarse)};
}

LatticeDispersion theta_of_d(int d, const ThetaOptions& options) {
  require_dimension(d);
  ThetaMethod method = options.method;
  if (method == ThetaMethod::automatic) method = d <= 4 ? ThetaMethod::grid : ThetaMethod::bessel;
  if (method == ThetaMethod::bessel) return theta_bessel(d);

  // Rough count of inner evaluations of the symmetry-reduced fine grid.
  const double half = options.coarse_nodes;  // fine grid has 2 * coarse nodes, half of them used
  const double evaluations = std::pow(half, d) / factorial(d - 1);
  if (evaluations > options.max_evaluations)
    throw ConvergenceError("lattice_criteria", "theta grid for d = " + std::to_string(d) + " with " +
                                                   std::to_string(2 * options.coarse_nodes) +
                                                   " nodes exceeds the evaluation budget");
  return theta_grid(d, options.coarse_nodes);
}

double t_of_u(double u) {
  if (!(u >= 0.0 && u < 1.0)) throw DomainError("t(u) is defined for u in [0, 1), got " + std::to_string(u));
  const double s = std::sqrt(u);
  if (s < 0.5) return s * std::atanh(s);
  // (s/2)[log(1+s) - log(1-s)] with 1 - s = (1 - u)/(1 + s); 1 - u is exact
  // here, so the form keeps full accuracy as u -> 1.
  return 0.5 * s * (std::log1p(s) - std::log((1.0 - u) / (1.0 + s)));
}

double u_of_t(double t) {
  if (!(t >= 0.0)) throw DomainError("u(t) is defined for t >= 0, got " + std::to_string(t));
  if (t == 0.0) return 0.0;
  double lo = 0.0, hi = std::nextafter(1.0, 0.0);
  if (t_of_u(hi) <= t) return hi;
  // Bisection down to adjacent doubles, then a Newton step from the better end.
  for (;;) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (t_of_u(mid) < t ? lo : hi) = mid;
  }
  double u = std::abs(t_of_u(lo) - t) <= std::abs(t_of_u(hi) - t) ? lo : hi;
  if (u > 0.0) {
    const double s = std::sqrt(u);
    const double slope = (t_of_u(u) / s + s / (1.0 - u)) / (2.0 * s);  // dt/du
    const double next = u - (t_of_u(u) - t) / slope;
    if (next >= 0.0 && next < 1.0 && std::abs(t_of_u(next) - t) < std::abs(t_of_u(u) - t)) u = next;
  }
  return u;
}

namespace {

struct BetaStarTerms {
  double scale;  // 4 m v
  double lhs;    // 4 m v^2 Jhat
};

BetaStarTerms beta_star_terms(const OscillatorParams& params, const LatticeDispersion& dispersion) {
  params.validate();
  if (!params.double_well())
    throw PreconditionError("lattice_criteria",
                            "beta* needs a double-well potential (b1 > a/2, so v > 0)", params.b1,
                            0.5 * params.a);
  const double v = params.upsilon();
  const BetaStarTerms terms{4.0 * params.m * v, 4.0 * params.m * v * v * params.j_hat()};
  if (!(terms.lhs > dispersion.theta))
    throw PreconditionError("lattice_criteria",
                            "hypothesis 4 m v^2 Jhat > theta(d) violated: 4 m v^2 Jhat = " +
                                std::to_string(terms.lhs) + ", theta(" + std::to_string(dispersion.d) +
                                ") = " + std::to_string(dispersion.theta),
                            terms.lhs, dispersion.theta);
  return terms;
}

}  // namespace

double beta_star_residual(const OscillatorParams& params, const LatticeDispersion& dispersion,
                          double beta) {
  const double v = params.upsilon();
  const double lhs = 4.0 * params.m * v * v * params.j_hat();
  return std::abs(lhs * u_of_t(beta / (4.0 * params.m * v)) - dispersion.theta) / dispersion.theta;
}

double solve_beta_star(const OscillatorParams& params, const LatticeDispersion& dispersion) {
  const auto terms = beta_star_terms(params, dispersion);
  return terms.scale * t_of_u(dispersion.theta / terms.lhs);
}

double solve_beta_star_bisection(const OscillatorParams& params, const LatticeDispersion& dispersion) {
  const auto terms = beta_star_terms(params, dispersion);
  auto g = [&](double beta) { return terms.lhs * u_of_t(beta / terms.scale) - dispersion.theta; };
  double lo = 0.0, hi = terms.scale;
  while (g(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw ConvergenceError("lattice_criteria", "beta* bracket diverged");
  }
  for (int i = 0; i < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::stabilized_all_beta: return "stabilized_all_beta";
    case Verdict::transition_regime: return "transition_regime";
    case Verdict::undetermined: return "undetermined";
  }
  return "undetermined";
}

PhaseClassification classify_phase(const OscillatorParams& params, double rigidity,
                                   const LatticeDispersion& dispersion) {
  params.validate();
  PhaseClassification out;
  out.inputs = params;
  const double v = params.upsilon();
  auto& values = out.values;
  values.rigidity = rigidity;
  values.j_hat = params.j_hat();
  values.transition_lhs = 4.0 * params.m * v * v * values.j_hat;
  values.theta = dispersion.theta;

  const bool stabilized = values.j_hat < rigidity;
  const bool transition = params.d >= 3 && params.double_well() && values.transition_lhs > dispersion.theta;
  if (stabilized && transition)
    throw NumericalError("lattice_criteria",
                         "both uniqueness (Jhat < R_m) and transition (4 m v^2 Jhat > theta) hold; "
                         "R_m exceeds 1/(4 m v^2), spectrum is inaccurate");
  if (stabilized) {
    out.verdict = Verdict::stabilized_all_beta;
  } else if (transition) {
    out.verdict = Verdict::transition_regime;
    values.beta_star = solve_beta_star(params, dispersion);
  }
  return out;
}

PhaseClassification classify_phase(const OscillatorParams& params, const SpectrumOptions& spectrum_options,
                                   const ThetaOptions& theta_options) {
  params.validate();
  const auto solved = single_site_spectrum(params, spectrum_options);
  LatticeDispersion dispersion{params.d, 0.0, 0.0};
  if (params.d >= 3) dispersion = theta_of_d(params.d, theta_options);
  auto out = classify_phase(params, solved.spectrum.rigidity, dispersion);
  out.values.gap_index = solved.spectrum.gap_index;
  return out;
}

}  // namespace qac
