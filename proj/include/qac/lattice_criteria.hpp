#pragma once

#include <optional>
#include <string_view>

#include "qac/params.hpp"
#include "qac/spectral.hpp"

namespace qac {

/// theta(d) = d (2 pi)^{-d} int_{(-pi,pi]^d} dp / sum_j (1 - cos p_j).
struct LatticeDispersion {
  int d = 3;
  double theta = 0.0;
  double quadrature_error = 0.0;
};

enum class ThetaMethod { automatic, grid, bessel };

struct ThetaOptions {
  ThetaMethod method = ThetaMethod::automatic;
  // Midpoint nodes per axis for the two grid levels; the fine level is twice
  // the coarse one.
  int coarse_nodes = 64;
  // Largest number of (symmetry-reduced) grid evaluations allowed.
  double max_evaluations = 2e9;

  bool operator==(const ThetaOptions&) const = default;
};

/// Grid route for d <= 4, Bessel route otherwise (unless forced).
LatticeDispersion theta_of_d(int d, const ThetaOptions& options = {});

/// Tensor midpoint rule with `nodes` per axis (even), never touching p = 0.
double theta_midpoint(int d, int nodes);

/// Midpoint values at `nodes` and `2 nodes`, Richardson-extrapolated with
/// the leading error order min(d - 2, 2).
LatticeDispersion theta_grid(int d, int coarse_nodes);

/// d int_0^inf (e^{-t} I0(t))^d dt.
LatticeDispersion theta_bessel(int d);

/// t(u) = (sqrt(u)/2) [log(1 + sqrt(u)) - log(1 - sqrt(u))], u in [0, 1).
double t_of_u(double u);

/// Inverse of t_of_u on [0, infinity).
double u_of_t(double t);

/// Root of 4 m v^2 Jhat u(beta / (4 m v)) = theta(d).
/// Throws PreconditionError unless 4 m v^2 Jhat > theta(d).
double solve_beta_star(const OscillatorParams& params, const LatticeDispersion& dispersion);

/// Independent bisection solve of the same equation, used as a self-check.
double solve_beta_star_bisection(const OscillatorParams& params, const LatticeDispersion& dispersion);

/// Relative residual of the beta* equation at `beta`.
double beta_star_residual(const OscillatorParams& params, const LatticeDispersion& dispersion,
                          double beta);

enum class Verdict { stabilized_all_beta, transition_regime, undetermined };

std::string_view to_string(Verdict v);

struct CriteriaValues {
  double rigidity = 0.0;       // R_m
  double j_hat = 0.0;          // 2 d J
  double transition_lhs = 0.0; // 4 m v^2 Jhat
  double theta = 0.0;
  std::optional<double> beta_star;
  std::size_t gap_index = 0;
};

struct PhaseClassification {
  Verdict verdict = Verdict::undetermined;
  OscillatorParams inputs;
  CriteriaValues values;
};

/// Requires a double-well (b1 > a/2) and d >= 3.
PhaseClassification classify_phase(const OscillatorParams& params,
                                   const SpectrumOptions& spectrum_options = {},
                                   const ThetaOptions& theta_options = {});

/// Classification from already computed R_m and theta(d).
PhaseClassification classify_phase(const OscillatorParams& params, double rigidity,
                                   const LatticeDispersion& dispersion);

}  // namespace qac
