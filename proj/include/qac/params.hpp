#pragma once

namespace qac {

/// Physical constants of the anharmonic crystal.
///
/// Single-site Hamiltonian: p^2/2m + (a/2) q^2 + V(q) with
/// V(q) = -b1 q^2 + b2 q^4. Nearest neighbours interact through
/// J q_l q_l'. When `harmonic` is set, V is switched off entirely and
/// b1, b2 are ignored; this is the exactly solvable reference case.
struct OscillatorParams {
  double m = 1.0;
  double a = 1.0;
  double b1 = 1.0;
  double b2 = 1.0;
  double J = 1.0;
  int d = 3;
  double beta = 1.0;
  bool harmonic = false;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  /// (2 b1 - a) / (12 b2); zero in harmonic mode.
  double upsilon() const;
  /// 2 d J, coupling of one site to all of its neighbours.
  double j_hat() const { return 2.0 * d * J; }
  bool double_well() const { return !harmonic && b1 > 0.5 * a; }
  /// sqrt(a/m), level spacing of the harmonic part.
  double harmonic_gap() const;

  double potential(double q) const {
    if (harmonic) return 0.0;
    const double q2 = q * q;
    return q2 * (b2 * q2 - b1);
  }

  bool operator==(const OscillatorParams&) const = default;
};

}  // namespace qac
