#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "qac/params.hpp"

namespace qac {

/// Uniform grid of `points` interior nodes on [-half_width, half_width] with
/// Dirichlet conditions at both ends.
struct GridSpec {
  double half_width = 10.0;
  int points = 4000;

  double spacing() const { return 2.0 * half_width / (points + 1); }
  double node(int i) const { return -half_width + (i + 1) * spacing(); }
  void validate() const;
};

/// Symmetric tridiagonal matrix. `off[i]` couples rows i and i+1.
struct TridiagonalMatrix {
  std::vector<double> diag;
  std::vector<double> off;
  double mass = 1.0;
  GridSpec grid;

  std::size_t size() const { return diag.size(); }
};

struct Spectrum {
  std::vector<double> eigenvalues;  // strictly increasing
  double gap = 0.0;                 // min consecutive difference
  std::size_t gap_index = 0;        // gap = E[gap_index + 1] - E[gap_index]
  double rigidity = 0.0;            // mass * gap^2
};

/// Central-difference discretization of p^2/2m + (a/2)q^2 + V(q) on `grid`.
TridiagonalMatrix discretize_hamiltonian(const OscillatorParams& params, const GridSpec& grid);

/// The `count` lowest eigenvalues in increasing order, by Sturm-sequence
/// bisection.
std::vector<double> lowest_eigenvalues(const TridiagonalMatrix& matrix, int count);

/// Normalized eigenvector for an (accurate) eigenvalue, by inverse iteration.
std::vector<double> eigenvector(const TridiagonalMatrix& matrix, double eigenvalue);

/// Fraction of sum(v^2) carried by nodes with |q| > (1 - outer_fraction) L.
double tail_mass(const TridiagonalMatrix& matrix, std::span<const double> vec,
                 double outer_fraction = 0.05);

/// K >= 2 lowest levels with gap and rigidity. Throws DegeneracyError when two
/// levels are closer than 1e-10 max(1, |E_K|).
Spectrum compute_spectrum(const TridiagonalMatrix& matrix, int levels);

struct SpectrumOptions {
  int levels = 8;
  int points = 4000;
  std::optional<double> half_width;  // automatic when empty
  double tail_floor = 1e-8;
  int max_doublings = 3;

  bool operator==(const SpectrumOptions&) const = default;
};

struct SolvedSpectrum {
  Spectrum spectrum;
  GridSpec grid;
  double tail_mass = 0.0;  // of the highest requested level
  int doublings = 0;
};

/// max(10 (m a)^{-1/4}, 3 (E_est / b2)^{1/4}) with a crude upper estimate
/// E_est of the highest requested level.
double automatic_half_width(const OscillatorParams& params, int levels);

/// Discretize, diagonalize and check that the highest requested eigenvector
/// has negligible weight near the cutoff. When it does not, the box is
/// doubled (at fixed spacing) and the solve repeated.
SolvedSpectrum single_site_spectrum(const OscillatorParams& params,
                                    const SpectrumOptions& options = {});

struct RigidityPoint {
  double m = 0.0;
  double gap = 0.0;
  double rigidity = 0.0;
};

struct RigidityScan {
  std::vector<RigidityPoint> points;
  // Least-squares slope of log R_m against log m over the smallest decade of
  // masses; empty unless the masses span a decade.
  std::optional<double> small_mass_slope;
};

/// `masses` must be strictly decreasing and positive. Points are evaluated
/// concurrently on up to `threads` threads; output order follows input.
RigidityScan rigidity_mass_scan(const OscillatorParams& base, std::span<const double> masses,
                                const SpectrumOptions& options = {}, int threads = 1);

}  // namespace qac
