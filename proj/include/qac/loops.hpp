#pragma once

#include <concepts>
#include <cstddef>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "qac/params.hpp"

namespace qac {

/// Axis-aligned box of lattice sites in Z^d, indexed row-major (last axis
/// fastest).
class Box {
 public:
  Box() = default;
  explicit Box(std::vector<int> extents);

  int rank() const { return static_cast<int>(extents_.size()); }
  const std::vector<int>& extents() const { return extents_; }
  std::size_t sites() const { return sites_; }

  std::vector<int> coords(std::size_t site) const;
  std::size_t index(std::span<const int> coords) const;

  /// Nearest neighbours inside the box.
  std::vector<std::size_t> neighbours(std::size_t site) const;
  /// Number of the 2 d nearest neighbours that fall outside the box.
  int exterior_neighbours(std::size_t site) const;

  bool operator==(const Box&) const = default;

 private:
  std::vector<int> extents_;
  std::size_t sites_ = 0;
};

enum class BoundaryKind { free, plus_clamped, minus_clamped };

std::string_view to_string(BoundaryKind kind);
BoundaryKind parse_boundary_kind(std::string_view text);

/// Clamped kinds fix every exterior neighbour of the box to the constant
/// loop +level (plus) or -level (minus).
struct BoundaryCondition {
  BoundaryKind kind = BoundaryKind::free;
  double level = 0.0;

  double value() const;
  void validate() const;
  BoundaryCondition mirrored() const;

  bool operator==(const BoundaryCondition&) const = default;
};

/// Periodic path sampled at tau_k = k beta / P, k = 0..P-1.
struct TemperatureLoop {
  double beta = 1.0;
  std::vector<double> values;

  int slices() const { return static_cast<int>(values.size()); }
  void validate() const;
};

/// One loop per site of a box, all sharing (beta, P). Values are stored
/// site-major, slice-minor.
class LoopConfiguration {
 public:
  LoopConfiguration() = default;
  LoopConfiguration(Box box, double beta, int slices, BoundaryCondition boundary = {});

  const Box& box() const { return box_; }
  double beta() const { return beta_; }
  int slices() const { return slices_; }
  const BoundaryCondition& boundary() const { return boundary_; }
  std::size_t sites() const { return box_.sites(); }

  std::span<double> loop(std::size_t site) {
    return {values_.data() + site * slices_, static_cast<std::size_t>(slices_)};
  }
  std::span<const double> loop(std::size_t site) const {
    return {values_.data() + site * slices_, static_cast<std::size_t>(slices_)};
  }
  TemperatureLoop loop_copy(std::size_t site) const;
  void set_loop(std::size_t site, const TemperatureLoop& loop);

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  /// Global sign flip of every loop, boundary kind mirrored.
  LoopConfiguration mirrored() const;

  bool operator==(const LoopConfiguration&) const = default;

 private:
  Box box_;
  double beta_ = 1.0;
  int slices_ = 0;
  BoundaryCondition boundary_;
  std::vector<double> values_;
};

/// Harmonic imaginary-time two-point function S_beta(tau, tau').
double propagator(double beta, double m, double a, double tau, double tau_prime);

/// max(16, ceil(8 beta sqrt(a/m))).
int default_slices(double beta, double m, double a);

/// Exact sampler for the Gaussian reference measure restricted to the slice
/// grid. The covariance C_jk = S_beta(tau_j, tau_k) is circulant and is
/// diagonalized by the real Fourier basis.
class GaussianLoopFactory {
 public:
  double beta() const { return beta_; }
  double m() const { return m_; }
  double a() const { return a_; }
  int slices() const { return slices_; }

  /// (S_beta(0, tau_k))_k.
  std::span<const double> first_row() const { return first_row_; }
  /// Eigenvalue per real Fourier mode (constant, cos/sin pairs, Nyquist).
  std::span<const double> spectral_weights() const { return weights_; }
  /// First row of C^{-1}.
  std::span<const double> inverse_row() const { return inverse_row_; }
  /// Orthonormal basis, entry (slice j, mode r) at basis()[j * P + r].
  std::span<const double> basis() const { return basis_; }

  double covariance(int j, int k) const;

  /// omega = B diag(sqrt(w)) z for standard normal z (size P).
  void synthesize(std::span<const double> normals, std::span<double> out) const;

  /// (1/2) omega^T C^{-1} omega in Fourier coordinates.
  double quadratic_form(std::span<const double> loop) const;
  /// Same value via the inverse circulant row; used as a cross-check.
  double quadratic_form_direct(std::span<const double> loop) const;
  /// (C^{-1} omega)_k.
  double inverse_apply(std::span<const double> loop, int k) const;
  /// Standard deviation of one slice conditioned on all others.
  double conditional_std() const { return conditional_std_; }

  friend GaussianLoopFactory build_factory(double beta, double m, double a, int slices);

 private:
  double beta_ = 1.0, m_ = 1.0, a_ = 1.0;
  int slices_ = 0;
  std::vector<double> first_row_;
  std::vector<double> weights_;
  std::vector<double> sqrt_weights_;
  std::vector<double> inverse_weights_;
  std::vector<double> inverse_row_;
  std::vector<double> inverse_row_doubled_;  // inverse_row_ repeated twice, for wrap-free dot products
  std::vector<double> basis_;
  std::vector<double> basis_transposed_;
  double conditional_std_ = 0.0;
};

/// Throws DefinitenessError if a spectral weight is not strictly positive.
GaussianLoopFactory build_factory(double beta, double m, double a, int slices);

inline GaussianLoopFactory build_factory(const OscillatorParams& params, int slices) {
  return build_factory(params.beta, params.m, params.a, slices);
}

TemperatureLoop sample_loop(const GaussianLoopFactory& factory, std::span<const double> normals);

template <std::uniform_random_bit_generator Rng>
TemperatureLoop sample_loop(const GaussianLoopFactory& factory, Rng& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> z(factory.slices());
  for (double& v : z) v = normal(rng);
  return sample_loop(factory, z);
}

/// Riemann-sum interaction action: bond terms -J (beta/P) sum_k w_l w_l'
/// over nearest-neighbour pairs in the box, plus (beta/P) sum_k V(w_l), plus
/// bonds to clamped exterior loops.
double action(const LoopConfiguration& config, const OscillatorParams& params);

/// Sum over interior neighbours of their loops plus the clamped exterior
/// contribution, slice by slice.
void neighbour_field(const LoopConfiguration& config, std::size_t site, std::span<double> out);

/// I(config with site's loop replaced) - I(config).
double action_change(const LoopConfiguration& config, const OscillatorParams& params,
                     std::size_t site, std::span<const double> new_loop);

}  // namespace qac
