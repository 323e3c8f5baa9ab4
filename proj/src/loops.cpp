#include "qac/loops.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qac/errors.hpp"
#include "qac/simd/kernels.hpp"

namespace qac {

Box::Box(std::vector<int> extents) : extents_(std::move(extents)) {
  if (extents_.empty()) throw ConfigError("volume.extents must list at least one axis");
  sites_ = 1;
  for (int e : extents_) {
    if (e < 1) throw ConfigError("volume.extents entries must be >= 1, got " + std::to_string(e));
    sites_ *= static_cast<std::size_t>(e);
  }
}

std::vector<int> Box::coords(std::size_t site) const {
  std::vector<int> c(extents_.size());
  for (int axis = rank() - 1; axis >= 0; --axis) {
    c[axis] = static_cast<int>(site % extents_[axis]);
    site /= extents_[axis];
  }
  return c;
}

std::size_t Box::index(std::span<const int> coords) const {
  std::size_t site = 0;
  for (int axis = 0; axis < rank(); ++axis) site = site * extents_[axis] + coords[axis];
  return site;
}

std::vector<std::size_t> Box::neighbours(std::size_t site) const {
  std::vector<std::size_t> out;
  auto c = coords(site);
  for (int axis = 0; axis < rank(); ++axis) {
    for (int step : {-1, 1}) {
      const int v = c[axis] + step;
      if (v < 0 || v >= extents_[axis]) continue;
      c[axis] = v;
      out.push_back(index(c));
      c[axis] -= step;
    }
  }
  return out;
}

int Box::exterior_neighbours(std::size_t site) const {
  return 2 * rank() - static_cast<int>(neighbours(site).size());
}

std::string_view to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::free: return "free";
    case BoundaryKind::plus_clamped: return "plus_clamped";
    case BoundaryKind::minus_clamped: return "minus_clamped";
  }
  return "free";
}

BoundaryKind parse_boundary_kind(std::string_view text) {
  if (text == "free") return BoundaryKind::free;
  if (text == "plus_clamped") return BoundaryKind::plus_clamped;
  if (text == "minus_clamped") return BoundaryKind::minus_clamped;
  throw ConfigError("boundary.kind must be free, plus_clamped or minus_clamped, got '" +
                    std::string(text) + "'");
}

double BoundaryCondition::value() const {
  switch (kind) {
    case BoundaryKind::free: return 0.0;
    case BoundaryKind::plus_clamped: return level;
    case BoundaryKind::minus_clamped: return -level;
  }
  return 0.0;
}

void BoundaryCondition::validate() const {
  if (kind != BoundaryKind::free && !(level > 0.0 && std::isfinite(level)))
    throw ConfigError("boundary.c must be > 0 for clamped boundaries, got " + std::to_string(level));
}

BoundaryCondition BoundaryCondition::mirrored() const {
  BoundaryCondition out = *this;
  if (kind == BoundaryKind::plus_clamped) out.kind = BoundaryKind::minus_clamped;
  else if (kind == BoundaryKind::minus_clamped) out.kind = BoundaryKind::plus_clamped;
  return out;
}

void TemperatureLoop::validate() const {
  if (!(beta > 0.0)) throw ConfigError("loop beta must be > 0");
  if (values.size() < 2) throw ConfigError("loop needs at least 2 slices");
  for (double v : values)
    if (!std::isfinite(v)) throw ConfigError("loop values must be finite");
}

LoopConfiguration::LoopConfiguration(Box box, double beta, int slices, BoundaryCondition boundary)
    : box_(std::move(box)), beta_(beta), slices_(slices), boundary_(boundary) {
  if (!(beta > 0.0)) throw ConfigError("configuration beta must be > 0");
  if (slices < 2) throw ConfigError("configuration needs at least 2 slices");
  boundary_.validate();
  values_.assign(box_.sites() * static_cast<std::size_t>(slices_), 0.0);
}

TemperatureLoop LoopConfiguration::loop_copy(std::size_t site) const {
  const auto l = loop(site);
  return {beta_, std::vector<double>(l.begin(), l.end())};
}

void LoopConfiguration::set_loop(std::size_t site, const TemperatureLoop& loop) {
  if (loop.beta != beta_ || loop.slices() != slices_)
    throw ConfigError("loop (beta, P) does not match the configuration");
  std::copy(loop.values.begin(), loop.values.end(), this->loop(site).begin());
}

LoopConfiguration LoopConfiguration::mirrored() const {
  LoopConfiguration out = *this;
  for (double& v : out.values_) v = -v;
  out.boundary_ = boundary_.mirrored();
  return out;
}

double propagator(double beta, double m, double a, double tau, double tau_prime) {
  if (!(beta > 0.0 && m > 0.0 && a > 0.0)) throw DomainError("propagator needs beta, m, a > 0");
  if (!(tau >= 0.0 && tau <= beta && tau_prime >= 0.0 && tau_prime <= beta))
    throw DomainError("propagator times must lie in [0, beta]");
  const double gap = std::sqrt(a / m);
  const double lag = std::abs(tau - tau_prime);
  return (std::exp(-lag * gap) + std::exp(-(beta - lag) * gap)) /
         (2.0 * std::sqrt(m * a) * (-std::expm1(-beta * gap)));
}

int default_slices(double beta, double m, double a) {
  return std::max(16, static_cast<int>(std::ceil(8.0 * beta * std::sqrt(a / m))));
}

double GaussianLoopFactory::covariance(int j, int k) const {
  const int lag = ((j - k) % slices_ + slices_) % slices_;
  return first_row_[lag];
}

void GaussianLoopFactory::synthesize(std::span<const double> normals, std::span<double> out) const {
  const auto& k = simd::kernels();
  const std::size_t p = slices_;
  std::vector<double> y(p);
  for (std::size_t r = 0; r < p; ++r) y[r] = sqrt_weights_[r] * normals[r];
  for (std::size_t j = 0; j < p; ++j) out[j] = k.dot(basis_.data() + j * p, y.data(), p);
}

double GaussianLoopFactory::quadratic_form(std::span<const double> loop) const {
  const auto& k = simd::kernels();
  const std::size_t p = slices_;
  std::vector<double> y(p);
  for (std::size_t r = 0; r < p; ++r) y[r] = k.dot(basis_transposed_.data() + r * p, loop.data(), p);
  return 0.5 * k.weighted_square_sum(y.data(), inverse_weights_.data(), p);
}

double GaussianLoopFactory::inverse_apply(std::span<const double> loop, int k) const {
  // (C^{-1} w)_k = sum_j c_{(j-k) mod P} w_j
  return simd::kernels().dot(inverse_row_doubled_.data() + slices_ - k, loop.data(), slices_);
}

double GaussianLoopFactory::quadratic_form_direct(std::span<const double> loop) const {
  double s = 0.0;
  for (int k = 0; k < slices_; ++k) s += loop[k] * inverse_apply(loop, k);
  return 0.5 * s;
}

GaussianLoopFactory build_factory(double beta, double m, double a, int slices) {
  if (slices < 2) throw ConfigError("slices must be >= 2, got " + std::to_string(slices));
  GaussianLoopFactory f;
  f.beta_ = beta;
  f.m_ = m;
  f.a_ = a;
  f.slices_ = slices;
  const std::size_t p = slices;
  f.first_row_.resize(p);
  for (std::size_t j = 0; j < p; ++j) f.first_row_[j] = propagator(beta, m, a, 0.0, beta * j / p);

  // Real orthonormal Fourier basis: constant, (cos, sin) pairs, Nyquist.
  f.basis_.assign(p * p, 0.0);
  f.weights_.assign(p, 0.0);
  auto eigenvalue = [&](std::size_t freq) {
    double s = 0.0;
    for (std::size_t j = 0; j < p; ++j)
      s += f.first_row_[j] * std::cos(2.0 * std::numbers::pi * static_cast<double>(j * freq % p) / p);
    return s;
  };
  std::size_t mode = 0;
  auto set_mode = [&](auto&& column, double weight) {
    for (std::size_t j = 0; j < p; ++j) f.basis_[j * p + mode] = column(j);
    f.weights_[mode] = weight;
    ++mode;
  };
  const double norm0 = 1.0 / std::sqrt(static_cast<double>(p));
  const double norm = std::sqrt(2.0 / p);
  set_mode([&](std::size_t) { return norm0; }, eigenvalue(0));
  for (std::size_t freq = 1; 2 * freq < p; ++freq) {
    const double w = eigenvalue(freq);
    auto angle = [&](std::size_t j) { return 2.0 * std::numbers::pi * static_cast<double>(j * freq % p) / p; };
    set_mode([&](std::size_t j) { return norm * std::cos(angle(j)); }, w);
    set_mode([&](std::size_t j) { return norm * std::sin(angle(j)); }, w);
  }
  if (p % 2 == 0) set_mode([&](std::size_t j) { return j % 2 == 0 ? norm0 : -norm0; }, eigenvalue(p / 2));

  for (std::size_t r = 0; r < p; ++r)
    if (!(f.weights_[r] > 0.0))
      throw DefinitenessError("circulant covariance has non-positive spectral weight " +
                              std::to_string(f.weights_[r]) + " in mode " + std::to_string(r) +
                              " (P = " + std::to_string(p) + ")");

  f.sqrt_weights_.resize(p);
  f.inverse_weights_.resize(p);
  for (std::size_t r = 0; r < p; ++r) {
    f.sqrt_weights_[r] = std::sqrt(f.weights_[r]);
    f.inverse_weights_[r] = 1.0 / f.weights_[r];
  }
  f.basis_transposed_.resize(p * p);
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t r = 0; r < p; ++r) f.basis_transposed_[r * p + j] = f.basis_[j * p + r];

  f.inverse_row_.assign(p, 0.0);
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t r = 0; r < p; ++r)
      f.inverse_row_[j] += f.basis_[j * p + r] * f.basis_[r] * f.inverse_weights_[r];
  f.inverse_row_doubled_.resize(2 * p);
  for (std::size_t j = 0; j < 2 * p; ++j) f.inverse_row_doubled_[j] = f.inverse_row_[j % p];
  f.conditional_std_ = 1.0 / std::sqrt(f.inverse_row_[0]);
  return f;
}

TemperatureLoop sample_loop(const GaussianLoopFactory& factory, std::span<const double> normals) {
  if (normals.size() != static_cast<std::size_t>(factory.slices()))
    throw ConfigError("sample_loop needs one normal variate per slice");
  TemperatureLoop loop{factory.beta(), std::vector<double>(factory.slices())};
  factory.synthesize(normals, loop.values);
  return loop;
}

namespace {

void check_consistent(const LoopConfiguration& config, const OscillatorParams& params) {
  if (config.beta() != params.beta)
    throw ConfigError("configuration beta " + std::to_string(config.beta()) +
                      " does not match model beta " + std::to_string(params.beta));
  if (config.box().rank() != params.d)
    throw ConfigError("volume has " + std::to_string(config.box().rank()) +
                      " axes but model.d = " + std::to_string(params.d));
}

double site_potential_sum(const OscillatorParams& params, std::span<const double> loop) {
  if (params.harmonic) return 0.0;
  return simd::kernels().quartic_sum(loop.data(), loop.size(), params.b1, params.b2);
}

}  // namespace

void neighbour_field(const LoopConfiguration& config, std::size_t site, std::span<double> out) {
  const double exterior = config.box().exterior_neighbours(site) * config.boundary().value();
  std::fill(out.begin(), out.end(), exterior);
  for (std::size_t n : config.box().neighbours(site)) {
    const auto other = config.loop(n);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += other[k];
  }
}

double action(const LoopConfiguration& config, const OscillatorParams& params) {
  check_consistent(config, params);
  const auto& kern = simd::kernels();
  const std::size_t p = config.slices();
  const double dtau = config.beta() / static_cast<double>(p);
  const double boundary = config.boundary().value();
  std::vector<double> ones(p, 1.0);
  double bonds = 0.0, potential = 0.0;
  for (std::size_t site = 0; site < config.sites(); ++site) {
    const auto w = config.loop(site);
    potential += site_potential_sum(params, w);
    for (std::size_t n : config.box().neighbours(site))
      if (n > site) bonds += kern.dot(w.data(), config.loop(n).data(), p);
    if (boundary != 0.0)
      bonds += config.box().exterior_neighbours(site) * boundary * kern.dot(w.data(), ones.data(), p);
  }
  return dtau * (potential - params.J * bonds);
}

double action_change(const LoopConfiguration& config, const OscillatorParams& params,
                     std::size_t site, std::span<const double> new_loop) {
  check_consistent(config, params);
  const std::size_t p = config.slices();
  std::vector<double> field(p), diff(p);
  neighbour_field(config, site, field);
  const auto old_loop = config.loop(site);
  for (std::size_t k = 0; k < p; ++k) diff[k] = new_loop[k] - old_loop[k];
  const double dtau = config.beta() / static_cast<double>(p);
  return dtau * (site_potential_sum(params, new_loop) - site_potential_sum(params, old_loop) -
                 params.J * simd::kernels().dot(diff.data(), field.data(), p));
}

}  // namespace qac
