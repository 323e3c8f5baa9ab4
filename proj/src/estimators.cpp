#include "qac/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qac/errors.hpp"

namespace qac {

TestFunction TestFunction::unit() {
  return {"one", [](double) { return 1.0; }, true};
}

TestFunction TestFunction::identity() {
  return {"identity", [](double x) { return x; }, false};
}

TestFunction TestFunction::clip(double limit) {
  if (!(limit > 0.0)) throw ConfigError("clip level must be > 0");
  return {"clip(" + std::to_string(limit) + ")",
          [limit](double x) { return std::max(-limit, std::min(limit, x)); }, true};
}

double default_clip_level(const OscillatorParams& params) {
  const double v = params.upsilon();
  return v > 0.0 ? 5.0 * std::sqrt(v) : 1.0;
}

double default_clamp_level(const OscillatorParams& params) {
  const double v = params.upsilon();
  return v > 0.0 ? std::sqrt(v) : 1.0;
}

int slice_of(double tau, double beta, int slices) {
  if (!(tau >= 0.0 && tau <= beta)) throw DomainError("tau = " + std::to_string(tau) + " outside [0, beta]");
  const double position = tau * slices / beta;
  const double nearest = std::round(position);
  if (std::abs(position - nearest) > 1e-9 * std::max(1.0, position))
    throw DomainError("tau = " + std::to_string(tau) + " is not on the slice grid k beta / " +
                      std::to_string(slices) + " (no interpolation)");
  return static_cast<int>(nearest) % slices;
}

Observer matsubara_observer(const LoopConfiguration& layout, std::vector<MatsubaraFactor> factors,
                            std::string name) {
  struct Bound {
    TestFunction f;
    std::size_t site;
    int slice;
  };
  std::vector<Bound> bound;
  bool bounded = true;
  for (auto& factor : factors) {
    if (factor.site >= layout.sites())
      throw DomainError("Matsubara factor site " + std::to_string(factor.site) + " outside the volume");
    bounded = bounded && factor.function.bounded;
    bound.push_back({std::move(factor.function), factor.site, slice_of(factor.tau, layout.beta(), layout.slices())});
  }
  Observer o;
  o.name = std::move(name);
  o.dimension = 1;
  o.bounded = bounded;
  o.measure = [bound = std::move(bound)](const LoopConfiguration& c, std::span<double> out) {
    double product = 1.0;
    for (const auto& b : bound) product *= b.f(c.loop(b.site)[b.slice]);
    out[0] = product;
  };
  return o;
}

Observer order_parameter_observer(const LoopConfiguration& layout, std::size_t site) {
  if (site >= layout.sites()) throw DomainError("order parameter site " + std::to_string(site) + " outside the volume");
  Observer o;
  o.name = "M_hat";
  o.dimension = 1;
  o.bounded = false;
  o.measure = [site](const LoopConfiguration& c, std::span<double> out) {
    const auto w = c.loop(site);
    double s = 0.0;
    for (double v : w) s += v;
    out[0] = s / static_cast<double>(w.size());
  };
  return o;
}

EstimateReport matsubara_estimate(const ChainSetup& setup, std::vector<MatsubaraFactor> factors) {
  const Observer o = matsubara_observer(setup.initial, std::move(factors));
  return run_chains(setup, std::span(&o, 1)).reports.front();
}

EstimateReport order_parameter(const ChainSetup& setup, std::size_t site) {
  const Observer o = order_parameter_observer(setup.initial, site);
  return run_chains(setup, std::span(&o, 1)).reports.front();
}

void require_odd_positive(const TestFunction& f, double scale) {
  for (int i = 1; i <= 64; ++i) {
    const double x = scale * i / 16.0;
    const double fp = f(x), fm = f(-x);
    if (fm != -fp)
      throw PreconditionError("gibbs_sampler", "test function " + f.name + " is not odd at x = " + std::to_string(x),
                              fp, -fm);
    if (!(fp > 0.0))
      throw PreconditionError("gibbs_sampler",
                              "test function " + f.name + " is not positive at x = " + std::to_string(x), fp, 0.0);
  }
  if (f(0.0) != 0.0) throw PreconditionError("gibbs_sampler", "test function " + f.name + " is not odd at 0", f(0.0), 0.0);
}

GksAudit gks_audit(const ChainSetup& plus_setup, const std::array<MatsubaraFactor, 3>& factors) {
  if (plus_setup.initial.boundary().kind != BoundaryKind::plus_clamped)
    throw ConfigError("gks-audit runs under plus_clamped boundary");
  for (const auto& factor : factors) require_odd_positive(factor.function, default_clamp_level(plus_setup.params));

  std::vector<MatsubaraFactor> list(factors.begin(), factors.end());
  GksAudit audit;
  audit.plus = matsubara_estimate(plus_setup, list);
  audit.minus = matsubara_estimate(mirror(plus_setup), list);
  audit.plus.name = "Gamma_plus";
  audit.minus.name = "Gamma_minus";
  audit.plus_nonnegative = audit.plus.scalar() >= -2.0 * audit.plus.scalar_error();
  audit.minus_nonpositive = audit.minus.scalar() <= 2.0 * audit.minus.scalar_error();
  audit.exact_mirror = audit.minus.scalar() == -audit.plus.scalar();
  return audit;
}

}  // namespace qac
