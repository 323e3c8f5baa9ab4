#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <sstream>

#include "qac/errors.hpp"
#include "qac/estimators.hpp"
#include "qac/gibbs.hpp"
#include "qac/oracles.hpp"

using namespace qac;

namespace {

OscillatorParams well(int d, double beta) {
  OscillatorParams p;
  p.m = 1.0;
  p.a = 1.0;
  p.b1 = 1.5;
  p.b2 = 0.5;
  p.J = 0.3;
  p.d = d;
  p.beta = beta;
  return p;
}

ChainSetup make_setup(const OscillatorParams& p, std::vector<int> extents, int slices, BoundaryCondition b,
                      ChainSettings s) {
  LoopConfiguration init(Box(std::move(extents)), p.beta, slices, b);
  for (double& v : init.values()) v = b.value();
  return ChainSetup{init, p, build_factory(p, slices), s, 1, 1};
}

// -log of the unnormalized target, from a dense inverse covariance.
double target_energy(const LoopConfiguration& c, const OscillatorParams& p, const Eigen::MatrixXd& inv) {
  const int n = c.slices();
  double e = action(c, p);
  for (std::size_t s = 0; s < c.sites(); ++s) {
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(c.loop(s).data(), n);
    e += 0.5 * x.dot(inv * x);
  }
  return e;
}

Eigen::MatrixXd dense_inverse(const GaussianLoopFactory& f) {
  const int n = f.slices();
  Eigen::MatrixXd c(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) c(j, k) = f.covariance(j, k);
  return c.inverse();
}

}  // namespace

TEST_CASE("chain settings validation and digest") {
  ChainSettings s;
  CHECK_NOTHROW(s.validate());
  s.mix = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = {};
  s.thinning = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  ChainSettings a, b;
  b.seed = 2;
  CHECK(a.digest() != b.digest());
  CHECK(a.digest() == ChainSettings{}.digest());
}

TEST_CASE("nudge detailed balance at P = 2") {
  const OscillatorParams p = well(1, 1.0);
  const auto f = build_factory(p, 2);
  const Eigen::MatrixXd inv = dense_inverse(f);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 200; ++trial) {
    LoopConfiguration x(Box({1}), p.beta, 2);
    for (double& v : x.values()) v = 1.5 * n(rng);
    MetropolisChain chain(x, p, f, {});
    const int k = trial % 2;
    const double delta = 0.7 * n(rng);
    LoopConfiguration y = x;
    y.loop(0)[k] += delta;
    const double de = chain.nudge_energy_change(0, k, delta);
    const double exact = target_energy(y, p, inv) - target_energy(x, p, inv);
    CHECK(de == doctest::Approx(exact).epsilon(1e-10).scale(1.0));
    // pi(x) T(x -> y) / (pi(y) T(y -> x)) with a symmetric proposal.
    const double forward = std::min(1.0, std::exp(-de));
    const double backward = std::min(1.0, std::exp(de));
    CHECK(std::exp(-target_energy(x, p, inv) + target_energy(y, p, inv)) * forward / backward ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("flip and nudge energies on a lattice against direct evaluation") {
  const OscillatorParams p = well(2, 2.0);
  const auto f = build_factory(p, 8);
  const Eigen::MatrixXd inv = dense_inverse(f);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  LoopConfiguration x(Box({2, 3}), p.beta, 8, {BoundaryKind::plus_clamped, 0.6});
  for (double& v : x.values()) v = n(rng);
  MetropolisChain chain(x, p, f, {});
  const double e0 = target_energy(x, p, inv);
  for (std::size_t site = 0; site < x.sites(); ++site) {
    LoopConfiguration y = x;
    for (double& v : y.loop(site)) v = -v;
    CHECK(chain.flip_energy_change(site) == doctest::Approx(target_energy(y, p, inv) - e0).epsilon(1e-10).scale(1.0));
    LoopConfiguration z = x;
    z.loop(site)[3] += 0.4;
    CHECK(chain.nudge_energy_change(site, 3, 0.4) ==
          doctest::Approx(target_energy(z, p, inv) - e0).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("redraw acceptance is exactly one for the harmonic uncoupled chain") {
  OscillatorParams p = well(1, 2.0);
  p.harmonic = true;
  p.J = 0.0;
  ChainSettings s;
  s.mix = {1.0, 0.0, 0.0};
  s.sweeps = 500;
  s.burn_in = 0;
  auto setup = make_setup(p, {3}, 16, {}, s);
  const auto r = run_chains(setup, {});
  CHECK(r.acceptance.attempted[0] == 1500);
  CHECK(r.acceptance.accepted[0] == 1500);
  CHECK(r.acceptance.rate(Proposal::redraw) == 1.0);
}

TEST_CASE("moments against tensor quadrature (single site, P = 3)") {
  const OscillatorParams p = well(1, 2.0);
  // The quartic factor is not polynomial, so the rule converges slowly; 120
  // nodes are within 1e-9 of 160, far below any Monte Carlo error bar here.
  const auto exact = oracle::single_site_moments(p, 3, 120);
  const auto finer = oracle::single_site_moments(p, 3, 160);
  for (int k = 0; k < 4; ++k) CHECK(exact[k] == doctest::Approx(finer[k]).epsilon(1e-9).scale(1.0));
  ChainSettings s;
  s.sweeps = 100000;
  s.seed = 8;
  auto setup = make_setup(p, {1}, 3, {}, s);
  Observer o;
  o.name = "moments";
  o.dimension = 4;
  o.bounded = false;
  o.measure = [](const LoopConfiguration& c, std::span<double> out) {
    const double w = c.loop(0)[0];
    out[0] = w;
    out[1] = w * w;
    out[2] = w * w * w;
    out[3] = w * w * w * w;
  };
  const auto r = run_chains(setup, std::span(&o, 1)).reports[0];
  for (int k = 0; k < 4; ++k) CHECK(std::abs(r.value[k] - exact[k]) < 4.0 * r.std_error[k]);
}

TEST_CASE("harmonic oracle: quadrature moments match the propagator") {
  // With V off, <w^2> is S(0,0) and <w^4> = 3 S(0,0)^2 for any slice count.
  OscillatorParams p = well(1, 1.5);
  p.harmonic = true;
  const auto m = oracle::single_site_moments(p, 3, 40);
  const double s0 = propagator(1.5, 1, 1, 0, 0);
  CHECK(std::abs(m[0]) < 1e-12);
  CHECK(m[1] == doctest::Approx(s0).epsilon(1e-12));
  CHECK(m[3] == doctest::Approx(3 * s0 * s0).epsilon(1e-12));
}

TEST_CASE("mirrored chains are exact sign flips at every sweep") {
  const OscillatorParams p = well(2, 2.0);
  ChainSettings s;
  s.seed = 31;
  auto setup = make_setup(p, {3, 3}, 16, {BoundaryKind::plus_clamped, 0.8}, s);
  const auto mirrored = mirror(setup);
  CHECK(mirrored.initial.boundary().kind == BoundaryKind::minus_clamped);
  MetropolisChain plus(setup.initial, p, setup.factory, setup.settings);
  MetropolisChain minus(mirrored.initial, p, mirrored.factory, mirrored.settings);
  for (int sweep = 0; sweep < 50; ++sweep) {
    plus.sweep();
    minus.sweep();
    REQUIRE(minus.state() == plus.state().mirrored());
  }
  CHECK(plus.acceptance().accepted == minus.acceptance().accepted);
}

TEST_CASE("checkpoint resume reproduces the uninterrupted chain") {
  const OscillatorParams p = well(1, 2.0);
  ChainSettings s;
  s.seed = 77;
  auto setup = make_setup(p, {4}, 16, {}, s);
  MetropolisChain a(setup.initial, p, setup.factory, s);
  for (int i = 0; i < 30; ++i) a.sweep();
  std::stringstream saved;
  a.save_checkpoint(saved);
  for (int i = 0; i < 30; ++i) a.sweep();
  auto b = MetropolisChain::load_checkpoint(saved, p, setup.factory, s);
  CHECK(b.sweeps_done() == 30);
  for (int i = 0; i < 30; ++i) b.sweep();
  CHECK(b.state() == a.state());
  CHECK(b.acceptance().accepted == a.acceptance().accepted);

  std::istringstream junk("not a checkpoint");
  CHECK_THROWS_AS(MetropolisChain::load_checkpoint(junk, p, setup.factory, s), ConfigError);
}

TEST_CASE("chain inputs must agree") {
  const OscillatorParams p = well(1, 2.0);
  const auto f = build_factory(p, 16);
  CHECK_THROWS_AS(MetropolisChain(LoopConfiguration(Box({2}), 2.0, 8), p, f, {}), ConfigError);
  CHECK_THROWS_AS(MetropolisChain(LoopConfiguration(Box({2}), 1.0, 16), p, f, {}), ConfigError);
  CHECK_THROWS_AS(MetropolisChain(LoopConfiguration(Box({2, 2}), 2.0, 16), p, f, {}), ConfigError);
}

TEST_CASE("seeds, determinism and merging") {
  CHECK(chain_seed(1, 0) != chain_seed(1, 1));
  CHECK(chain_seed(1, 0) != chain_seed(2, 0));
  // splitmix64 reference output for state 0 + golden gamma.
  CHECK(chain_seed(0, 0) == 0xe220a8397b1dcdafull);

  const OscillatorParams p = well(1, 2.0);
  ChainSettings s;
  s.sweeps = 640;
  s.burn_in = 10;
  s.thinning = 2;
  auto setup = make_setup(p, {3}, 16, {}, s);
  setup.chains = 3;
  const Observer o = order_parameter_observer(setup.initial, 1);
  const auto r1 = run_chains(setup, std::span(&o, 1));
  setup.threads = 3;
  const auto r2 = run_chains(setup, std::span(&o, 1));
  CHECK(r1.reports[0].value == r2.reports[0].value);
  CHECK(r1.final_states == r2.final_states);
  CHECK(r1.reports[0].n_samples == 3 * 320);
  CHECK_FALSE(r1.reports[0].bounded);

  EstimateReport a{"x", {1.0}, {0.1}, 100, {}, "d", true};
  EstimateReport b{"x", {4.0}, {0.2}, 200, {}, "d", true};
  EstimateReport c{"x", {-2.0}, {0.3}, 50, {}, "d", true};
  const auto ab_c = merge(merge(a, b), c), a_bc = merge(a, merge(b, c)), ba = merge(b, a);
  CHECK(ab_c.scalar() == doctest::Approx(a_bc.scalar()).epsilon(1e-15));
  CHECK(ab_c.scalar_error() == doctest::Approx(a_bc.scalar_error()).epsilon(1e-15));
  CHECK(merge(a, b).scalar() == doctest::Approx(ba.scalar()).epsilon(1e-15));
  CHECK(merge(a, b).scalar() == doctest::Approx(3.0));
  CHECK(ab_c.n_samples == 350);
}

TEST_CASE("batch means on a known series") {
  // Batches of the series 0..63 in 4 batches have means 7.5, 23.5, 39.5, 55.5.
  std::vector<double> series(64);
  for (int i = 0; i < 64; ++i) series[i] = i;
  std::vector<double> mean, se;
  batch_means(series, 1, 4, mean, se);
  CHECK(mean[0] == doctest::Approx(31.5));
  // Deviations from 31.5 are +-8 and +-24: sample variance 1280 / 3.
  CHECK(se[0] == doctest::Approx(std::sqrt(1280.0 / 3.0 / 4.0)).epsilon(1e-12));
}

TEST_CASE("Matsubara estimator basics") {
  const OscillatorParams p = well(1, 2.0);
  ChainSettings s;
  s.sweeps = 2000;
  auto setup = make_setup(p, {2}, 16, {}, s);
  const auto one = matsubara_estimate(setup, {{TestFunction::unit(), 0, 0.0}, {TestFunction::unit(), 1, 0.5}});
  CHECK(one.scalar() == 1.0);
  CHECK(one.scalar_error() == 0.0);

  CHECK(slice_of(0.5, 2.0, 16) == 4);
  CHECK(slice_of(2.0, 2.0, 16) == 0);
  CHECK_THROWS_AS(slice_of(0.3, 2.0, 16), DomainError);
  CHECK_THROWS_AS(matsubara_estimate(setup, {{TestFunction::unit(), 0, 0.3}}), DomainError);
  CHECK_THROWS_AS(order_parameter(setup, 5), DomainError);
}

TEST_CASE("harmonic two-point function through clipped test functions") {
  OscillatorParams p = well(1, 2.0);
  p.harmonic = true;
  p.J = 0.0;
  ChainSettings s;
  s.sweeps = 20000;
  s.seed = 12;
  auto setup = make_setup(p, {1}, 16, {}, s);
  // Clipping at 10 standard deviations is invisible at this sample size.
  const auto clip = TestFunction::clip(10.0 * std::sqrt(propagator(2, 1, 1, 0, 0)));
  for (int lag : {0, 3, 8}) {
    const auto r = matsubara_estimate(setup, {{clip, 0, 0.0}, {clip, 0, lag * 2.0 / 16}});
    CHECK(std::abs(r.scalar() - propagator(2, 1, 1, 0, lag * 2.0 / 16)) < 4.0 * r.scalar_error());
  }
}

TEST_CASE("odd moments vanish under free boundary; order-parameter bounds") {
  const OscillatorParams p = well(3, 2.0);
  ChainSettings s;
  s.sweeps = 4000;
  s.seed = 21;
  const int slices = 16;
  auto free_setup = make_setup(p, {2, 2, 2}, slices, {}, s);
  const auto clip = TestFunction::clip(default_clip_level(p));
  const auto third = matsubara_estimate(free_setup, {{clip, 3, 0.5}, {clip, 3, 0.5}, {clip, 3, 0.5}});
  CHECK(std::abs(third.scalar()) < 4.0 * third.scalar_error());

  const auto m_free = order_parameter(free_setup, 0);
  BoundaryCondition plus{BoundaryKind::plus_clamped, default_clamp_level(p)};
  auto plus_setup = make_setup(p, {2, 2, 2}, slices, plus, s);
  const auto m_plus = order_parameter(plus_setup, 0);
  const auto m_minus = order_parameter(mirror(plus_setup), 0);
  CHECK(m_minus.scalar() == -m_plus.scalar());
  CHECK(m_free.scalar() <= m_plus.scalar() + 2.0 * std::hypot(m_free.scalar_error(), m_plus.scalar_error()));
  CHECK(m_free.scalar() >= m_minus.scalar() - 2.0 * std::hypot(m_free.scalar_error(), m_minus.scalar_error()));
}

TEST_CASE("symmetry breaking under plus clamping in a deep double well") {
  OscillatorParams p = well(3, 4.0);
  p.b1 = 3.0;
  p.J = 0.5;
  ChainSettings s;
  s.sweeps = 1500;
  s.burn_in = 300;
  s.seed = 2;
  BoundaryCondition plus{BoundaryKind::plus_clamped, default_clamp_level(p)};
  auto setup = make_setup(p, {4, 4, 4}, default_slices(p.beta, p.m, p.a), plus, s);
  const std::array<int, 3> centre{1, 1, 1};
  const auto m = order_parameter(setup, setup.initial.box().index(centre));
  CHECK(m.scalar() > 3.0 * m.scalar_error());
}

TEST_CASE("GKS audit preconditions") {
  CHECK_NOTHROW(require_odd_positive(TestFunction::clip(1.0), 2.0));
  CHECK_THROWS_AS(require_odd_positive(TestFunction::unit(), 2.0), PreconditionError);
  TestFunction shifted{"shifted", [](double x) { return x + 0.1; }, true};
  CHECK_THROWS_AS(require_odd_positive(shifted, 2.0), PreconditionError);
  TestFunction negative{"neg", [](double x) { return -x; }, false};
  CHECK_THROWS_AS(require_odd_positive(negative, 2.0), PreconditionError);

  const OscillatorParams p = well(1, 2.0);
  ChainSettings s;
  s.sweeps = 500;
  auto free_setup = make_setup(p, {3}, 16, {}, s);
  const auto clip = TestFunction::clip(1.0);
  const std::array<MatsubaraFactor, 3> f{{{clip, 0, 0.0}, {clip, 1, 0.5}, {clip, 2, 1.0}}};
  CHECK_THROWS_AS(gks_audit(free_setup, f), ConfigError);

  auto plus_setup = make_setup(p, {3}, 16, {BoundaryKind::plus_clamped, 1.0}, s);
  const auto audit = gks_audit(plus_setup, f);
  CHECK(audit.exact_mirror);
  CHECK(audit.minus.scalar() == -audit.plus.scalar());
  CHECK(audit.pass());
}
