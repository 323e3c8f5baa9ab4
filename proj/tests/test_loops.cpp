#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "qac/errors.hpp"
#include "qac/loop_io.hpp"
#include "qac/loops.hpp"

using namespace qac;

namespace {

// Harmonic two-point function written out independently, used as the oracle.
double s_beta(double beta, double m, double a, double tau) {
  const double g = std::sqrt(a / m);
  return (std::exp(-tau * g) + std::exp(-(beta - tau) * g)) / (2.0 * std::sqrt(m * a) * (1.0 - std::exp(-beta * g)));
}

OscillatorParams model(int d) {
  OscillatorParams p;
  p.m = 1.0;
  p.a = 1.0;
  p.b1 = 1.3;
  p.b2 = 0.7;
  p.J = 0.4;
  p.d = d;
  p.beta = 2.0;
  return p;
}

LoopConfiguration random_config(std::vector<int> extents, int slices, BoundaryCondition b, std::uint64_t seed) {
  LoopConfiguration c(Box(std::move(extents)), 2.0, slices, b);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  for (double& v : c.values()) v = n(rng);
  return c;
}

}  // namespace

TEST_CASE("box layout") {
  Box box({2, 3, 4});
  CHECK(box.sites() == 24);
  CHECK(box.rank() == 3);
  for (std::size_t s = 0; s < box.sites(); ++s) CHECK(box.index(box.coords(s)) == s);
  const std::array<int, 3> last{1, 2, 3};
  CHECK(box.index(last) == 23);
  const std::array<int, 3> corner{0, 0, 0};
  CHECK(box.neighbours(box.index(corner)).size() == 3);
  CHECK(box.exterior_neighbours(box.index(corner)) == 3);
  const std::array<int, 3> inner{1, 1, 1};
  CHECK(box.neighbours(box.index(inner)).size() == 5);
  CHECK(box.exterior_neighbours(box.index(inner)) == 1);
  CHECK_THROWS_AS(Box(std::vector<int>{}), ConfigError);
  CHECK_THROWS_AS(Box({2, 0}), ConfigError);
}

TEST_CASE("propagator closed form") {
  CHECK(propagator(1, 1, 1, 0.3, 0.3) == doctest::Approx((1 + std::exp(-1.0)) / (2 * (1 - std::exp(-1.0)))));
  CHECK(std::abs(propagator(50, 1, 1, 7, 7) - 0.5) < 1e-10);
  for (double t : {0.0, 0.2, 0.9, 1.7})
    for (double tp : {0.0, 0.4, 2.0}) {
      CHECK(propagator(2, 0.5, 3, t, tp) == propagator(2, 0.5, 3, tp, t));
      CHECK(propagator(2, 0.5, 3, t, tp) == doctest::Approx(s_beta(2, 0.5, 3, std::abs(t - tp))).epsilon(1e-14));
    }
  CHECK(propagator(2, 1, 1, 0, 0.5) == doctest::Approx(propagator(2, 1, 1, 0, 1.5)).epsilon(1e-15));
  CHECK_THROWS_AS(propagator(1, 1, 1, -0.1, 0), DomainError);
  CHECK_THROWS_AS(propagator(1, 1, 1, 0, 1.1), DomainError);
}

TEST_CASE("default slice count") {
  CHECK(default_slices(1, 1, 1) == 16);
  CHECK(default_slices(4, 1, 4) == 64);
  CHECK(default_slices(2.01, 1, 1) == 17);
}

TEST_CASE("factory for P = 2") {
  const auto f = build_factory(1.0, 1.0, 1.0, 2);
  const double s0 = propagator(1, 1, 1, 0, 0), sh = propagator(1, 1, 1, 0, 0.5);
  CHECK(f.first_row()[0] == s0);
  CHECK(f.first_row()[1] == sh);
  std::vector<double> w(f.spectral_weights().begin(), f.spectral_weights().end());
  std::sort(w.begin(), w.end());
  CHECK(w[0] == doctest::Approx(s0 - sh).epsilon(1e-14));
  CHECK(w[1] == doctest::Approx(s0 + sh).epsilon(1e-14));
  CHECK(w[0] > 0.0);
}

TEST_CASE("factory structure against a dense eigen-decomposition") {
  for (int p : {3, 8, 17, 32}) {
    const auto f = build_factory(2.0, 0.8, 1.5, p);
    Eigen::MatrixXd c(p, p);
    for (int j = 0; j < p; ++j)
      for (int k = 0; k < p; ++k) {
        c(j, k) = f.covariance(j, k);
        CHECK(c(j, k) == f.covariance((j + 1) % p, (k + 1) % p));
        CHECK(c(j, k) == doctest::Approx(propagator(2.0, 0.8, 1.5, 2.0 * j / p, 2.0 * k / p)).epsilon(1e-14));
      }
    for (int k = 0; k < p; ++k) CHECK(f.first_row()[k] == doctest::Approx(propagator(2.0, 0.8, 1.5, 0, 2.0 * k / p)));

    double trace = 0.0;
    for (double w : f.spectral_weights()) {
      CHECK(w > 0.0);
      trace += w;
    }
    CHECK(trace == doctest::Approx(p * propagator(2.0, 0.8, 1.5, 0, 0)).epsilon(1e-13));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c);
    std::vector<double> ours(f.spectral_weights().begin(), f.spectral_weights().end());
    std::sort(ours.begin(), ours.end());
    for (int k = 0; k < p; ++k) CHECK(ours[k] == doctest::Approx(solver.eigenvalues()[k]).epsilon(1e-10));

    // Orthonormal basis with B diag(w) B^T = C.
    Eigen::MatrixXd b(p, p), w = Eigen::MatrixXd::Zero(p, p);
    for (int j = 0; j < p; ++j)
      for (int r = 0; r < p; ++r) b(j, r) = f.basis()[j * p + r];
    for (int r = 0; r < p; ++r) w(r, r) = f.spectral_weights()[r];
    CHECK((b.transpose() * b - Eigen::MatrixXd::Identity(p, p)).norm() < 1e-12);
    CHECK((b * w * b.transpose() - c).norm() < 1e-12 * c.norm());

    // Inverse row and quadratic forms.
    const Eigen::MatrixXd inv = c.inverse();
    for (int k = 0; k < p; ++k) CHECK(f.inverse_row()[k] == doctest::Approx(inv(0, k)).epsilon(1e-9));
    std::mt19937_64 rng(p);
    std::normal_distribution<double> n;
    Eigen::VectorXd x(p);
    for (int k = 0; k < p; ++k) x[k] = n(rng);
    std::vector<double> xv(x.data(), x.data() + p);
    const double q = 0.5 * x.dot(inv * x);
    CHECK(f.quadratic_form(xv) == doctest::Approx(q).epsilon(1e-10));
    CHECK(f.quadratic_form_direct(xv) == doctest::Approx(q).epsilon(1e-10));
    const Eigen::VectorXd cx = inv * x;
    for (int k = 0; k < p; ++k) CHECK(f.inverse_apply(xv, k) == doctest::Approx(cx[k]).epsilon(1e-9));
    CHECK(f.conditional_std() == doctest::Approx(1.0 / std::sqrt(inv(0, 0))).epsilon(1e-10));
  }
}

TEST_CASE("synthesis is linear in the normals") {
  const auto f = build_factory(1.0, 1.0, 1.0, 6);
  std::vector<double> z(6, 0.0), out(6);
  z[2] = 1.0;
  f.synthesize(z, out);
  for (int j = 0; j < 6; ++j) CHECK(out[j] == doctest::Approx(f.basis()[j * 6 + 2] * std::sqrt(f.spectral_weights()[2])));
  CHECK_THROWS_AS(sample_loop(f, std::vector<double>(5)), ConfigError);
}

TEST_CASE("exact sampler law") {
  const int p = 16, n = 10000;
  const double beta = 2.0;
  const auto f = build_factory(beta, 1.0, 1.0, p);
  std::mt19937_64 rng(42);
  std::vector<double> mean(p, 0.0), mean_sq(p, 0.0);
  double c0 = 0, c0_sq = 0, ch = 0, ch_sq = 0;
  for (int s = 0; s < n; ++s) {
    const auto loop = sample_loop(f, rng);
    REQUIRE(loop.slices() == p);
    for (int j = 0; j < p; ++j) {
      mean[j] += loop.values[j];
      mean_sq[j] += loop.values[j] * loop.values[j];
    }
    const double v0 = loop.values[0] * loop.values[0], vh = loop.values[0] * loop.values[p / 2];
    c0 += v0;
    c0_sq += v0 * v0;
    ch += vh;
    ch_sq += vh * vh;
  }
  for (int j = 0; j < p; ++j) {
    const double m = mean[j] / n, se = std::sqrt((mean_sq[j] / n - m * m) / n);
    CHECK(std::abs(m) < 4 * se);
  }
  auto within = [&](double sum, double sum_sq, double expected) {
    const double m = sum / n, se = std::sqrt((sum_sq / n - m * m) / n);
    return std::abs(m - expected) < 4 * se;
  };
  CHECK(within(c0, c0_sq, s_beta(beta, 1, 1, 0)));
  CHECK(within(ch, ch_sq, s_beta(beta, 1, 1, beta / 2)));
}

TEST_CASE("action examples") {
  OscillatorParams p = model(1);
  LoopConfiguration one(Box({1}), 2.0, 8);
  CHECK(action(one, p) == 0.0);
  const double c = 0.8;
  for (double& v : one.values()) v = c;
  CHECK(action(one, p) == doctest::Approx(2.0 * (-p.b1 * c * c + p.b2 * c * c * c * c)).epsilon(1e-14));

  LoopConfiguration two(Box({2}), 2.0, 8);
  for (double& v : two.values()) v = c;
  CHECK(action(two, p) ==
        doctest::Approx(-p.J * 2.0 * c * c + 2.0 * 2.0 * (-p.b1 * c * c + p.b2 * c * c * c * c)).epsilon(1e-14));

  // A clamped single site sees 2 d exterior neighbours at level c.
  LoopConfiguration clamped(Box({1}), 2.0, 8, {BoundaryKind::plus_clamped, 0.5});
  for (double& v : clamped.values()) v = c;
  CHECK(action(clamped, p) ==
        doctest::Approx(-p.J * 2.0 * 2 * c * 0.5 + 2.0 * (-p.b1 * c * c + p.b2 * c * c * c * c)).epsilon(1e-14));

  LoopConfiguration wrong_beta(Box({1}), 3.0, 8);
  CHECK_THROWS_AS(action(wrong_beta, p), ConfigError);
  CHECK_THROWS_AS(action(two, model(2)), ConfigError);
}

TEST_CASE("action locality") {
  const OscillatorParams p = model(2);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (auto kind : {BoundaryKind::free, BoundaryKind::plus_clamped}) {
    BoundaryCondition b{kind, kind == BoundaryKind::free ? 0.0 : 0.9};
    auto config = random_config({3, 4}, 10, b, 5);
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t site = rng() % config.sites();
      std::vector<double> fresh(10);
      for (double& v : fresh) v = n(rng);
      const double before = action(config, p);
      const double predicted = action_change(config, p, site, fresh);
      TemperatureLoop l{2.0, fresh};
      config.set_loop(site, l);
      const double after = action(config, p);
      CHECK(predicted == doctest::Approx(after - before).epsilon(1e-12).scale(std::abs(before)));
    }
  }
}

TEST_CASE("action symmetries") {
  const OscillatorParams p = model(3);
  const auto free = random_config({2, 3, 2}, 12, {}, 9);
  CHECK(action(free.mirrored(), p) == doctest::Approx(action(free, p)).epsilon(1e-14));

  const auto plus = random_config({2, 3, 2}, 12, {BoundaryKind::plus_clamped, 0.7}, 10);
  const auto minus = plus.mirrored();
  CHECK(minus.boundary().kind == BoundaryKind::minus_clamped);
  CHECK(action(minus, p) == action(plus, p));

  // Cyclic shift of every loop by 5 slices.
  auto shifted = free;
  for (std::size_t s = 0; s < free.sites(); ++s) {
    auto src = free.loop(s);
    auto dst = shifted.loop(s);
    for (int k = 0; k < 12; ++k) dst[(k + 5) % 12] = src[k];
  }
  CHECK(action(shifted, p) == doctest::Approx(action(free, p)).epsilon(1e-13));
}

TEST_CASE("loop record round trip is bit exact") {
  auto config = random_config({2, 3}, 7, {BoundaryKind::minus_clamped, 0.3125}, 77);
  config.values()[4] = 1e-310;  // subnormal
  config.values()[5] = -0.0;
  std::stringstream s;
  write_configuration(s, config);
  const auto back = read_configuration(s);
  CHECK(back == config);
  CHECK(std::signbit(back.values()[5]));

  std::istringstream truncated("qac-loops 1\nbeta 0x1p+1\nslices 2\n");
  CHECK_THROWS_AS(read_configuration(truncated), ConfigError);
  CHECK(parse_double(hexfloat(0.1)) == 0.1);
}

TEST_CASE("loop and boundary validation") {
  CHECK_THROWS_AS(LoopConfiguration(Box({2}), 1.0, 1), ConfigError);
  CHECK_THROWS_AS((BoundaryCondition{BoundaryKind::plus_clamped, 0.0}.validate()), ConfigError);
  CHECK(parse_boundary_kind("minus_clamped") == BoundaryKind::minus_clamped);
  CHECK_THROWS_AS(parse_boundary_kind("periodic"), ConfigError);
  LoopConfiguration c(Box({2}), 1.0, 4);
  CHECK_THROWS_AS(c.set_loop(0, TemperatureLoop{2.0, {0, 0, 0, 0}}), ConfigError);
  CHECK_THROWS_AS((TemperatureLoop{1.0, {0.0, NAN}}.validate()), ConfigError);
}
