#include "qac/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "qac/errors.hpp"
#include "qac/estimators.hpp"
#include "qac/gibbs.hpp"
#include "qac/lattice_criteria.hpp"
#include "qac/loops.hpp"
#include "qac/oracles.hpp"
#include "qac/spectral.hpp"

namespace qac {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail << "FAILED: " << what << "; ";
    }
  }
};

OscillatorParams harmonic(double m, double a) {
  OscillatorParams p;
  p.m = m;
  p.a = a;
  p.harmonic = true;
  p.J = 0.0;
  p.d = 1;
  return p;
}

OscillatorParams deep_double_well(double beta) {
  OscillatorParams p;
  p.m = 1.0;
  p.a = 1.0;
  p.b1 = 3.0;
  p.b2 = 0.5;
  p.J = 0.5;
  p.d = 3;
  p.beta = beta;
  return p;
}

ChainSetup setup_for(const OscillatorParams& params, std::vector<int> extents, BoundaryCondition boundary,
                     int slices, ChainSettings settings) {
  LoopConfiguration initial(Box(std::move(extents)), params.beta, slices, boundary);
  for (double& v : initial.values()) v = boundary.value();
  return ChainSetup{std::move(initial), params, build_factory(params, slices), settings, 1, 1};
}

// Lag-averaged products (1/P) sum_j w_j w_{j+lag} of one site, lag = 0..P-1.
Observer lag_covariance_observer(std::size_t site, int slices) {
  Observer o;
  o.name = "lag_covariance";
  o.dimension = slices;
  o.bounded = false;
  o.measure = [site, slices](const LoopConfiguration& c, std::span<double> out) {
    const auto w = c.loop(site);
    for (int lag = 0; lag < slices; ++lag) {
      double s = 0.0;
      for (int j = 0; j < slices; ++j) s += w[j] * w[(j + lag) % slices];
      out[lag] = s / slices;
    }
  };
  return o;
}

Outcome harmonic_spectrum(double& seconds) {
  Outcome out;
  const auto start = Clock::now();
  SpectrumOptions opt;
  opt.levels = 10;
  opt.points = 8000;
  const auto solved = single_site_spectrum(harmonic(1.0, 4.0), opt);
  seconds = std::chrono::duration<double>(Clock::now() - start).count();
  double worst = 0.0;
  for (int n = 0; n < 10; ++n)
    worst = std::max(worst, std::abs(solved.spectrum.eigenvalues[n] - (n + 0.5) * 2.0));
  out.detail << "N = 8000, max |E_n - (n+1/2) 2| = " << fmt("%.3e", worst) << ", " << fmt("%.2f", seconds) << " s; ";
  out.require(worst < 1e-4, "eigenvalue error >= 1e-4");
  out.require(seconds < 5.0, "runtime >= 5 s");
  return out;
}

Outcome rigidity_identities() {
  Outcome out;
  double worst = 0.0;
  for (double m : {0.1, 1.0, 10.0}) {
    const auto s = single_site_spectrum(harmonic(m, 1.0)).spectrum;
    worst = std::max(worst, std::abs(s.rigidity - 1.0));
  }
  out.detail << "harmonic max |R_m - a| = " << fmt("%.2e", worst) << "; ";
  out.require(worst < 4e-4, "harmonic R_m differs from a by >= 4e-4");

  int sets = 0, violations = 0;
  double tightest = 0.0;
  for (double m : {0.5, 1.0, 2.0})
    for (double b1 : {1.0, 2.0, 3.0})
      for (double b2 : {0.5, 1.0, 2.0}) {
        OscillatorParams p;
        p.m = m;
        p.a = 1.0;
        p.b1 = b1;
        p.b2 = b2;
        const double v = p.upsilon();
        const double bound = 1.0 / (4.0 * m * v * v);
        const double r = single_site_spectrum(p).spectrum.rigidity;
        ++sets;
        tightest = std::max(tightest, r / bound);
        if (!(r <= bound)) ++violations;
      }
  out.detail << sets << " double-well sets, " << violations << " violations of R_m <= 1/(4 m v^2), max ratio "
             << fmt("%.3f", tightest) << "; ";
  out.require(sets >= 20 && violations == 0, "rigidity bound violated");
  return out;
}

Outcome small_mass_law(double& seconds) {
  Outcome out;
  const auto start = Clock::now();
  OscillatorParams p;
  p.a = 1.0;
  p.b1 = 1.0;
  p.b2 = 1.0;
  std::vector<double> masses;
  for (int i = 0; i <= 6; ++i) masses.push_back(1e-2 * std::pow(10.0, -i / 6.0));
  const auto scan = rigidity_mass_scan(p, masses);
  seconds = std::chrono::duration<double>(Clock::now() - start).count();
  const double slope = scan.small_mass_slope.value_or(NAN);
  out.detail << "slope over m in [1e-3, 1e-2] = " << fmt("%.4f", slope) << ", " << fmt("%.2f", seconds) << " s; ";
  out.require(slope >= -0.38 && slope <= -0.28, "slope outside [-0.38, -0.28]");
  out.require(seconds < 60.0, "runtime >= 60 s");
  return out;
}

Outcome theta_values() {
  Outcome out;
  const auto grid3 = theta_grid(3, 64);
  const auto bessel3 = theta_bessel(3);
  const double t4 = theta_of_d(4).theta;
  const double t6 = theta_of_d(6).theta;
  const double diff = std::abs(grid3.theta - bessel3.theta);
  out.detail << "theta(3) grid " << fmt("%.7f", grid3.theta) << " vs Bessel " << fmt("%.7f", bessel3.theta)
             << " (|diff| " << fmt("%.1e", diff) << "), theta(4) " << fmt("%.6f", t4) << ", theta(6) "
             << fmt("%.6f", t6) << "; ";
  out.require(diff < 1e-4, "grid and Bessel theta(3) differ by >= 1e-4");
  out.require(grid3.theta > t4 && t4 > t6 && t6 > 1.0, "theta(3) > theta(4) > theta(6) > 1 fails");
  return out;
}

Outcome inversion() {
  Outcome out;
  std::mt19937_64 rng(20261018);
  std::uniform_real_distribution<double> uni(0.0, 0.999);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double u = uni(rng);
    worst = std::max(worst, std::abs(u_of_t(t_of_u(u)) - u));
  }
  out.detail << "round trip max error " << fmt("%.1e", worst) << "; ";
  out.require(worst < 1e-10, "u(t(u)) != u to 1e-10");

  std::map<int, LatticeDispersion> theta;
  for (int d : {3, 4, 5}) theta[d] = theta_of_d(d);
  double worst_residual = 0.0;
  int admissible = 0;
  for (int i = 0; admissible < 20; ++i) {
    OscillatorParams p;
    p.m = 0.5 + 0.1 * i;
    p.a = 1.0;
    p.b1 = 1.5 + 0.25 * (i % 5);
    p.b2 = 0.5;
    p.d = 3 + i % 3;
    p.J = 0.2 + 0.15 * (i % 7);
    const auto& disp = theta.at(p.d);
    const double v = p.upsilon();
    if (!(4.0 * p.m * v * v * p.j_hat() > disp.theta)) continue;
    ++admissible;
    worst_residual = std::max(worst_residual, beta_star_residual(p, disp, solve_beta_star(p, disp)));
  }
  out.detail << "beta* max relative residual " << fmt("%.1e", worst_residual) << " on " << admissible << " sets; ";
  out.require(worst_residual < 1e-9, "beta* residual >= 1e-9");

  OscillatorParams p;
  p.b1 = 2.0;
  p.b2 = 0.5;
  double previous = INFINITY;
  bool decreasing = true;
  for (double j : {0.3, 0.5, 0.8, 1.3, 2.0, 3.5, 6.0}) {
    p.J = j;
    const double beta = solve_beta_star(p, theta.at(3));
    decreasing = decreasing && beta < previous;
    previous = beta;
  }
  out.detail << "beta* " << (decreasing ? "strictly decreasing" : "NOT decreasing") << " over 7 Jhat values; ";
  out.require(decreasing, "beta* not strictly decreasing in Jhat");
  return out;
}

Outcome classification_exclusivity() {
  Outcome out;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::map<int, LatticeDispersion> theta;
  for (int d : {3, 4, 5}) theta[d] = theta_of_d(d);
  int counts[3] = {0, 0, 0}, both = 0, chain_violations = 0;
  for (int i = 0; i < 200; ++i) {
    OscillatorParams p;
    p.m = std::pow(10.0, -1.0 + 1.5 * uni(rng));
    p.a = 0.5 + 1.5 * uni(rng);
    p.b1 = p.a * (0.55 + 2.0 * uni(rng));
    p.b2 = 0.2 + 1.8 * uni(rng);
    p.J = std::pow(10.0, -3.0 + 3.0 * uni(rng));
    p.d = 3 + static_cast<int>(3 * uni(rng)) % 3;
    try {
      const double rigidity = single_site_spectrum(p).spectrum.rigidity;
      const auto c = classify_phase(p, rigidity, theta.at(p.d));
      ++counts[static_cast<int>(c.verdict)];
      if (c.verdict == Verdict::stabilized_all_beta && !(c.values.transition_lhs < 1.0 + 1e-9)) ++chain_violations;
    } catch (const NumericalError& e) {
      ++both;
    }
  }
  out.detail << "200 sets: " << counts[0] << " stabilized, " << counts[1] << " transition, " << counts[2]
             << " undetermined, " << both << " contradictory; ";
  out.require(both == 0, "a set met both the stabilized and the transition hypotheses");
  out.require(chain_violations == 0, "stabilized verdict with 4 m v^2 Jhat >= 1");
  return out;
}

Outcome exact_gaussian_sampler(double& seconds) {
  Outcome out;
  const auto start = Clock::now();
  const int p = 32, n = 10000;
  const auto factory = build_factory(2.0, 1.0, 1.0, p);
  std::mt19937_64 rng(11);
  std::vector<double> sum(p, 0.0), sum_sq(p, 0.0);
  for (int s = 0; s < n; ++s) {
    const auto loop = sample_loop(factory, rng);
    for (int lag = 0; lag < p; ++lag) {
      double c = 0.0;
      for (int j = 0; j < p; ++j) c += loop.values[j] * loop.values[(j + lag) % p];
      c /= p;
      sum[lag] += c;
      sum_sq[lag] += c * c;
    }
  }
  seconds = std::chrono::duration<double>(Clock::now() - start).count();
  double worst = 0.0;
  for (int lag = 0; lag < p; ++lag) {
    const double mean = sum[lag] / n;
    const double se = std::sqrt((sum_sq[lag] / n - mean * mean) / (n - 1));
    worst = std::max(worst, std::abs(mean - propagator(2.0, 1.0, 1.0, 0.0, 2.0 * lag / p)) / se);
  }
  out.detail << "max |cov - S|/SE over 32 lags = " << fmt("%.2f", worst) << ", " << fmt("%.2f", seconds) << " s; ";
  out.require(worst < 4.0, "covariance outside 4 SE");
  out.require(seconds < 10.0, "runtime >= 10 s");
  return out;
}

Outcome sampler_vs_quadrature(double& seconds) {
  Outcome out;
  const auto start = Clock::now();
  OscillatorParams p;
  p.m = 1.0;
  p.a = 1.0;
  p.b1 = 1.5;
  p.b2 = 0.5;
  p.J = 0.5;
  p.d = 1;
  p.beta = 2.0;
  const auto exact = oracle::single_site_moments(p, 3, 120);
  ChainSettings settings;
  settings.sweeps = 400000;
  settings.burn_in = 2000;
  settings.seed = 3;
  auto setup = setup_for(p, {1}, {}, 3, settings);
  Observer moments;
  moments.name = "moments";
  moments.dimension = 2;
  moments.bounded = false;
  moments.measure = [](const LoopConfiguration& c, std::span<double> o) {
    const double w = c.loop(0)[0];
    o[0] = w * w;
    o[1] = w * w * w * w;
  };
  const auto report = run_chains(setup, std::span(&moments, 1)).reports.front();
  seconds = std::chrono::duration<double>(Clock::now() - start).count();
  const double z2 = std::abs(report.value[0] - exact[1]) / report.std_error[0];
  const double z4 = std::abs(report.value[1] - exact[3]) / report.std_error[1];
  out.detail << "<w^2> " << fmt("%.5f", report.value[0]) << " vs " << fmt("%.5f", exact[1]) << " (" << fmt("%.2f", z2)
             << " SE), <w^4> " << fmt("%.5f", report.value[1]) << " vs " << fmt("%.5f", exact[3]) << " ("
             << fmt("%.2f", z4) << " SE), " << fmt("%.2f", seconds) << " s; ";
  out.require(z2 < 4.0 && z4 < 4.0, "moment outside 4 SE");
  out.require(seconds < 60.0, "runtime >= 60 s");
  return out;
}

Outcome harmonic_chain() {
  Outcome out;
  OscillatorParams p = harmonic(1.0, 1.0);
  p.beta = 2.0;
  const int slices = 16;
  ChainSettings settings;
  settings.sweeps = 20000;
  settings.burn_in = 500;
  settings.seed = 5;
  auto setup = setup_for(p, {1}, {}, slices, settings);
  const Observer o = lag_covariance_observer(0, slices);
  const auto result = run_chains(setup, std::span(&o, 1));
  const auto& r = result.reports.front();
  double worst = 0.0;
  for (int lag = 0; lag < slices; ++lag)
    worst = std::max(worst, std::abs(r.value[lag] - propagator(2.0, 1.0, 1.0, 0.0, 2.0 * lag / slices)) / r.std_error[lag]);
  const auto& acc = result.acceptance;
  out.detail << "max |cov - S|/SE over 16 lags = " << fmt("%.2f", worst) << ", redraw acceptance "
             << acc.accepted[0] << "/" << acc.attempted[0] << "; ";
  out.require(worst < 4.0, "chain two-point function outside 4 SE");
  out.require(acc.attempted[0] > 0 && acc.accepted[0] == acc.attempted[0], "redraw acceptance != 1");
  return out;
}

Outcome symmetry_suite() {
  Outcome out;
  OscillatorParams p;
  p.m = 1.0;
  p.a = 1.0;
  p.b1 = 1.0;
  p.b2 = 1.0;
  p.J = 0.1;
  p.d = 3;
  p.beta = 2.0;
  const int slices = default_slices(p.beta, p.m, p.a);
  ChainSettings settings;
  settings.sweeps = 20000;
  settings.burn_in = 500;
  settings.seed = 17;

  // Free boundary: M = 0 and tau-shift invariance from one chain.
  auto free_setup = setup_for(p, {2, 2, 2}, {}, slices, settings);
  const double dt = p.beta / slices;
  const Observer observers[] = {
      order_parameter_observer(free_setup.initial, 0),
      matsubara_observer(free_setup.initial, {{TestFunction::clip(default_clip_level(p)), 0, 0.0},
                                              {TestFunction::clip(default_clip_level(p)), 1, 3 * dt}}),
      matsubara_observer(free_setup.initial, {{TestFunction::clip(default_clip_level(p)), 0, 5 * dt},
                                              {TestFunction::clip(default_clip_level(p)), 1, 8 * dt}}),
  };
  const auto free_run = run_chains(free_setup, observers);
  const auto& m_free = free_run.reports[0];
  const double z_free = std::abs(m_free.scalar()) / m_free.scalar_error();
  const auto& g0 = free_run.reports[1];
  const auto& g5 = free_run.reports[2];
  const double combined = std::hypot(g0.scalar_error(), g5.scalar_error());
  const double shift_gap = std::abs(g0.scalar() - g5.scalar());
  out.detail << "free M_hat " << fmt("%.4f", m_free.scalar()) << " (" << fmt("%.2f", z_free) << " SE); ";
  out.require(z_free < 4.0, "free-boundary M_hat outside 4 SE of 0");
  out.detail << "tau-shift Gamma " << fmt("%.5f", g0.scalar()) << " vs " << fmt("%.5f", g5.scalar()) << " ("
             << fmt("%.2f", shift_gap / combined) << " combined SE); ";
  out.require(shift_gap <= 2.0 * combined, "tau-shift estimates differ by > 2 combined SE");

  // Mirrored clamped runs.
  BoundaryCondition plus{BoundaryKind::plus_clamped, default_clamp_level(p)};
  settings.sweeps = 5000;
  auto plus_setup = setup_for(p, {2, 2, 2}, plus, slices, settings);
  const auto m_plus = order_parameter(plus_setup, 0);
  const auto m_minus = order_parameter(mirror(plus_setup), 0);
  out.detail << "clamped M_hat +" << fmt("%.5f", m_plus.scalar()) << " / " << fmt("%.5f", m_minus.scalar()) << "; ";
  out.require(m_minus.scalar() == -m_plus.scalar(), "mirrored M_hat not exactly opposite");
  return out;
}

Outcome gks_sign_audit(double& seconds) {
  Outcome out;
  const auto start = Clock::now();
  const OscillatorParams p = deep_double_well(4.0);
  const int slices = default_slices(p.beta, p.m, p.a);
  ChainSettings settings;
  settings.sweeps = 10000;
  settings.burn_in = 1000;
  settings.seed = 23;
  BoundaryCondition plus{BoundaryKind::plus_clamped, default_clamp_level(p)};
  auto setup = setup_for(p, {3, 3, 3}, plus, slices, settings);
  const auto clip = TestFunction::clip(default_clip_level(p));
  const Box& box = setup.initial.box();
  const std::array<int, 3> centre{1, 1, 1}, side{1, 1, 2}, corner{0, 0, 0};
  const std::array<MatsubaraFactor, 3> factors{{{clip, box.index(centre), 0.0},
                                                {clip, box.index(side), p.beta / 4},
                                                {clip, box.index(corner), p.beta / 2}}};
  const auto audit = gks_audit(setup, factors);
  seconds = std::chrono::duration<double>(Clock::now() - start).count();
  out.detail << "Gamma+ " << fmt("%.4f", audit.plus.scalar()) << " +- " << fmt("%.4f", audit.plus.scalar_error())
             << ", Gamma- " << fmt("%.4f", audit.minus.scalar()) << ", " << fmt("%.1f", seconds) << " s; ";
  out.require(audit.plus_nonnegative, "plus estimate below -2 SE");
  out.require(audit.minus_nonpositive, "minus estimate above +2 SE");
  out.require(seconds < 300.0, "runtime >= 5 min");
  return out;
}

Outcome symmetry_breaking_trend() {
  Outcome out;
  std::vector<double> values;
  for (double beta : {1.0, 2.0, 4.0, 8.0}) {
    const OscillatorParams p = deep_double_well(beta);
    const int slices = default_slices(p.beta, p.m, p.a);
    ChainSettings settings;
    settings.sweeps = 3000;
    settings.burn_in = 500;
    settings.seed = 29;
    BoundaryCondition plus{BoundaryKind::plus_clamped, default_clamp_level(p)};
    auto setup = setup_for(p, {4, 4, 4}, plus, slices, settings);
    const std::array<int, 3> centre{1, 1, 1};
    const auto m = order_parameter(setup, setup.initial.box().index(centre));
    values.push_back(m.scalar());
    out.detail << "beta " << beta << ": M_hat+ " << fmt("%.4f", m.scalar()) << " +- " << fmt("%.4f", m.scalar_error())
               << "; ";
  }
  bool increasing = true;
  for (std::size_t i = 1; i < values.size(); ++i) increasing = increasing && values[i] > values[i - 1];
  out.detail << (increasing ? "increasing" : "not monotone") << " (diagnostic only)";
  out.passed = increasing;
  return out;
}

}  // namespace

std::string format_line(const CriterionResult& r) {
  std::string tag = r.gating ? (r.passed ? "[PASS]" : "[FAIL]") : (r.passed ? "[INFO]" : "[INFO]");
  char head[128];
  std::snprintf(head, sizeof head, "%s %2d %-34s (%.2f s) ", tag.c_str(), r.id, r.title.c_str(), r.seconds);
  return head + r.detail;
}

std::vector<CriterionResult> run_acceptance(std::ostream* progress) {
  std::vector<CriterionResult> results;
  auto run = [&](int id, std::string title, bool gating, const std::function<Outcome(double&)>& body) {
    CriterionResult r;
    r.id = id;
    r.title = std::move(title);
    r.gating = gating;
    const auto start = Clock::now();
    try {
      double timed = 0.0;
      Outcome o = body(timed);
      r.passed = o.passed;
      r.detail = o.detail.str();
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    if (progress) *progress << format_line(r) << std::endl;
    results.push_back(std::move(r));
  };
  auto untimed = [](Outcome (*f)()) { return [f](double&) { return f(); }; };

  run(1, "harmonic spectrum", true, harmonic_spectrum);
  run(2, "rigidity identities", true, untimed(rigidity_identities));
  run(3, "small-mass law", true, small_mass_law);
  run(4, "theta(d)", true, untimed(theta_values));
  run(5, "t/u inversion and beta*", true, untimed(inversion));
  run(6, "classification exclusivity", true, untimed(classification_exclusivity));
  run(7, "exact Gaussian sampler", true, exact_gaussian_sampler);
  run(8, "sampler vs quadrature", true, sampler_vs_quadrature);
  run(9, "PIMC harmonic reproduction", true, untimed(harmonic_chain));
  run(10, "symmetry suite", true, untimed(symmetry_suite));
  run(11, "GKS sign audit", true, gks_sign_audit);
  run(12, "symmetry-breaking trend", false, untimed(symmetry_breaking_trend));
  return results;
}

bool all_gating_passed(const std::vector<CriterionResult>& results) {
  for (const auto& r : results)
    if (r.gating && !r.passed) return false;
  return true;
}

}  // namespace qac
