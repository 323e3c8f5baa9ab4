#include "qac/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <istream>
#include <ostream>
#include <sstream>

#include "qac/errors.hpp"
#include "qac/hash.hpp"
#include "qac/loop_io.hpp"
#include "qac/simd/kernels.hpp"

namespace qac {

void ChainSettings::validate() const {
  if (sweeps < 1) throw ConfigError("chain.sweeps must be >= 1");
  if (burn_in < 0) throw ConfigError("chain.burn_in must be >= 0");
  if (thinning < 1) throw ConfigError("chain.thinning must be >= 1");
  if (batches < 2) throw ConfigError("chain.batches must be >= 2");
  for (double p : {mix.redraw, mix.nudge, mix.flip})
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("chain proposal probabilities must lie in [0, 1]");
  if (std::abs(mix.redraw + mix.nudge + mix.flip - 1.0) > 1e-12)
    throw ConfigError("chain proposal probabilities must sum to 1");
  if (!(nudge_scale >= 0.0) || !std::isfinite(nudge_scale))
    throw ConfigError("chain.nudge_scale must be >= 0");
}

std::string ChainSettings::digest() const {
  std::ostringstream s;
  s << "sweeps=" << sweeps << ";burn_in=" << burn_in << ";thinning=" << thinning << ";seed=" << seed
    << ";mix=" << hexfloat(mix.redraw) << ',' << hexfloat(mix.nudge) << ',' << hexfloat(mix.flip)
    << ";nudge_scale=" << hexfloat(nudge_scale) << ";batches=" << batches << ";mirrored=" << mirrored;
  return hex64(fnv1a64(s.str()));
}

double AcceptanceCounts::rate(Proposal p) const {
  const auto i = static_cast<int>(p);
  return attempted[i] ? static_cast<double>(accepted[i]) / attempted[i] : 0.0;
}

AcceptanceCounts& AcceptanceCounts::operator+=(const AcceptanceCounts& other) {
  for (int i = 0; i < 3; ++i) {
    attempted[i] += other.attempted[i];
    accepted[i] += other.accepted[i];
  }
  return *this;
}

EstimateReport merge(const EstimateReport& a, const EstimateReport& b) {
  if (a.n_samples == 0) return b;
  if (b.n_samples == 0) return a;
  if (a.value.size() != b.value.size()) throw ConfigError("cannot merge reports of different shape");
  EstimateReport out = a;
  const double na = static_cast<double>(a.n_samples), nb = static_cast<double>(b.n_samples);
  const double n = na + nb;
  for (std::size_t i = 0; i < a.value.size(); ++i) {
    out.value[i] = (na * a.value[i] + nb * b.value[i]) / n;
    out.std_error[i] = std::sqrt(na * na * a.std_error[i] * a.std_error[i] +
                                 nb * nb * b.std_error[i] * b.std_error[i]) / n;
  }
  out.n_samples = a.n_samples + b.n_samples;
  out.acceptance += b.acceptance;
  out.bounded = a.bounded && b.bounded;
  return out;
}

void batch_means(std::span<const double> series, std::size_t dimension, int batches,
                 std::vector<double>& mean, std::vector<double>& std_error) {
  const std::size_t n = dimension ? series.size() / dimension : 0;
  mean.assign(dimension, 0.0);
  std_error.assign(dimension, 0.0);
  if (n == 0) return;
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t i = 0; i < dimension; ++i) mean[i] += series[s * dimension + i];
  for (double& m : mean) m /= static_cast<double>(n);

  const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(batches), n);
  if (count < 2) return;
  const std::size_t size = n / count;
  std::vector<double> batch(dimension);
  std::vector<double> grand(dimension, 0.0), sq(dimension, 0.0);
  std::vector<double> batch_values(count * dimension);
  for (std::size_t b = 0; b < count; ++b) {
    std::fill(batch.begin(), batch.end(), 0.0);
    for (std::size_t s = b * size; s < (b + 1) * size; ++s)
      for (std::size_t i = 0; i < dimension; ++i) batch[i] += series[s * dimension + i];
    for (std::size_t i = 0; i < dimension; ++i) {
      batch_values[b * dimension + i] = batch[i] / size;
      grand[i] += batch[i] / size;
    }
  }
  for (double& g : grand) g /= count;
  for (std::size_t b = 0; b < count; ++b)
    for (std::size_t i = 0; i < dimension; ++i) {
      const double dv = batch_values[b * dimension + i] - grand[i];
      sq[i] += dv * dv;
    }
  for (std::size_t i = 0; i < dimension; ++i)
    std_error[i] = std::sqrt(sq[i] / ((count - 1.0) * count));
}

MetropolisChain::MetropolisChain(LoopConfiguration initial, OscillatorParams params,
                                 const GaussianLoopFactory& factory, ChainSettings settings)
    : state_(std::move(initial)),
      params_(params),
      factory_(&factory),
      settings_(settings),
      rng_(settings.seed) {
  params_.validate();
  settings_.validate();
  if (state_.beta() != params_.beta || factory.beta() != params_.beta)
    throw ConfigError("chain inputs disagree on beta");
  if (state_.slices() != factory.slices()) throw ConfigError("chain inputs disagree on the slice count P");
  if (factory.m() != params_.m || factory.a() != params_.a)
    throw ConfigError("Gaussian factory was built for different (m, a)");
  if (state_.box().rank() != params_.d)
    throw ConfigError("volume rank does not match model.d");
  nudge_scale_ = settings_.nudge_scale > 0.0 ? settings_.nudge_scale : factory.conditional_std();
  dtau_ = params_.beta / state_.slices();
  neighbours_.resize(state_.sites());
  exterior_.resize(state_.sites());
  for (std::size_t s = 0; s < state_.sites(); ++s) {
    neighbours_[s] = state_.box().neighbours(s);
    exterior_[s] = state_.box().exterior_neighbours(s);
  }
  field_.resize(state_.slices());
  proposal_.resize(state_.slices());
  normals_.resize(state_.slices());
}

double MetropolisChain::normal() {
  const double z = normal_(rng_);
  return settings_.mirrored ? -z : z;
}

double MetropolisChain::uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

double MetropolisChain::potential_sum(std::span<const double> loop) const {
  if (params_.harmonic) return 0.0;
  return simd::kernels().quartic_sum(loop.data(), loop.size(), params_.b1, params_.b2);
}

void MetropolisChain::field_for(std::size_t site) {
  const double exterior = exterior_[site] * state_.boundary().value();
  std::fill(field_.begin(), field_.end(), exterior);
  for (std::size_t n : neighbours_[site]) {
    const auto other = state_.loop(n);
    for (std::size_t k = 0; k < field_.size(); ++k) field_[k] += other[k];
  }
}

void MetropolisChain::sweep() {
  for (std::size_t site = 0; site < state_.sites(); ++site) {
    const double u = uniform();
    if (u < settings_.mix.redraw)
      redraw(site);
    else if (u < settings_.mix.redraw + settings_.mix.nudge)
      nudge(site);
    else
      flip(site);
  }
  ++sweeps_done_;
}

namespace {

// Metropolis test for an increase `delta_energy` of the target exponent.
bool accept(double delta_energy, double u) { return delta_energy <= 0.0 || u < std::exp(-delta_energy); }

}  // namespace

void MetropolisChain::redraw(std::size_t site) {
  // Independence proposal from the Gaussian reference measure: its density
  // cancels against the Gaussian factor of the target, leaving only I.
  for (double& z : normals_) z = normal();
  factory_->synthesize(normals_, proposal_);
  field_for(site);
  const auto current = state_.loop(site);
  const auto& k = simd::kernels();
  const std::size_t p = proposal_.size();
  const double bond = k.dot(proposal_.data(), field_.data(), p) - k.dot(current.data(), field_.data(), p);
  const double delta = dtau_ * (potential_sum(proposal_) - potential_sum(current) - params_.J * bond);
  auto& c = counts_;
  ++c.attempted[0];
  if (accept(delta, uniform())) {
    ++c.accepted[0];
    std::copy(proposal_.begin(), proposal_.end(), current.begin());
  }
}

double MetropolisChain::nudge_energy_change(std::size_t site, int k, double delta) const {
  const auto w = state_.loop(site);
  const double gaussian = delta * factory_->inverse_apply(w, k) + 0.5 * delta * delta * factory_->inverse_row()[0];
  double field = exterior_[site] * state_.boundary().value();
  for (std::size_t n : neighbours_[site]) field += state_.loop(n)[k];
  const double x = w[k], y = x + delta;
  const double dv = params_.potential(y) - params_.potential(x);
  return gaussian + dtau_ * (dv - params_.J * delta * field);
}

void MetropolisChain::nudge(std::size_t site) {
  field_for(site);
  const auto w = state_.loop(site);
  const double c00 = factory_->inverse_row()[0];
  for (int k = 0; k < state_.slices(); ++k) {
    const double delta = nudge_scale_ * normal();
    const double gaussian = delta * factory_->inverse_apply(w, k) + 0.5 * delta * delta * c00;
    const double x = w[k], y = x + delta;
    const double dv = params_.potential(y) - params_.potential(x);
    const double energy = gaussian + dtau_ * (dv - params_.J * delta * field_[k]);
    ++counts_.attempted[1];
    if (accept(energy, uniform())) {
      ++counts_.accepted[1];
      w[k] = y;
    }
  }
}

double MetropolisChain::flip_energy_change(std::size_t site) const {
  // Gaussian part and V are even; only the bonds change sign.
  const auto w = state_.loop(site);
  double bond = 0.0;
  const double exterior = exterior_[site] * state_.boundary().value();
  for (int k = 0; k < state_.slices(); ++k) {
    double field = exterior;
    for (std::size_t n : neighbours_[site]) field += state_.loop(n)[k];
    bond += w[k] * field;
  }
  return 2.0 * dtau_ * params_.J * bond;
}

void MetropolisChain::flip(std::size_t site) {
  field_for(site);
  const auto w = state_.loop(site);
  const double energy = 2.0 * dtau_ * params_.J * simd::kernels().dot(w.data(), field_.data(), w.size());
  ++counts_.attempted[2];
  if (accept(energy, uniform())) {
    ++counts_.accepted[2];
    for (double& v : w) v = -v;
  }
}

void MetropolisChain::save_checkpoint(std::ostream& out) const {
  write_configuration(out, state_);
  out << "rng " << rng_ << '\n';
  out << "normal " << normal_ << '\n';
  out << "sweeps_done " << sweeps_done_ << '\n';
  out << "counts";
  for (int i = 0; i < 3; ++i) out << ' ' << counts_.attempted[i] << ' ' << counts_.accepted[i];
  out << '\n';
}

MetropolisChain MetropolisChain::load_checkpoint(std::istream& in, OscillatorParams params,
                                                 const GaussianLoopFactory& factory, ChainSettings settings) {
  LoopConfiguration config = read_configuration(in);
  MetropolisChain chain(std::move(config), params, factory, settings);
  std::string key;
  auto expect = [&](const char* want) {
    if (!(in >> key) || key != want) throw ConfigError(std::string("checkpoint: expected '") + want + "'");
  };
  expect("rng");
  in >> chain.rng_;
  expect("normal");
  in >> chain.normal_;
  expect("sweeps_done");
  in >> chain.sweeps_done_;
  expect("counts");
  for (int i = 0; i < 3; ++i) in >> chain.counts_.attempted[i] >> chain.counts_.accepted[i];
  if (!in) throw ConfigError("checkpoint: malformed RNG or counter state");
  return chain;
}

ChainSetup mirror(const ChainSetup& setup) {
  ChainSetup out = setup;
  out.initial = setup.initial.mirrored();
  out.settings.mirrored = !setup.settings.mirrored;
  return out;
}

std::uint64_t chain_seed(std::uint64_t master, int index) {
  std::uint64_t z = master + (static_cast<std::uint64_t>(index) + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

ChainResult metropolis_chain(const LoopConfiguration& initial, const OscillatorParams& params,
                             const GaussianLoopFactory& factory, const ChainSettings& settings,
                             std::span<const Observer> observers) {
  MetropolisChain chain(initial, params, factory, settings);
  for (std::int64_t s = 0; s < settings.burn_in; ++s) chain.sweep();
  const AcceptanceCounts after_burn_in = chain.acceptance();

  std::vector<std::vector<double>> series(observers.size());
  const std::int64_t samples = settings.sweeps / settings.thinning;
  for (std::size_t o = 0; o < observers.size(); ++o)
    series[o].reserve(static_cast<std::size_t>(samples) * observers[o].dimension);
  std::vector<double> scratch;
  for (std::int64_t s = 1; s <= settings.sweeps; ++s) {
    chain.sweep();
    if (s % settings.thinning != 0) continue;
    for (std::size_t o = 0; o < observers.size(); ++o) {
      scratch.assign(observers[o].dimension, 0.0);
      observers[o].measure(chain.state(), scratch);
      series[o].insert(series[o].end(), scratch.begin(), scratch.end());
    }
  }

  ChainResult result;
  result.acceptance = chain.acceptance();
  AcceptanceCounts recorded = chain.acceptance();
  for (int i = 0; i < 3; ++i) {
    recorded.attempted[i] -= after_burn_in.attempted[i];
    recorded.accepted[i] -= after_burn_in.accepted[i];
  }
  const std::string digest = settings.digest();
  for (std::size_t o = 0; o < observers.size(); ++o) {
    EstimateReport r;
    r.name = observers[o].name;
    r.n_samples = samples;
    r.acceptance = recorded;
    r.settings_digest = digest;
    r.bounded = observers[o].bounded;
    batch_means(series[o], observers[o].dimension, settings.batches, r.value, r.std_error);
    result.reports.push_back(std::move(r));
  }
  result.final_states.push_back(chain.state());
  return result;
}

ChainResult run_chains(const ChainSetup& setup, std::span<const Observer> observers) {
  if (setup.chains < 1) throw ConfigError("chain count must be >= 1");
  std::vector<ChainResult> parts(setup.chains);
  const int workers = std::max(1, std::min(setup.threads, setup.chains));
  auto run_one = [&](int index) {
    ChainSettings s = setup.settings;
    s.seed = chain_seed(setup.settings.seed, index);
    return metropolis_chain(setup.initial, setup.params, setup.factory, s, observers);
  };
  for (int start = 0; start < setup.chains; start += workers) {
    std::vector<std::future<ChainResult>> batch;
    const int stop = std::min(setup.chains, start + workers);
    for (int i = start; i < stop; ++i)
      batch.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, run_one, i));
    for (int i = start; i < stop; ++i) parts[i] = batch[i - start].get();
  }

  ChainResult out = std::move(parts[0]);
  for (int i = 1; i < setup.chains; ++i) {
    for (std::size_t o = 0; o < out.reports.size(); ++o) out.reports[o] = merge(out.reports[o], parts[i].reports[o]);
    out.acceptance += parts[i].acceptance;
    out.final_states.push_back(std::move(parts[i].final_states.front()));
  }
  const std::string digest = setup.settings.digest();
  for (auto& r : out.reports) r.settings_digest = digest;
  return out;
}

}  // namespace qac
