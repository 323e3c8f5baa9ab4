#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qac/loops.hpp"
#include "qac/params.hpp"

namespace qac {

enum class Proposal : int { redraw = 0, nudge = 1, flip = 2 };

struct ProposalMix {
  double redraw = 0.5;
  double nudge = 0.45;
  double flip = 0.05;

  bool operator==(const ProposalMix&) const = default;
};

struct ChainSettings {
  std::int64_t sweeps = 10000;
  std::int64_t burn_in = 1000;  // extra sweeps before the first recorded one
  std::int64_t thinning = 1;
  std::uint64_t seed = 1;
  ProposalMix mix;
  double nudge_scale = 0.0;  // 0 selects the factory's conditional slice std
  int batches = 32;
  // Negate every normal variate. Run from a negated initial state against the
  // mirrored boundary, this reproduces the sign-flipped trajectory exactly.
  bool mirrored = false;

  void validate() const;
  std::string digest() const;

  bool operator==(const ChainSettings&) const = default;
};

struct AcceptanceCounts {
  std::array<std::int64_t, 3> attempted{};
  std::array<std::int64_t, 3> accepted{};

  double rate(Proposal p) const;
  AcceptanceCounts& operator+=(const AcceptanceCounts& other);
};

struct EstimateReport {
  std::string name;
  std::vector<double> value;
  std::vector<double> std_error;  // batch means
  std::int64_t n_samples = 0;
  AcceptanceCounts acceptance;
  std::string settings_digest;
  // False for unbounded observables (e.g. the raw displacement), which sit
  // outside the bounded-test-function representation.
  bool bounded = true;

  double scalar() const { return value.at(0); }
  double scalar_error() const { return std_error.at(0); }
};

/// Pooled estimate of two independent reports. Weighted by n_samples;
/// associative and commutative.
EstimateReport merge(const EstimateReport& a, const EstimateReport& b);

/// Batch-means mean and standard error of a series of `dimension`-vectors
/// stored back to back.
void batch_means(std::span<const double> series, std::size_t dimension, int batches,
                 std::vector<double>& mean, std::vector<double>& std_error);

struct Observer {
  std::string name;
  std::size_t dimension = 1;
  std::function<void(const LoopConfiguration&, std::span<double>)> measure;
  bool bounded = true;
};

/// Metropolis chain on loop configurations targeting
///   exp(-sum_l (1/2) w_l^T C^{-1} w_l - I(w))
/// where C is the factory covariance and I the interaction action.
class MetropolisChain {
 public:
  MetropolisChain(LoopConfiguration initial, OscillatorParams params, const GaussianLoopFactory& factory,
                  ChainSettings settings);

  /// One visit to every site; each visit makes one proposal of a kind drawn
  /// from the mix. A nudge visit walks the site's slices in order, each
  /// slice an independent single-slice proposal.
  void sweep();

  const LoopConfiguration& state() const { return state_; }
  const AcceptanceCounts& acceptance() const { return counts_; }
  const ChainSettings& settings() const { return settings_; }
  double nudge_scale() const { return nudge_scale_; }
  std::int64_t sweeps_done() const { return sweeps_done_; }

  /// Change of the full target exponent (Gaussian part plus action) when
  /// slice `k` of `site` moves by `delta`.
  double nudge_energy_change(std::size_t site, int k, double delta) const;
  /// Change of the full target exponent under sign flip of one site's loop.
  double flip_energy_change(std::size_t site) const;

  /// Configuration, RNG state and counters.
  void save_checkpoint(std::ostream& out) const;
  static MetropolisChain load_checkpoint(std::istream& in, OscillatorParams params,
                                         const GaussianLoopFactory& factory, ChainSettings settings);

 private:
  double normal();
  double uniform();
  void redraw(std::size_t site);
  void nudge(std::size_t site);
  void flip(std::size_t site);
  void field_for(std::size_t site);
  double potential_sum(std::span<const double> loop) const;

  LoopConfiguration state_;
  OscillatorParams params_;
  const GaussianLoopFactory* factory_;
  ChainSettings settings_;
  double nudge_scale_;
  double dtau_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
  AcceptanceCounts counts_;
  std::int64_t sweeps_done_ = 0;
  std::vector<std::vector<std::size_t>> neighbours_;
  std::vector<int> exterior_;
  std::vector<double> field_, proposal_, normals_;
};

/// Everything needed to run (possibly several independent) chains.
struct ChainSetup {
  LoopConfiguration initial;
  OscillatorParams params;
  GaussianLoopFactory factory;
  ChainSettings settings;
  int chains = 1;
  int threads = 1;
};

/// Negated initial state, mirrored boundary, mirrored variates.
ChainSetup mirror(const ChainSetup& setup);

/// Seed of chain `index` derived from the master seed: the splitmix64
/// output for state master + (index + 1) * 0x9E3779B97F4A7C15.
std::uint64_t chain_seed(std::uint64_t master, int index);

struct ChainResult {
  std::vector<EstimateReport> reports;  // one per observer, chains merged
  AcceptanceCounts acceptance;
  std::vector<LoopConfiguration> final_states;
};

/// Runs `setup.chains` independent chains (burn-in, then `sweeps` sweeps,
/// observing every `thinning`-th) on up to `setup.threads` threads.
ChainResult run_chains(const ChainSetup& setup, std::span<const Observer> observers);

/// Single chain with the given settings' seed used verbatim.
ChainResult metropolis_chain(const LoopConfiguration& initial, const OscillatorParams& params,
                             const GaussianLoopFactory& factory, const ChainSettings& settings,
                             std::span<const Observer> observers);

}  // namespace qac
