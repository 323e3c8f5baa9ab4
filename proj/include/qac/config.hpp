#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qac/gibbs.hpp"
#include "qac/lattice_criteria.hpp"
#include "qac/loops.hpp"
#include "qac/params.hpp"
#include "qac/spectral.hpp"

namespace qac {

// Run configuration file grammar
// ------------------------------
//   file    := { line }
//   line    := blank | comment | section | entry
//   comment := ('#' | ';') text
//   section := '[' name ']'
//   entry   := key '=' value          (inside a section)
//
// Keys are addressed as section.key. Unknown sections or keys, entries
// outside a section and duplicate keys are errors. Values are numbers,
// true/false, words, whitespace separated lists, or `auto` where noted.
//
//   [model]    m a b1 b2 J d beta (required), harmonic = false
//   [grid]     half_width = auto, points = 4000, levels = 8
//   [theta]    method = automatic|grid|bessel, nodes = 64
//   [loops]    slices = auto
//   [volume]   extents = 1 ... 1 (d entries)
//   [boundary] kind = free|plus_clamped|minus_clamped, c = auto
//   [chain]    sweeps = 10000, burn_in = 1000, thinning = 1, seed = 1,
//              redraw = 0.5, nudge = 0.45, flip = 0.05, nudge_scale = auto,
//              batches = 32, chains = 1
//   [scan]     masses = 1 0.5 ... (strictly decreasing)
//   [estimate] sites = 0, times = 0, function = clip|identity|one,
//              clip = auto
struct RunConfig {
  OscillatorParams model;
  SpectrumOptions spectrum;
  ThetaOptions theta;
  std::optional<int> slices;
  std::vector<int> extents;
  BoundaryKind boundary_kind = BoundaryKind::free;
  std::optional<double> boundary_level;
  ChainSettings chain;
  int chains = 1;
  std::vector<double> masses;
  std::vector<std::size_t> estimate_sites{0};
  std::vector<double> estimate_times{0.0};
  std::string estimate_function = "clip";
  std::optional<double> clip_level;

  int resolved_slices() const;
  BoundaryCondition resolved_boundary() const;
  double resolved_clip() const;

  bool operator==(const RunConfig&) const = default;
};

/// Raw `section.key -> (value, line)` view of a configuration text.
struct ConfigEntries {
  std::map<std::string, std::pair<std::string, int>> values;
};

ConfigEntries read_entries(const std::string& text);

/// `assignment` is `section.key=value`; replaces or adds the entry.
void apply_override(ConfigEntries& entries, const std::string& assignment);

/// Validates every field; model keys are mandatory when `require_model`.
RunConfig build_config(const ConfigEntries& entries, bool require_model = true);

RunConfig parse_config(const std::string& text, bool require_model = true);

/// Canonical text with every key spelled out; parse_config inverts it.
std::string serialize_config(const RunConfig& config);

/// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string config_digest(const RunConfig& config);

}  // namespace qac
