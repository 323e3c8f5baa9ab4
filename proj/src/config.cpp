#include "qac/config.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "qac/errors.hpp"
#include "qac/estimators.hpp"
#include "qac/hash.hpp"

namespace qac {

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"model", {"m", "a", "b1", "b2", "J", "d", "beta", "harmonic"}},
      {"grid", {"half_width", "points", "levels"}},
      {"theta", {"method", "nodes"}},
      {"loops", {"slices"}},
      {"volume", {"extents"}},
      {"boundary", {"kind", "c"}},
      {"chain", {"sweeps", "burn_in", "thinning", "seed", "redraw", "nudge", "flip", "nudge_scale", "batches", "chains"}},
      {"scan", {"masses"}},
      {"estimate", {"sites", "times", "function", "clip"}},
  };
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void check_known(const std::string& path, int line) {
  const auto dot = path.find('.');
  const std::string section = path.substr(0, dot);
  const auto it = schema().find(section);
  const std::string where = line > 0 ? "line " + std::to_string(line) + ": " : "";
  if (it == schema().end()) throw ConfigError(where + "unknown section '" + section + "'");
  if (dot == std::string::npos || !it->second.count(path.substr(dot + 1)))
    throw ConfigError(where + "unknown key '" + path + "'");
}

class Reader {
 public:
  explicit Reader(const ConfigEntries& e) : entries_(e) {}

  bool has(const std::string& key) const { return entries_.values.count(key) > 0; }

  std::string raw(const std::string& key) const { return entries_.values.at(key).first; }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const auto it = entries_.values.find(key);
    const std::string where = it != entries_.values.end() && it->second.second > 0
                                  ? "line " + std::to_string(it->second.second) + ": "
                                  : "";
    throw ConfigError(where + key + ": " + what);
  }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return parse_number(key, raw(key));
  }

  double required_number(const std::string& key) const {
    if (!has(key)) throw ConfigError("missing required key '" + key + "'");
    return parse_number(key, raw(key));
  }

  std::optional<double> optional_number(const std::string& key) const {
    if (!has(key) || raw(key) == "auto") return std::nullopt;
    return parse_number(key, raw(key));
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) const {
    if (!has(key)) return fallback;
    return parse_integer(key, raw(key));
  }

  std::int64_t parse_integer(const std::string& key, const std::string& text) const {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(text, &used);
    } catch (const std::exception&) {
      fail(key, "expected an integer, got '" + text + "'");
    }
    if (used != text.size()) fail(key, "expected an integer, got '" + text + "'");
    return v;
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string text = raw(key);
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(text, &used);
    } catch (const std::exception&) {
      fail(key, "expected an unsigned integer, got '" + text + "'");
    }
    if (used != text.size() || text.front() == '-') fail(key, "expected an unsigned integer, got '" + text + "'");
    return v;
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = raw(key);
    if (v == "true") return true;
    if (v == "false") return false;
    fail(key, "expected true or false, got '" + v + "'");
  }

  std::string word(const std::string& key, const std::string& fallback) const {
    return has(key) ? raw(key) : fallback;
  }

  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    std::istringstream in(raw(key));
    std::string w;
    while (in >> w) out.push_back(w);
    if (out.empty()) fail(key, "expected at least one value");
    return out;
  }

  double parse_number(const std::string& key, const std::string& text) const {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      fail(key, "expected a number, got '" + text + "'");
    }
    if (used != text.size() || !std::isfinite(v)) fail(key, "expected a finite number, got '" + text + "'");
    return v;
  }

 private:
  const ConfigEntries& entries_;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string method_name(ThetaMethod m) {
  switch (m) {
    case ThetaMethod::automatic: return "automatic";
    case ThetaMethod::grid: return "grid";
    case ThetaMethod::bessel: return "bessel";
  }
  return "automatic";
}

}  // namespace

ConfigEntries read_entries(const std::string& text) {
  ConfigEntries out;
  std::istringstream in(text);
  std::string line, section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("line " + std::to_string(number) + ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      if (!schema().count(section))
        throw ConfigError("line " + std::to_string(number) + ": unknown section '" + section + "'");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    if (section.empty()) throw ConfigError("line " + std::to_string(number) + ": entry outside any section");
    const std::string key = section + "." + trim(t.substr(0, eq));
    check_known(key, number);
    const std::string value = trim(t.substr(eq + 1));
    if (value.empty()) throw ConfigError("line " + std::to_string(number) + ": " + key + ": empty value");
    if (auto it = out.values.find(key); it != out.values.end())
      throw ConfigError("duplicate key '" + key + "' at lines " + std::to_string(it->second.second) + " and " +
                        std::to_string(number));
    out.values[key] = {value, number};
  }
  return out;
}

void apply_override(ConfigEntries& entries, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' must look like section.key=value");
  const std::string key = trim(assignment.substr(0, eq));
  check_known(key, 0);
  entries.values[key] = {trim(assignment.substr(eq + 1)), 0};
}

RunConfig build_config(const ConfigEntries& entries, bool require_model) {
  Reader r(entries);
  RunConfig c;
  auto& m = c.model;
  m.harmonic = r.boolean("model.harmonic", false);
  if (require_model) {
    m.m = r.required_number("model.m");
    m.a = r.required_number("model.a");
    m.J = r.required_number("model.J");
    m.beta = r.required_number("model.beta");
    if (!r.has("model.d")) throw ConfigError("missing required key 'model.d'");
    m.d = static_cast<int>(r.integer("model.d", 0));
    if (!m.harmonic) {
      m.b1 = r.required_number("model.b1");
      m.b2 = r.required_number("model.b2");
    } else {
      m.b1 = r.number("model.b1", m.b1);
      m.b2 = r.number("model.b2", m.b2);
    }
  } else {
    m.m = r.number("model.m", m.m);
    m.a = r.number("model.a", m.a);
    m.b1 = r.number("model.b1", m.b1);
    m.b2 = r.number("model.b2", m.b2);
    m.J = r.number("model.J", m.J);
    m.d = static_cast<int>(r.integer("model.d", m.d));
    m.beta = r.number("model.beta", m.beta);
  }
  m.validate();

  c.spectrum.half_width = r.optional_number("grid.half_width");
  c.spectrum.points = static_cast<int>(r.integer("grid.points", c.spectrum.points));
  c.spectrum.levels = static_cast<int>(r.integer("grid.levels", c.spectrum.levels));
  if (c.spectrum.half_width) GridSpec{*c.spectrum.half_width, c.spectrum.points}.validate();
  else GridSpec{1.0, c.spectrum.points}.validate();
  if (c.spectrum.levels < 2) r.fail("grid.levels", "must be >= 2");

  const std::string method = r.word("theta.method", "automatic");
  if (method == "automatic") c.theta.method = ThetaMethod::automatic;
  else if (method == "grid") c.theta.method = ThetaMethod::grid;
  else if (method == "bessel") c.theta.method = ThetaMethod::bessel;
  else r.fail("theta.method", "expected automatic, grid or bessel");
  c.theta.coarse_nodes = static_cast<int>(r.integer("theta.nodes", c.theta.coarse_nodes));
  if (c.theta.coarse_nodes < 2 || c.theta.coarse_nodes % 2) r.fail("theta.nodes", "must be an even number >= 2");

  if (r.has("loops.slices") && r.raw("loops.slices") != "auto") {
    c.slices = static_cast<int>(r.integer("loops.slices", 0));
    if (*c.slices < 2) r.fail("loops.slices", "must be >= 2");
  }

  if (r.has("volume.extents")) {
    for (const auto& w : r.list("volume.extents")) c.extents.push_back(static_cast<int>(r.parse_integer("volume.extents", w)));
    if (static_cast<int>(c.extents.size()) != m.d)
      r.fail("volume.extents", "needs model.d = " + std::to_string(m.d) + " entries");
    Box{c.extents};
  }

  c.boundary_kind = parse_boundary_kind(r.word("boundary.kind", "free"));
  c.boundary_level = r.optional_number("boundary.c");
  if (c.boundary_level && !(*c.boundary_level > 0.0)) r.fail("boundary.c", "must be > 0");

  auto& ch = c.chain;
  ch.sweeps = r.integer("chain.sweeps", ch.sweeps);
  ch.burn_in = r.integer("chain.burn_in", ch.burn_in);
  ch.thinning = r.integer("chain.thinning", ch.thinning);
  ch.seed = r.unsigned_integer("chain.seed", ch.seed);
  ch.mix.redraw = r.number("chain.redraw", ch.mix.redraw);
  ch.mix.nudge = r.number("chain.nudge", ch.mix.nudge);
  ch.mix.flip = r.number("chain.flip", ch.mix.flip);
  ch.nudge_scale = r.optional_number("chain.nudge_scale").value_or(0.0);
  ch.batches = static_cast<int>(r.integer("chain.batches", ch.batches));
  ch.validate();
  c.chains = static_cast<int>(r.integer("chain.chains", 1));
  if (c.chains < 1) r.fail("chain.chains", "must be >= 1");

  if (r.has("scan.masses")) {
    for (const auto& w : r.list("scan.masses")) c.masses.push_back(r.parse_number("scan.masses", w));
    for (std::size_t i = 0; i < c.masses.size(); ++i)
      if (!(c.masses[i] > 0.0) || (i > 0 && !(c.masses[i] < c.masses[i - 1])))
        r.fail("scan.masses", "must be positive and strictly decreasing");
  }

  if (r.has("estimate.sites")) {
    c.estimate_sites.clear();
    for (const auto& w : r.list("estimate.sites")) {
      const auto v = r.parse_integer("estimate.sites", w);
      if (v < 0) r.fail("estimate.sites", "site indices must be >= 0");
      c.estimate_sites.push_back(static_cast<std::size_t>(v));
    }
  }
  if (r.has("estimate.times")) {
    c.estimate_times.clear();
    for (const auto& w : r.list("estimate.times")) c.estimate_times.push_back(r.parse_number("estimate.times", w));
  }
  c.estimate_function = r.word("estimate.function", c.estimate_function);
  if (c.estimate_function != "clip" && c.estimate_function != "identity" && c.estimate_function != "one")
    r.fail("estimate.function", "expected clip, identity or one");
  c.clip_level = r.optional_number("estimate.clip");
  if (c.clip_level && !(*c.clip_level > 0.0)) r.fail("estimate.clip", "must be > 0");
  return c;
}

RunConfig parse_config(const std::string& text, bool require_model) {
  return build_config(read_entries(text), require_model);
}

int RunConfig::resolved_slices() const {
  return slices.value_or(default_slices(model.beta, model.m, model.a));
}

BoundaryCondition RunConfig::resolved_boundary() const {
  BoundaryCondition b;
  b.kind = boundary_kind;
  if (boundary_kind != BoundaryKind::free) b.level = boundary_level.value_or(default_clamp_level(model));
  else b.level = boundary_level.value_or(0.0);
  return b;
}

double RunConfig::resolved_clip() const { return clip_level.value_or(default_clip_level(model)); }

std::string serialize_config(const RunConfig& c) {
  std::ostringstream s;
  auto opt = [](const std::optional<double>& v) { return v ? num(*v) : std::string("auto"); };
  const auto& m = c.model;
  s << "[model]\n"
    << "m = " << num(m.m) << "\na = " << num(m.a) << "\nb1 = " << num(m.b1) << "\nb2 = " << num(m.b2)
    << "\nJ = " << num(m.J) << "\nd = " << m.d << "\nbeta = " << num(m.beta)
    << "\nharmonic = " << (m.harmonic ? "true" : "false") << "\n\n";
  s << "[grid]\nhalf_width = " << opt(c.spectrum.half_width) << "\npoints = " << c.spectrum.points
    << "\nlevels = " << c.spectrum.levels << "\n\n";
  s << "[theta]\nmethod = " << method_name(c.theta.method) << "\nnodes = " << c.theta.coarse_nodes << "\n\n";
  s << "[loops]\nslices = " << (c.slices ? std::to_string(*c.slices) : std::string("auto")) << "\n\n";
  if (!c.extents.empty()) {
    s << "[volume]\nextents =";
    for (int e : c.extents) s << ' ' << e;
    s << "\n\n";
  }
  s << "[boundary]\nkind = " << to_string(c.boundary_kind) << "\nc = " << opt(c.boundary_level) << "\n\n";
  const auto& ch = c.chain;
  s << "[chain]\nsweeps = " << ch.sweeps << "\nburn_in = " << ch.burn_in << "\nthinning = " << ch.thinning
    << "\nseed = " << ch.seed << "\nredraw = " << num(ch.mix.redraw) << "\nnudge = " << num(ch.mix.nudge)
    << "\nflip = " << num(ch.mix.flip) << "\nnudge_scale = "
    << (ch.nudge_scale > 0.0 ? num(ch.nudge_scale) : std::string("auto")) << "\nbatches = " << ch.batches
    << "\nchains = " << c.chains << "\n\n";
  if (!c.masses.empty()) {
    s << "[scan]\nmasses =";
    for (double v : c.masses) s << ' ' << num(v);
    s << "\n\n";
  }
  s << "[estimate]\nsites =";
  for (auto v : c.estimate_sites) s << ' ' << v;
  s << "\ntimes =";
  for (double v : c.estimate_times) s << ' ' << num(v);
  s << "\nfunction = " << c.estimate_function << "\nclip = " << opt(c.clip_level) << '\n';
  return s.str();
}

std::string config_digest(const RunConfig& config) { return hex64(fnv1a64(serialize_config(config))); }

}  // namespace qac
