#include "qac/commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "qac/config.hpp"
#include "qac/errors.hpp"
#include "qac/estimators.hpp"
#include "qac/gibbs.hpp"
#include "qac/lattice_criteria.hpp"
#include "qac/loop_io.hpp"
#include "qac/records.hpp"
#include "qac/spectral.hpp"
#include "qac/verify.hpp"

namespace qac {

namespace {

using json = nlohmann::ordered_json;

struct Common {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string format = "records";
  std::vector<std::string> overrides;
  std::optional<int> d;          // theta only
  std::string state_path;        // sample only
};

struct Emitted {
  json outputs = json::object();
  Table table;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig load(const Common& c, bool require_model) {
  ConfigEntries entries = c.config_path.empty() ? ConfigEntries{} : read_entries(read_file(c.config_path));
  for (const auto& o : c.overrides) apply_override(entries, o);
  if (c.d) apply_override(entries, "model.d=" + std::to_string(*c.d));
  if (c.seed) apply_override(entries, "chain.seed=" + std::to_string(*c.seed));
  return build_config(entries, require_model);
}

json report_json(const EstimateReport& r) {
  json j;
  j["name"] = r.name;
  j["value"] = r.value;
  j["std_error"] = r.std_error;
  j["n_samples"] = r.n_samples;
  j["bounded"] = r.bounded;
  j["acceptance"] = {{"redraw", r.acceptance.rate(Proposal::redraw)},
                     {"nudge", r.acceptance.rate(Proposal::nudge)},
                     {"flip", r.acceptance.rate(Proposal::flip)}};
  j["settings_digest"] = r.settings_digest;
  return j;
}

json params_json(const OscillatorParams& p) {
  return {{"m", p.m}, {"a", p.a}, {"b1", p.b1}, {"b2", p.b2}, {"J", p.J}, {"d", p.d}, {"beta", p.beta},
          {"harmonic", p.harmonic}};
}

ChainSetup chain_setup(const RunConfig& c, int threads) {
  std::vector<int> extents = c.extents.empty() ? std::vector<int>(c.model.d, 1) : c.extents;
  const BoundaryCondition boundary = c.resolved_boundary();
  const int slices = c.resolved_slices();
  LoopConfiguration initial(Box(extents), c.model.beta, slices, boundary);
  for (double& v : initial.values()) v = boundary.value();
  return ChainSetup{std::move(initial), c.model, build_factory(c.model, slices), c.chain, c.chains, threads};
}

TestFunction test_function(const RunConfig& c) {
  if (c.estimate_function == "identity") return TestFunction::identity();
  if (c.estimate_function == "one") return TestFunction::unit();
  return TestFunction::clip(c.resolved_clip());
}

std::vector<MatsubaraFactor> factors(const RunConfig& c, const ChainSetup& setup) {
  if (c.estimate_sites.size() != c.estimate_times.size())
    throw ConfigError("estimate.sites and estimate.times need the same number of entries");
  std::vector<MatsubaraFactor> out;
  const TestFunction f = test_function(c);
  for (std::size_t i = 0; i < c.estimate_sites.size(); ++i) {
    if (c.estimate_sites[i] >= setup.initial.sites())
      throw ConfigError("estimate.sites: site " + std::to_string(c.estimate_sites[i]) + " outside the box");
    out.push_back({f, c.estimate_sites[i], c.estimate_times[i]});
  }
  return out;
}

Emitted spectrum_cmd(const RunConfig& c) {
  const auto s = single_site_spectrum(c.model, c.spectrum);
  Emitted e;
  e.outputs["eigenvalues"] = s.spectrum.eigenvalues;
  e.outputs["gap"] = s.spectrum.gap;
  e.outputs["gap_index"] = s.spectrum.gap_index;
  e.outputs["R_m"] = s.spectrum.rigidity;
  e.outputs["half_width"] = s.grid.half_width;
  e.outputs["points"] = s.grid.points;
  e.outputs["tail_mass"] = s.tail_mass;
  e.outputs["doublings"] = s.doublings;
  e.table.columns = {"n", "E"};
  for (std::size_t n = 0; n < s.spectrum.eigenvalues.size(); ++n)
    e.table.rows.push_back({double(n), s.spectrum.eigenvalues[n]});
  return e;
}

Emitted scan_cmd(const RunConfig& c, int threads) {
  if (c.masses.empty()) throw ConfigError("rigidity-scan needs scan.masses");
  const auto scan = rigidity_mass_scan(c.model, c.masses, c.spectrum, threads);
  Emitted e;
  json pts = json::array();
  e.table.columns = {"m", "gap", "R_m"};
  for (const auto& p : scan.points) {
    pts.push_back({{"m", p.m}, {"gap", p.gap}, {"R_m", p.rigidity}});
    e.table.rows.push_back({p.m, p.gap, p.rigidity});
  }
  e.outputs["points"] = pts;
  e.outputs["small_mass_slope"] = scan.small_mass_slope ? json(*scan.small_mass_slope) : json(nullptr);
  return e;
}

Emitted theta_cmd(const RunConfig& c) {
  const auto t = theta_of_d(c.model.d, c.theta);
  Emitted e;
  e.outputs["d"] = t.d;
  e.outputs["theta"] = t.theta;
  e.outputs["quadrature_error"] = t.quadrature_error;
  e.table.columns = {"d", "theta"};
  e.table.rows.push_back({double(t.d), t.theta});
  return e;
}

Emitted beta_star_cmd(const RunConfig& c) {
  const auto t = theta_of_d(c.model.d, c.theta);
  const double beta = solve_beta_star(c.model, t);
  Emitted e;
  e.outputs["beta_star"] = beta;
  e.outputs["theta"] = t.theta;
  e.outputs["Jhat"] = c.model.j_hat();
  e.outputs["residual"] = beta_star_residual(c.model, t, beta);
  e.table.columns = {"Jhat", "theta", "beta_star"};
  e.table.rows.push_back({c.model.j_hat(), t.theta, beta});
  return e;
}

Emitted classify_cmd(const RunConfig& c) {
  const auto r = classify_phase(c.model, c.spectrum, c.theta);
  Emitted e;
  e.outputs["verdict"] = std::string(to_string(r.verdict));
  e.outputs["Jhat"] = r.values.j_hat;
  e.outputs["R_m"] = r.values.rigidity;
  e.outputs["transition_lhs"] = r.values.transition_lhs;
  e.outputs["theta"] = r.values.theta;
  e.outputs["beta_star"] = r.values.beta_star ? json(*r.values.beta_star) : json(nullptr);
  e.outputs["inputs"] = params_json(r.inputs);
  e.table.columns = {"Jhat", "R_m", "theta", "beta_star"};
  e.table.rows.push_back({r.values.j_hat, r.values.rigidity, r.values.theta, r.values.beta_star.value_or(NAN)});
  return e;
}

Emitted sample_cmd(const RunConfig& c, const Common& common) {
  const ChainSetup setup = chain_setup(c, common.threads);
  const auto result = run_chains(setup, {});
  Emitted e;
  e.outputs["chains"] = setup.chains;
  e.outputs["sites"] = setup.initial.sites();
  e.outputs["slices"] = setup.initial.slices();
  e.outputs["acceptance"] = {{"redraw", result.acceptance.rate(Proposal::redraw)},
                             {"nudge", result.acceptance.rate(Proposal::nudge)},
                             {"flip", result.acceptance.rate(Proposal::flip)}};
  if (!common.state_path.empty()) {
    std::ofstream f(common.state_path);
    if (!f) throw ConfigError("cannot write state file '" + common.state_path + "'");
    write_configuration(f, result.final_states.front());
    e.outputs["state"] = common.state_path;
  }
  e.table.columns = {"redraw", "nudge", "flip"};
  e.table.rows.push_back({result.acceptance.rate(Proposal::redraw), result.acceptance.rate(Proposal::nudge),
                          result.acceptance.rate(Proposal::flip)});
  return e;
}

Emitted matsubara_cmd(const RunConfig& c, int threads) {
  const ChainSetup setup = chain_setup(c, threads);
  const auto r = matsubara_estimate(setup, factors(c, setup));
  Emitted e;
  e.outputs["Gamma"] = report_json(r);
  e.table.columns = {"Gamma", "std_error"};
  e.table.rows.push_back({r.scalar(), r.scalar_error()});
  return e;
}

Emitted order_parameter_cmd(const RunConfig& c, int threads) {
  const ChainSetup setup = chain_setup(c, threads);
  const std::size_t site = c.estimate_sites.front();
  if (site >= setup.initial.sites()) throw ConfigError("estimate.sites: site outside the box");
  const auto r = order_parameter(setup, site);
  Emitted e;
  e.outputs["site"] = site;
  e.outputs["M_hat"] = report_json(r);
  e.table.columns = {"M_hat", "std_error"};
  e.table.rows.push_back({r.scalar(), r.scalar_error()});
  return e;
}

Emitted gks_cmd(RunConfig c, int threads) {
  if (c.boundary_kind == BoundaryKind::free) c.boundary_kind = BoundaryKind::plus_clamped;
  const ChainSetup setup = chain_setup(c, threads);
  const auto f = factors(c, setup);
  if (f.size() != 3) throw ConfigError("gks-audit needs three estimate.sites and estimate.times");
  const auto audit = gks_audit(setup, {f[0], f[1], f[2]});
  Emitted e;
  e.outputs["plus"] = report_json(audit.plus);
  e.outputs["minus"] = report_json(audit.minus);
  e.outputs["plus_nonnegative"] = audit.plus_nonnegative;
  e.outputs["minus_nonpositive"] = audit.minus_nonpositive;
  e.outputs["exact_mirror"] = audit.exact_mirror;
  e.outputs["pass"] = audit.pass();
  e.table.columns = {"Gamma_plus", "se_plus", "Gamma_minus", "se_minus"};
  e.table.rows.push_back({audit.plus.scalar(), audit.plus.scalar_error(), audit.minus.scalar(),
                          audit.minus.scalar_error()});
  return e;
}

int verify_cmd(std::ostream& out, std::ostream& err, const Common& common) {
  const std::string started = utc_timestamp();
  const auto results = run_acceptance(&err);
  const bool ok = all_gating_passed(results);
  ResultRecord record;
  record.command = "verify";
  record.started = started;
  record.finished = utc_timestamp();
  json list = json::array();
  for (const auto& r : results)
    list.push_back({{"id", r.id}, {"title", r.title}, {"passed", r.passed}, {"gating", r.gating},
                    {"seconds", r.seconds}, {"detail", r.detail}});
  record.outputs["criteria"] = list;
  record.outputs["passed"] = ok;
  if (common.format == "records") write_record(out, record);
  err << (ok ? "verify: all gating criteria passed" : "verify: FAILED") << '\n';
  return ok ? exit_ok : exit_verify;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum anharmonic crystal toolkit", "qac"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "Run configuration file");
    sub->add_option("--out", common.out_path, "Output file (default: standard output)");
    sub->add_option("--seed", common.seed, "Master seed (overrides chain.seed)");
    sub->add_option("--threads", common.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--format", common.format, "records or csv")->check(CLI::IsMember({"records", "csv"}));
    sub->add_option("--set", common.overrides, "Override, section.key=value (repeatable)");
  };
  const char* names[][2] = {
      {"spectrum", "Single-site spectrum, gap and rigidity"},
      {"rigidity-scan", "Rigidity over scan.masses"},
      {"theta", "Lattice constant theta(d)"},
      {"beta-star", "Critical inverse temperature"},
      {"classify", "Phase classification verdict"},
      {"sample", "Run the path-integral chain"},
      {"matsubara", "Matsubara function estimate"},
      {"order-parameter", "Order parameter estimate"},
      {"gks-audit", "Sign audit of a three-point Matsubara function"},
      {"verify", "Acceptance suite"},
  };
  for (const auto& n : names) {
    CLI::App* sub = app.add_subcommand(n[0], n[1]);
    add_common(sub);
    if (std::string(n[0]) == "theta") sub->add_option("--d", common.d, "Lattice dimension")->check(CLI::Range(3, 64));
    if (std::string(n[0]) == "sample") sub->add_option("--state", common.state_path, "Write the final configuration");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_config;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    std::ofstream file;
    std::ostream* sink = &out;
    if (!common.out_path.empty()) {
      file.open(common.out_path);
      if (!file) throw ConfigError("cannot write '" + common.out_path + "'");
      sink = &file;
    }
    if (command == "verify") return verify_cmd(*sink, err, common);

    const bool needs_model = command != "theta";
    const RunConfig config = load(common, needs_model);
    ResultRecord record;
    record.command = command;
    record.config_digest = config_digest(config);
    record.seed = config.chain.seed;
    record.started = utc_timestamp();
    Emitted e;
    if (command == "spectrum") e = spectrum_cmd(config);
    else if (command == "rigidity-scan") e = scan_cmd(config, common.threads);
    else if (command == "theta") e = theta_cmd(config);
    else if (command == "beta-star") e = beta_star_cmd(config);
    else if (command == "classify") e = classify_cmd(config);
    else if (command == "sample") e = sample_cmd(config, common);
    else if (command == "matsubara") e = matsubara_cmd(config, common.threads);
    else if (command == "order-parameter") e = order_parameter_cmd(config, common.threads);
    else if (command == "gks-audit") e = gks_cmd(config, common.threads);
    record.finished = utc_timestamp();
    record.outputs = std::move(e.outputs);
    if (common.format == "csv") write_csv(*sink, e.table);
    else write_record(*sink, record);
    return exit_ok;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const NumericalError& e) {
    err << "numerical error [" << e.module() << "]: " << e.what() << '\n';
    return exit_numerical;
  } catch (const std::exception& e) {
    err << "numerical error: " << e.what() << '\n';
    return exit_numerical;
  }
}

}  // namespace qac
