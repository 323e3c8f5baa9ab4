#include "qac/loop_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "qac/errors.hpp"

namespace qac {

std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_double(const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE)
    throw ConfigError("not a number: '" + text + "'");
  return v;
}

void write_configuration(std::ostream& out, const LoopConfiguration& config) {
  out << "qac-loops 1\n";
  out << "beta " << hexfloat(config.beta()) << '\n';
  out << "slices " << config.slices() << '\n';
  out << "extents";
  for (int e : config.box().extents()) out << ' ' << e;
  out << '\n';
  out << "boundary " << to_string(config.boundary().kind) << ' ' << hexfloat(config.boundary().level) << '\n';
  out << "values\n";
  for (std::size_t site = 0; site < config.sites(); ++site) {
    const auto l = config.loop(site);
    for (std::size_t k = 0; k < l.size(); ++k) out << (k ? " " : "") << hexfloat(l[k]);
    out << '\n';
  }
  out << "end\n";
}

namespace {

std::istringstream expect_line(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("loop record truncated before '" + key + "'");
  std::istringstream fields(line);
  std::string word;
  fields >> word;
  if (word != key) throw ConfigError("loop record: expected '" + key + "', found '" + word + "'");
  return fields;
}

}  // namespace

LoopConfiguration read_configuration(std::istream& in) {
  {
    auto header = expect_line(in, "qac-loops");
    int version = 0;
    header >> version;
    if (version != 1) throw ConfigError("loop record: unsupported version");
  }
  std::string word;
  expect_line(in, "beta") >> word;
  const double beta = parse_double(word);
  int slices = 0;
  expect_line(in, "slices") >> slices;
  std::vector<int> extents;
  {
    auto fields = expect_line(in, "extents");
    int e;
    while (fields >> e) extents.push_back(e);
  }
  BoundaryCondition boundary;
  {
    auto fields = expect_line(in, "boundary");
    std::string kind, level;
    fields >> kind >> level;
    boundary.kind = parse_boundary_kind(kind);
    boundary.level = parse_double(level);
  }
  expect_line(in, "values");
  LoopConfiguration config(Box(std::move(extents)), beta, slices, boundary);
  for (std::size_t site = 0; site < config.sites(); ++site) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("loop record truncated in values");
    std::istringstream fields(line);
    auto l = config.loop(site);
    for (std::size_t k = 0; k < l.size(); ++k) {
      if (!(fields >> word)) throw ConfigError("loop record: site " + std::to_string(site) + " is short");
      l[k] = parse_double(word);
    }
    if (fields >> word) throw ConfigError("loop record: site " + std::to_string(site) + " is long");
  }
  expect_line(in, "end");
  return config;
}

}  // namespace qac
