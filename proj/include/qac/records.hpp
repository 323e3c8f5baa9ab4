#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace qac {

inline constexpr const char* kToolkitVersion = "0.1.0";

/// One result of one command, emitted as a single JSON line.
struct ResultRecord {
  std::string command;
  std::string config_digest;
  std::string version = kToolkitVersion;
  nlohmann::ordered_json outputs = nlohmann::ordered_json::object();
  std::string started;
  std::string finished;
  std::uint64_t seed = 0;

  nlohmann::ordered_json to_json() const;
};

/// Columns named after the physical symbols (theta, beta_star, R_m, M_hat,
/// Gamma, ...).
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_record(std::ostream& out, const ResultRecord& record);
void write_csv(std::ostream& out, const Table& table);

/// UTC time, ISO 8601.
std::string utc_timestamp();

}  // namespace qac
