#include "qac/records.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <ostream>

namespace qac {

nlohmann::ordered_json ResultRecord::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config_digest"] = config_digest;
  j["version"] = version;
  j["seed"] = seed;
  j["outputs"] = outputs;
  j["timestamps"] = {{"started", started}, {"finished", finished}};
  return j;
}

void write_record(std::ostream& out, const ResultRecord& record) { out << record.to_json().dump() << '\n'; }

void write_csv(std::ostream& out, const Table& table) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
  out << '\n';
  char buf[64];
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      out << (i ? "," : "") << buf;
    }
    out << '\n';
  }
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace qac
