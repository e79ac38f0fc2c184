#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "qps/error.hpp"

namespace qps {

/// Everything a run produced. Timings are kept apart so that records of
/// identical configs compare equal.
struct ResultRecord {
  std::string run_id;
  std::string config_hash;
  std::string subcommand;
  nlohmann::json outputs = nlohmann::json::object();
  std::map<std::string, double> timings;

  nlohmann::json to_json() const;
  static ResultRecord from_json(const nlohmann::json& j);
  bool operator==(const ResultRecord& other) const { return to_json() == other.to_json(); }
};

/// Writes record.json and timings.json into dir.
void write_record(const ResultRecord& record, const std::filesystem::path& dir);
/// Reads record.json (and timings.json when present) from dir.
ResultRecord read_record(const std::filesystem::path& dir);

/// Plot kinds: trajectory, histogram, field, spectrum, suitability.
const std::vector<std::string>& plot_kinds();
std::vector<std::string> plot_columns(const std::string& kind, int dimension = 1);
/// True when the record carries the data for the kind.
bool has_plotdata(const ResultRecord& record, const std::string& kind);
std::string plotdata_csv(const ResultRecord& record, const std::string& kind);
/// Writes <kind>.csv into dir and returns its path.
std::filesystem::path emit_plotdata(const ResultRecord& record, const std::string& kind,
                                    const std::filesystem::path& dir);

}  // namespace qps
