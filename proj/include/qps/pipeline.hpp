#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qps/config.hpp"
#include "qps/report.hpp"

namespace qps {

/// spectrum, suitability, multiscale, duality, extension, ac-estimate, all.
const std::vector<std::string>& subcommands();

/// Runs a subcommand in memory. Unknown subcommands raise ConfigInvalid.
ResultRecord run(const RunConfig& config, const std::string& subcommand);

/// Output directory: explicit override, then QPS_OUT_DIR, then the config.
std::filesystem::path output_directory(const RunConfig& config, const std::string& override_dir = "");

/// Writes the record and, when csv output is enabled, every plot kind it carries.
std::vector<std::filesystem::path> persist(const RunConfig& config, const ResultRecord& record,
                                           const std::filesystem::path& dir);

/// Exit codes: 0 success, 1 pipeline error, 2 config error. Errors go to
/// stderr as one JSON line.
int run_command(const std::string& subcommand, const std::filesystem::path& config_path,
                const std::string& out_dir = "");

}  // namespace qps
