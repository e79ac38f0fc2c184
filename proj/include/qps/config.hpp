#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qps/multiscale.hpp"

namespace qps {

struct ModelSection {
  std::string potential_source;  // file path as written, or "inline"
  PotentialSpec potential;
  double coupling = 0.0;
  Frequency frequency;
  Phase phase;
};

struct ScheduleSection {
  std::string rule = "factor";  // power | factor | explicit
  std::int64_t initial = 6;
  int exponent = 2;
  int factor = 2;
  int levels = 3;
  std::vector<std::int64_t> scales;

  ScaleSchedule build(double coupling) const;
};

struct AnalysisSection {
  double gamma = 0.4;
  double tau = 0.5;
  std::string rho_rule = "desk";
  int c1 = 4;
  std::optional<double> kappa;
  std::optional<double> window;
  std::optional<double> simplicity_radius;
  bool enforce_suitability = false;
  int scan_step = 0;

  int spectrum_radius = 6;
  int field_resolution = 128;
  std::vector<int> refinement{64, 128, 256};
  std::string lookup = "multilinear";
  int label_window = 3;
  std::optional<Phase> family_phase;
  int q_window = -1;  // -1: the last scale
  int q_tests = 5;
  int q_max_mode = 3;
  int theta_points = 8;

  double kappa_set_eps = 0.04;
  int extension_resolution = 1024;
  double extension_c = 1.0;
  std::vector<double> extension_deltas;

  int bins = 48;
  double hist_lo = -3.0;
  double hist_hi = 3.0;
  int level_set_samples = 20;
  std::uint64_t seed = 20240607;

  MultiscaleOptions multiscale_options() const;
};

struct OutputSection {
  std::string directory = "out";
  std::vector<std::string> formats{"json", "csv"};
};

struct RunConfig {
  std::filesystem::path source;
  std::string bytes;  // file contents as read, hashed for the record
  ModelSection model;
  ScheduleSection schedule;
  AnalysisSection analysis;
  OutputSection output;

  static RunConfig load(const std::filesystem::path& path);
  /// `base` resolves relative potential paths.
  static RunConfig parse(const std::string& text, const std::filesystem::path& base = ".");

  ModelParams params() const;
  ScaleSchedule scale_schedule() const { return schedule.build(model.coupling); }
  /// Initial-step separation: the configured kappa (0.05 when unset), raised to 3 lambda ||T|| when smaller.
  double effective_kappa() const;
};

/// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(const std::string& bytes);

}  // namespace qps
