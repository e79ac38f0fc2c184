#include "qps/config.hpp"

#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include <json.hpp>

namespace qps {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::ConfigInvalid, what); }

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

template <class T>
void read(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) invalid(std::string(what) + " must be positive");
}

}  // namespace

ScaleSchedule ScheduleSection::build(double coupling) const {
  if (rule == "power") return ScaleSchedule::power(initial, exponent, coupling, levels);
  if (rule == "factor") return ScaleSchedule::geometric(initial, factor, coupling, levels);
  if (rule == "explicit") return ScaleSchedule::from_list(scales, coupling);
  invalid("unknown schedule rule '" + rule + "'");
}

MultiscaleOptions AnalysisSection::multiscale_options() const {
  MultiscaleOptions o;
  o.gamma = gamma;
  o.tau = tau;
  o.rho_rule = rho_rule == "strict" ? RhoRule::Strict : RhoRule::Desk;
  o.c1 = c1;
  o.kappa = kappa;
  o.window = window;
  o.simplicity_radius = simplicity_radius;
  o.enforce_suitability = enforce_suitability;
  o.scan_step = scan_step;
  return o;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) invalid("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig c = parse(ss.str(), path.parent_path());
  c.source = path;
  return c;
}

RunConfig RunConfig::parse(const std::string& text, const std::filesystem::path& base) {
  RunConfig c;
  c.bytes = text;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    invalid(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    for (const auto& [key, _] : j.items()) {
      if (key != "model" && key != "schedule" && key != "analysis" && key != "output") {
        invalid("unknown config section '" + key + "'");
      }
    }
    const json& m = j.at("model");
    const json& pot = m.at("potential");
    if (pot.is_string()) {
      c.model.potential_source = pot.get<std::string>();
      std::filesystem::path p = c.model.potential_source;
      if (p.is_relative()) p = base / p;
      if (!std::filesystem::exists(p)) invalid("potential file not found: " + p.string());
      c.model.potential = load_potential(p.string());
    } else {
      c.model.potential_source = "inline";
      c.model.potential = parse_potential(pot.dump());
    }
    c.model.coupling = m.at("coupling").get<double>();
    c.model.frequency = m.at("frequency").get<Frequency>();
    c.model.phase = m.at("phase").get<Phase>();

    if (j.contains("schedule")) {
      const json& s = j.at("schedule");
      read(s, "rule", c.schedule.rule);
      read(s, "initial", c.schedule.initial);
      read(s, "exponent", c.schedule.exponent);
      read(s, "factor", c.schedule.factor);
      read(s, "levels", c.schedule.levels);
      read(s, "scales", c.schedule.scales);
    }
    if (j.contains("analysis")) {
      const json& a = j.at("analysis");
      auto& an = c.analysis;
      read(a, "gamma", an.gamma);
      read(a, "tau", an.tau);
      read(a, "rho_rule", an.rho_rule);
      read(a, "c1", an.c1);
      read(a, "kappa", an.kappa);
      read(a, "window", an.window);
      read(a, "simplicity_radius", an.simplicity_radius);
      read(a, "enforce_suitability", an.enforce_suitability);
      read(a, "scan_step", an.scan_step);
      read(a, "spectrum_radius", an.spectrum_radius);
      read(a, "field_resolution", an.field_resolution);
      read(a, "refinement", an.refinement);
      read(a, "lookup", an.lookup);
      read(a, "label_window", an.label_window);
      read(a, "family_phase", an.family_phase);
      read(a, "q_window", an.q_window);
      read(a, "q_tests", an.q_tests);
      read(a, "q_max_mode", an.q_max_mode);
      read(a, "theta_points", an.theta_points);
      read(a, "kappa_set_eps", an.kappa_set_eps);
      read(a, "extension_resolution", an.extension_resolution);
      read(a, "extension_c", an.extension_c);
      read(a, "extension_deltas", an.extension_deltas);
      read(a, "bins", an.bins);
      read(a, "hist_lo", an.hist_lo);
      read(a, "hist_hi", an.hist_hi);
      read(a, "level_set_samples", an.level_set_samples);
      read(a, "seed", an.seed);
    }
    if (j.contains("output")) {
      const json& o = j.at("output");
      read(o, "directory", c.output.directory);
      read(o, "formats", c.output.formats);
    }
  } catch (const json::exception& e) {
    invalid(std::string("config: ") + e.what());
  }

  const auto& an = c.analysis;
  require_positive(an.gamma, "gamma");
  if (!(an.tau > 0.0 && an.tau < 1.0)) invalid("tau must lie in (0, 1)");
  if (an.rho_rule != "desk" && an.rho_rule != "strict") invalid("rho_rule must be desk or strict");
  if (an.kappa) require_positive(*an.kappa, "kappa");
  if (an.window) require_positive(*an.window, "window");
  if (an.simplicity_radius) require_positive(*an.simplicity_radius, "simplicity_radius");
  require_positive(an.kappa_set_eps, "kappa_set_eps");
  require_positive(an.extension_c, "extension_c");
  for (double d : an.extension_deltas) require_positive(d, "extension_deltas");
  if (an.field_resolution < 2 || an.extension_resolution < 2) invalid("grid resolutions must be at least 2");
  for (int r : an.refinement)
    if (r < 2) invalid("grid resolutions must be at least 2");
  if (an.lookup != "multilinear" && an.lookup != "nearest") invalid("lookup must be multilinear or nearest");
  if (an.spectrum_radius < 0 || an.label_window < 0) invalid("radii must be nonnegative");
  if (an.bins < 1 || !(an.hist_hi > an.hist_lo)) invalid("histogram needs bins >= 1 and hi > lo");
  if (an.theta_points < 1) invalid("theta_points must be positive");
  if (c.schedule.rule != "power" && c.schedule.rule != "factor" && c.schedule.rule != "explicit") {
    invalid("unknown schedule rule '" + c.schedule.rule + "'");
  }
  for (const auto& f : c.output.formats)
    if (f != "json" && f != "csv") invalid("unknown output format '" + f + "'");
  try {
    (void)c.params();
    (void)c.scale_schedule();
  } catch (const Error& e) {
    invalid(e.what());
  }
  return c;
}

ModelParams RunConfig::params() const {
  return ModelParams::make(model.potential, model.coupling, model.frequency, model.phase);
}

double RunConfig::effective_kappa() const {
  const double floor = 3.0 * model.coupling * hopping_norm_bound(model.potential);
  return std::max(analysis.kappa.value_or(0.05), floor);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, bytes.data(), bytes.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

}  // namespace qps
