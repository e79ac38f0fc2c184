#include "qps/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <memory>
#include <random>

#include <fmt/format.h>

#include "qps/duality.hpp"
#include "qps/measure.hpp"

namespace qps {

using nlohmann::json;

namespace {

json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

bool is_rational(const Frequency& alpha) {
  try {
    for (double a : alpha) (void)rationalize(a);
    return true;
  } catch (const Error&) {
    return false;
  }
}

// Lazily computed pieces shared by the sections of one run.
class Session {
 public:
  explicit Session(const RunConfig& c) : cfg(c), params(c.params()), schedule(c.scale_schedule()) {}

  const RunConfig& cfg;
  ModelParams params;
  ScaleSchedule schedule;

  MultiscaleOptions options() const {
    MultiscaleOptions o = cfg.analysis.multiscale_options();
    o.kappa = cfg.effective_kappa();
    return o;
  }

  FieldLookup lookup() const {
    return cfg.analysis.lookup == "nearest" ? FieldLookup::Nearest : FieldLookup::Multilinear;
  }

  const EigenfunctionField& field(int resolution) {
    auto& slot = fields_[resolution];
    if (!slot) {
      MultiscaleOptions o = options();
      // scans are diagnostics only unless enforced, and dominate the cost of a field
      o.run_scan = cfg.analysis.enforce_suitability;
      slot = std::make_unique<EigenfunctionField>(
          EigenfunctionField::sample(params, resolution, schedule, o, lookup()));
    }
    return *slot;
  }

  const GammaField& gamma() {
    if (!gamma_) {
      const auto& an = cfg.analysis;
      const EigenfunctionField& f = field(an.extension_resolution);
      kset_ = build_kappa_set(params.dimension(), an.extension_resolution, an.kappa_set_eps);
      GammaOptions go;
      go.C = an.extension_c;
      go.deltas = an.extension_deltas;
      gamma_ = std::make_unique<GammaField>(build_gamma_field(f, kset_, go));
    }
    return *gamma_;
  }
  const KappaSet& kappa_set() {
    (void)gamma();
    return kset_;
  }

 private:
  std::map<int, std::unique_ptr<EigenfunctionField>> fields_;
  std::unique_ptr<GammaField> gamma_;
  KappaSet kset_;
};

json spectrum_section(Session& s) {
  const int r = s.cfg.analysis.spectrum_radius;
  const Restriction box = build_dual(s.params, origin_cube(s.params.dimension(), r));
  const Spectrum spec = eig_sym(box);
  std::vector<double> diag(box.size());
  for (std::size_t i = 0; i < box.size(); ++i) diag[i] = box.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
  std::sort(diag.begin(), diag.end());
  double gap = 0.0;
  for (std::size_t i = 0; i < diag.size(); ++i) gap = std::max(gap, std::abs(diag[i] - spec.eigenvalues(static_cast<Eigen::Index>(i))));
  return {{"radius", r},
          {"size", box.size()},
          {"eigenvalues", vec_json(spec.eigenvalues)},
          {"diagonal", diag},
          {"max_diagonal_gap", gap},
          {"matrix_norm", spec.matrix_norm}};
}

json suitability_section(Session& s) {
  const int r = static_cast<int>(s.schedule.scale(1));
  const int R = s.schedule.levels() >= 2 ? static_cast<int>(s.schedule.scale(2)) : 2 * r;
  const MultiscaleOptions o = s.options();
  const EigenCertificate cert = initial_step(s.params, r, *o.kappa);
  const int rho = rho_for(r, o.rho_rule, o.c1);
  const SuitabilityScan scan = suitability_scan(s.params, cert.energy, r, R, rho, o.gamma, o.tau, o.scan_step);
  json boxes = json::array();
  for (const auto& b : scan.boxes) {
    boxes.push_back({{"center", b.center},
                     {"resolvent_norm", b.report.resolvent_norm},
                     {"resolvent_bound", b.report.resolvent_bound},
                     {"resolvent_ok", b.report.resolvent_ok},
                     {"decay_ok", b.report.decay_ok},
                     {"pass", b.report.pass}});
  }
  return {{"dimension", s.params.dimension()},
          {"energy", cert.energy},
          {"inner", scan.inner},
          {"outer", scan.outer},
          {"rho", scan.rho},
          {"step", scan.step},
          {"gamma", o.gamma},
          {"tau", o.tau},
          {"failures", scan.failures},
          {"pass", scan.pass},
          {"boxes", boxes}};
}

json multiscale_section(Session& s) {
  const Trajectory t = run_multiscale(s.params, s.schedule, s.options());
  json levels = json::array();
  for (const auto& c : t.levels) {
    levels.push_back({{"level", c.level},
                      {"scale", c.scale},
                      {"delta", s.schedule.delta(c.level)},
                      {"energy", c.energy},
                      {"energy_diff", c.energy_diff},
                      {"vector_diff", c.vector_diff},
                      {"simple", c.window_count == 1},
                      {"simplicity_radius", c.simplicity_radius},
                      {"residual", c.residual},
                      {"l1_norm", c.l1_norm},
                      {"strict_regime", c.strict_regime}});
  }
  json contracts = json::array();
  for (const auto& c : t.contracts) {
    contracts.push_back({{"level", c.level}, {"name", c.name}, {"value", c.value}, {"bound", c.bound}, {"holds", c.holds}});
  }
  json scans = json::array();
  for (const auto& sc : t.scans) {
    scans.push_back({{"inner", sc.inner}, {"outer", sc.outer}, {"rho", sc.rho}, {"boxes", sc.boxes.size()},
                     {"failures", sc.failures}, {"pass", sc.pass}});
  }
  json out = {{"kappa", t.kappa},
              {"levels", levels},
              {"contracts", contracts},
              {"scans", scans},
              {"complete", t.complete(s.schedule.levels())},
              {"truncated", t.truncated},
              {"violations", t.violations()},
              {"stop_reason", t.stop_reason}};
  if (!t.levels.empty()) out["gradient"] = eigenvalue_gradient(t.levels.back(), s.params);
  return out;
}

std::vector<TrigPolynomial> test_functions(const Session& s) {
  std::vector<TrigPolynomial> g;
  for (int i = 0; i < s.cfg.analysis.q_tests; ++i) {
    g.push_back(TrigPolynomial::random(s.params.dimension(), s.cfg.analysis.q_max_mode, 4, s.cfg.analysis.seed + i));
  }
  return g;
}

json isometry_json(const EigenfunctionField& f, int window, const std::vector<TrigPolynomial>& tests) {
  const QAssembly q(f, window);
  std::vector<Phase> points;
  for (std::size_t i = 0; i < f.grid().size(); ++i) points.push_back(f.grid().point(i));
  const IsometryReport iso = q_isometry_check(q, tests, points);
  return {{"resolution", f.grid().resolution()},
          {"good_fraction", f.good_fraction()},
          {"pointwise", iso.pointwise},
          {"quadratic", iso.quadratic},
          {"norm_gap", iso.norm_gap},
          {"mass_deviation", iso.mass_deviation},
          {"mass_tolerance", iso.mass_tolerance},
          {"intertwining", intertwining_residual(q, points)}};
}

json duality_section(Session& s) {
  json out;
  const auto& an = s.cfg.analysis;
  if (is_rational(s.params.frequency)) {
    const ConjugationResult c = fourier_conjugation_check(s.params, an.theta_points);
    out["conjugation"] = {{"mismatch", c.mismatch}, {"periods", c.periods}, {"fibers", c.fibers}};
    out["family"] = {{"skipped", "rational frequency"}};
    return out;
  }
  out["conjugation"] = {{"skipped", "IrrationalFrequency"}};
  const EigenfunctionField& f = s.field(an.field_resolution);
  const Phase x = an.family_phase.value_or(s.params.phase);
  const EigenfunctionFamily fam = build_family(f, x, an.label_window);
  const GramReport g = gram_check(fam);
  const int R = f.scale();
  const ResidualReport rr = eigen_residuals(fam, s.params, R + an.label_window);
  const int rho = rho_for(static_cast<int>(s.schedule.levels() >= 2 ? s.schedule.scale(s.schedule.levels() - 1) : R),
                          s.options().rho_rule, an.c1);
  const double radius = an.simplicity_radius.value_or(std::exp(-300.0 * an.gamma * rho));
  json members = json::array();
  for (std::size_t i = 0; i < fam.members.size(); ++i) {
    members.push_back({{"label", fam.members[i].label},
                       {"energy", fam.members[i].energy},
                       {"residual", rr.residuals[i]},
                       {"tolerance", rr.tolerances[i]}});
  }
  out["family"] = {{"phase", fam.x},
                   {"window", fam.window},
                   {"kappa", *s.options().kappa},
                   {"members", members},
                   {"gram_off_diagonal", g.off_diagonal},
                   {"gram_norm_deviation", g.norm_deviation},
                   {"gram_deviation", g.deviation()},
                   {"gram_envelope", gram_envelope(s.params.coupling)},
                   {"residuals_within", rr.within},
                   {"collision_radius", radius},
                   {"collisions", energy_collisions(fam, radius).size()}};
  const int window = an.q_window >= 0 ? an.q_window : R;
  const auto tests = test_functions(s);
  out["isometry"] = isometry_json(f, window, tests);
  json study = json::array();
  for (int res : an.refinement) study.push_back(isometry_json(s.field(res), window, tests));
  out["refinement"] = study;
  out["interpolation_bound"] = f.interpolation_bound();
  return out;
}

json field_json(const GridField& g) {
  std::vector<double> grad(g.size());
  std::vector<int> mask(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    grad[i] = g.gradient_norm(i);
    mask[i] = g.mask[i] ? 1 : 0;
  }
  return {{"dimension", g.grid.dimension()},
          {"resolution", g.grid.resolution()},
          {"gamma", g.values},
          {"mask", mask},
          {"grad_norm", grad}};
}

json extension_section(Session& s) {
  const GammaField& gf = s.gamma();
  const KappaSet& ks = s.kappa_set();
  json levels = json::array();
  for (const auto& r : gf.reports) {
    json l = {{"level", r.level},
              {"delta", r.delta},
              {"eps", r.eps},
              {"lipschitz", r.lipschitz},
              {"max_change", r.max_change},
              {"change_bound", r.change_bound},
              {"change_ok", r.change_ok},
              {"exact_on_set", r.exact_on_set},
              {"min_gradient", r.min_gradient},
              {"gradient_floor", r.gradient_floor},
              {"tracked", r.tracked},
              {"extension_gradient", r.extension_gradient},
              {"extension_bound", r.extension_bound}};
    l["gradient_ok"] = r.gradient_ok ? json(*r.gradient_ok) : json(nullptr);
    levels.push_back(l);
  }
  return {{"kappa_set", {{"kappa", ks.kappa}, {"fraction", ks.set.mask_fraction()}, {"eps", s.cfg.analysis.kappa_set_eps}}},
          {"mollifier_gradient_l1", Mollifier(s.params.dimension()).gradient_l1()},
          {"mask_fraction", gf.gamma.mask_fraction()},
          {"levels", levels},
          {"field", field_json(gf.gamma)}};
}

json ac_section(Session& s) {
  const auto& an = s.cfg.analysis;
  const GammaField& gf = s.gamma();
  const CoverageReport cov = ac_coverage_report(gf.gamma, an.bins, an.hist_lo, an.hist_hi);
  json bins = json::array();
  for (const auto& b : cov.bins) {
    bins.push_back({{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}, {"fraction", b.fraction}, {"density", b.density},
                    {"bounded", b.bounded}});
  }
  // the unperturbed field W on the same set, for comparison
  GridField ref = gf.gamma;
  for (std::size_t i = 0; i < ref.size(); ++i) ref.values[i] = potential_W(ref.grid.point(i));
  const CoverageReport base = ac_coverage_report(ref, an.bins, an.hist_lo, an.hist_hi);

  const int d = s.params.dimension();
  std::mt19937_64 rng(an.seed);
  std::uniform_real_distribution<double> energy(-2.0 * d, 2.0 * d);
  std::uniform_real_distribution<double> logw(std::log(1e-2), std::log(0.2));
  json sets = json::array();
  bool all_within = true;
  for (int i = 0; i < an.level_set_samples; ++i) {
    const double E = energy(rng);
    const double w = std::exp(logw(rng));
    const LevelSetEstimate est = level_set_check(gf.gamma, E, w);
    all_within = all_within && est.within;
    sets.push_back({{"energy", E}, {"halfwidth", w}, {"fraction", est.fraction}, {"bound", est.bound},
                    {"within", est.within}});
  }
  const double slack = 0.05;
  return {{"histogram", bins},
          {"covered", cov.covered},
          {"reference_covered", base.covered},
          {"coverage_slack", slack},
          {"coverage_ok", cov.covered >= base.covered - slack},
          {"gradient_floor", cov.gradient_floor},
          {"density_cap", std::isinf(cov.density_cap) ? json(nullptr) : json(cov.density_cap)},
          {"mask_fraction", cov.mask_fraction},
          {"level_sets", sets},
          {"level_sets_within", all_within}};
}

using Section = std::function<json(Session&)>;

const std::vector<std::pair<std::string, Section>>& sections() {
  static const std::vector<std::pair<std::string, Section>> table{
      {"spectrum", spectrum_section},   {"suitability", suitability_section}, {"multiscale", multiscale_section},
      {"duality", duality_section},     {"extension", extension_section},     {"ac-estimate", ac_section}};
  return table;
}

std::string record_key(const std::string& name) {
  std::string k = name;
  std::replace(k.begin(), k.end(), '-', '_');
  return k;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"spectrum", "suitability", "multiscale", "duality",
                                              "extension", "ac-estimate", "all"};
  return names;
}

ResultRecord run(const RunConfig& config, const std::string& subcommand) {
  if (std::find(subcommands().begin(), subcommands().end(), subcommand) == subcommands().end()) {
    throw Error(ErrorKind::ConfigInvalid, "unknown subcommand '" + subcommand + "'");
  }
  ResultRecord rec;
  rec.config_hash = sha256_hex(config.bytes);
  rec.subcommand = subcommand;
  rec.run_id = sha256_hex(rec.config_hash + ":" + subcommand).substr(0, 16);
  Session session(config);
  for (const auto& [name, fn] : sections()) {
    if (subcommand != "all" && subcommand != name) continue;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      rec.outputs[record_key(name)] = fn(session);
    } catch (const Error& e) {
      throw Error(e.kind(), fmt::format("{} stage: {}", name, e.what()), e.nearby());
    }
    rec.timings[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  return rec;
}

std::filesystem::path output_directory(const RunConfig& config, const std::string& override_dir) {
  if (!override_dir.empty()) return override_dir;
  if (const char* env = std::getenv("QPS_OUT_DIR"); env && *env) return env;
  return config.output.directory;
}

std::vector<std::filesystem::path> persist(const RunConfig& config, const ResultRecord& record,
                                           const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  const auto& fmts = config.output.formats;
  std::filesystem::create_directories(dir);
  if (std::find(fmts.begin(), fmts.end(), "json") != fmts.end()) {
    write_record(record, dir);
    files.push_back(dir / "record.json");
    files.push_back(dir / "timings.json");
  }
  if (std::find(fmts.begin(), fmts.end(), "csv") != fmts.end()) {
    for (const auto& kind : plot_kinds())
      if (has_plotdata(record, kind)) files.push_back(emit_plotdata(record, kind, dir));
  }
  return files;
}

int run_command(const std::string& subcommand, const std::filesystem::path& config_path, const std::string& out_dir) {
  const auto fail = [](const Error& e) {
    std::cerr << json{{"error", std::string(to_string(e.kind()))}, {"message", e.what()}}.dump() << "\n";
    return e.kind() == ErrorKind::ConfigInvalid ? 2 : 1;
  };
  try {
    const RunConfig cfg = RunConfig::load(config_path);
    const ResultRecord rec = run(cfg, subcommand);
    const auto dir = output_directory(cfg, out_dir);
    for (const auto& f : persist(cfg, rec, dir)) std::cout << f.string() << "\n";
    return 0;
  } catch (const Error& e) {
    return fail(e);
  } catch (const std::exception& e) {
    return fail(Error(ErrorKind::InvalidArgument, e.what()));
  }
}

}  // namespace qps
