#include "qps/multiscale.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include <fmt/format.h>

namespace qps {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Roundoff allowance for the literal bound checks.
double slack(double scale) { return 1e-12 * (1.0 + scale); }

std::vector<double> nearest_values(const Vector& ev, double energy, std::size_t k) {
  std::vector<double> v(ev.data(), ev.data() + ev.size());
  std::stable_sort(v.begin(), v.end(), [&](double a, double b) {
    return std::abs(a - energy) < std::abs(b - energy);
  });
  if (v.size() > k) v.resize(k);
  std::sort(v.begin(), v.end());
  return v;
}

int checked_int(std::int64_t v) {
  if (v > std::numeric_limits<int>::max()) {
    throw Error(ErrorKind::BoxTooLarge, fmt::format("scale {} does not fit a dense box", v));
  }
  return static_cast<int>(v);
}

void fill_deltas(ScaleSchedule& s) {
  s.deltas.clear();
  for (std::size_t j = 0; j < s.scales.size(); ++j) {
    if (j > 0 && s.scales[j] <= s.scales[j - 1]) {
      throw Error(ErrorKind::InvalidArgument, "scales must be strictly increasing");
    }
    s.deltas.push_back(schedule_delta(s.coupling, static_cast<int>(j + 1), j ? s.scales[j - 1] : 0));
  }
}

}  // namespace

double schedule_delta(double coupling, int level, std::int64_t previous_scale) {
  const double base = std::pow(coupling, 1.0 / 20.0);
  if (level <= 1) return base;
  return base * std::exp(-std::sqrt(static_cast<double>(previous_scale)));
}

ScaleSchedule ScaleSchedule::power(std::int64_t first, int exponent, double coupling, int levels) {
  if (first < 1 || levels < 1) throw Error(ErrorKind::InvalidArgument, "need R_1 >= 1 and J >= 1");
  if (exponent < 2) throw Error(ErrorKind::InvalidArgument, "scale exponent must be >= 2");
  ScaleSchedule s;
  s.rule = ScaleRule::Power;
  s.exponent = exponent;
  s.coupling = coupling;
  s.scales.push_back(first);
  for (int j = 1; j < levels; ++j) {
    std::int64_t r = 1;
    for (int e = 0; e < exponent; ++e) {
      if (r > std::numeric_limits<std::int64_t>::max() / s.scales.back()) {
        throw Error(ErrorKind::InvalidArgument,
                    fmt::format("R_{} overflows 64-bit integers", j + 1));
      }
      r *= s.scales.back();
    }
    s.scales.push_back(r);
  }
  fill_deltas(s);
  return s;
}

ScaleSchedule ScaleSchedule::geometric(std::int64_t first, int factor, double coupling, int levels) {
  if (first < 1 || levels < 1) throw Error(ErrorKind::InvalidArgument, "need R_1 >= 1 and J >= 1");
  if (factor < 2) throw Error(ErrorKind::InvalidArgument, "scale factor must be >= 2");
  ScaleSchedule s;
  s.rule = ScaleRule::Factor;
  s.factor = factor;
  s.coupling = coupling;
  s.scales.push_back(first);
  for (int j = 1; j < levels; ++j) s.scales.push_back(s.scales.back() * factor);
  fill_deltas(s);
  return s;
}

ScaleSchedule ScaleSchedule::from_list(std::vector<std::int64_t> scales, double coupling) {
  if (scales.empty() || scales.front() < 1) throw Error(ErrorKind::InvalidArgument, "empty scale list");
  ScaleSchedule s;
  s.rule = ScaleRule::Explicit;
  s.coupling = coupling;
  s.scales = std::move(scales);
  fill_deltas(s);
  return s;
}

double EigenCertificate::component(const Site& n) const {
  auto i = sites->index_of(n);
  return i ? eigenvector(static_cast<Eigen::Index>(*i)) : 0.0;
}

Vector pad_to(const EigenCertificate& cert, const SiteSet& sites) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(sites.size()));
  for (std::size_t i = 0; i < cert.sites->size(); ++i) {
    auto k = sites.index_of((*cert.sites)[i]);
    if (!k) throw Error(ErrorKind::InvalidArgument, "pad_to: target does not contain the support");
    v(static_cast<Eigen::Index>(*k)) = cert.eigenvector(static_cast<Eigen::Index>(i));
  }
  return v;
}

std::vector<std::vector<double>> uniform_grid(int dimension, int resolution) {
  TorusGrid g(dimension, resolution);
  std::vector<std::vector<double>> pts;
  pts.reserve(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) pts.push_back(g.point(i));
  return pts;
}

std::vector<std::vector<double>> low_discrepancy_grid(int dimension, std::size_t count) {
  // phi_d solves x^{d+1} = x + 1
  double phi = 2.0;
  for (int it = 0; it < 64; ++it) phi = std::pow(1.0 + phi, 1.0 / (dimension + 1));
  std::vector<double> a(dimension);
  for (int j = 0; j < dimension; ++j) a[j] = std::pow(1.0 / phi, j + 1);
  std::vector<std::vector<double>> pts(count, std::vector<double>(dimension));
  for (std::size_t n = 0; n < count; ++n)
    for (int j = 0; j < dimension; ++j) pts[n][j] = wrap_unit(0.5 + static_cast<double>(n + 1) * a[j]);
  return pts;
}

const std::vector<double>& kappa_ladder() {
  static const std::vector<double> ladder = [] {
    std::vector<double> v;
    for (int i = 1; i <= 40; ++i) v.push_back(std::ldexp(1.0, -i));
    return v;
  }();
  return ladder;
}

double separation_margin(const Phase& x, const Frequency& alpha, int R) {
  const double e = potential_W(x);
  double m = std::numeric_limits<double>::infinity();
  SiteSet box = SiteSet::cube(Site(x.size(), 0), R);
  for (const Site& n : box.sites()) {
    if (sup_norm(n) == 0) continue;
    m = std::min(m, std::abs(potential_W(shift_phase(x, n, alpha)) - e));
  }
  return m;
}

KappaSeparation kappa_separation(const Phase& x, int R, double epsilon,
                                 const std::vector<Frequency>& alpha_grid) {
  if (alpha_grid.empty()) throw Error(ErrorKind::InvalidArgument, "empty frequency grid");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw Error(ErrorKind::InvalidArgument, "epsilon outside [0,1]");
  std::vector<double> margin(alpha_grid.size());
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) margin[i] = separation_margin(x, alpha_grid[i], R);
  const double need = (1.0 - epsilon) * static_cast<double>(alpha_grid.size());
  for (double kappa : kappa_ladder()) {
    std::size_t pass = 0;
    for (double m : margin) pass += m >= kappa;
    if (static_cast<double>(pass) < need) continue;
    KappaSeparation out;
    out.kappa = kappa;
    auto& gs = out.good_set;
    gs.points = alpha_grid;
    for (double m : margin) {
      gs.mask.push_back(m >= kappa);
      gs.reasons.push_back(m >= kappa ? "" : fmt::format("margin {:.3g} < kappa", m));
    }
    gs.measure = static_cast<double>(pass) / static_cast<double>(alpha_grid.size());
    gs.sampling_error = 1.0 / std::sqrt(static_cast<double>(alpha_grid.size()));
    return out;
  }
  throw Error(ErrorKind::NoSeparation, "no ladder kappa reaches the measure target");
}

EigenCertificate initial_step(const ModelParams& params, int R, double kappa) {
  if (R < 0) throw Error(ErrorKind::InvalidArgument, "negative radius");
  if (!(kappa > 0.0)) throw Error(ErrorKind::InvalidArgument, "kappa must be positive");
  const double lambda = params.coupling;
  const double tnorm = hopping_norm_bound(params.potential);
  if (2.0 * lambda * tnorm >= kappa) {
    throw Error(ErrorKind::BoundViolated,
                fmt::format("coupling {:.3g} is not below kappa/(2||T||) = {:.3g}", lambda,
                            kappa / (2.0 * tnorm)));
  }
  const double margin = separation_margin(params.phase, params.frequency, R);
  if (margin < kappa) {
    throw Error(ErrorKind::NotSimple,
                fmt::format("separation margin {:.3g} is below kappa {:.3g}", margin, kappa));
  }
  const double e0 = potential_W(params.phase);
  const Restriction box = build_dual(params, origin_cube(params.dimension(), R));
  const Spectrum spec = eig_sym(box);
  const std::size_t count = count_in_window(spec.eigenvalues, e0 - kappa / 2, e0 + kappa / 2);
  if (count != 1) {
    throw Error(ErrorKind::NotSimple,
                fmt::format("{} eigenvalues within kappa/2 of W(x)", count),
                eigenvalues_near(spec.eigenvalues, e0, kappa / 2));
  }
  const std::size_t idx = nearest_eigenvalue(spec.eigenvalues, e0);

  EigenCertificate c;
  c.level = 1;
  c.scale = R;
  c.sites = box.sites;
  c.energy = spec.eigenvalues(static_cast<Eigen::Index>(idx));
  c.eigenvector = spec.eigenvector(idx);
  const auto origin = static_cast<Eigen::Index>(*box.sites->index_of(Site(params.dimension(), 0)));
  if (c.eigenvector(origin) < 0.0) c.eigenvector = -c.eigenvector;
  c.matrix_norm = spec.matrix_norm;
  c.residual = (box.matrix * c.eigenvector - c.energy * c.eigenvector).norm();
  c.energy_diff = std::abs(c.energy - e0);
  Vector seed = Vector::Zero(c.eigenvector.size());
  seed(origin) = 1.0;
  c.vector_diff = (c.eigenvector - seed).norm();
  c.l1_norm = c.eigenvector.lpNorm<1>();
  c.simplicity_radius = kappa / 2 - c.energy_diff;
  c.nearby = nearest_values(spec.eigenvalues, c.energy, 5);

  if (!(c.simplicity_radius > 0.0)) {
    throw Error(ErrorKind::NotSimple, "eigenvalue sits on the edge of the kappa/2 window");
  }
  const auto cert = certify_simple(spec, c.energy, c.simplicity_radius);
  c.window_count = cert.count;
  if (!cert.simple) throw Error(ErrorKind::NotSimple, "window around E_1 is not simple", c.nearby);

  const double energy_bound = lambda * params.potential.sup_norm;
  if (c.energy_diff > energy_bound + slack(c.matrix_norm)) {
    throw Error(ErrorKind::BoundViolated,
                fmt::format("|E_1 - W(x)| = {:.3g} exceeds lambda ||f|| = {:.3g}", c.energy_diff,
                            energy_bound));
  }
  const double vector_bound = 2.0 * lambda * tnorm / kappa;
  if (c.vector_diff > vector_bound + 1e-12) {
    throw Error(ErrorKind::BoundViolated,
                fmt::format("||psi - delta_0|| = {:.3g} exceeds 2 lambda ||T|| / kappa = {:.3g}",
                            c.vector_diff, vector_bound));
  }
  return c;
}

std::vector<Site> shell_centers(int dimension, int r, int R, int step) {
  if (step < 1) throw Error(ErrorKind::InvalidArgument, "scan step must be >= 1");
  const int inner = (r + 1) / 2;
  std::set<int> coords;
  for (int c = -(R / step) * step; c <= R; c += step) coords.insert(c);
  for (int c : {-R, R, -inner, inner}) coords.insert(c);
  const std::vector<int> axis(coords.begin(), coords.end());
  std::vector<Site> out;
  std::vector<std::size_t> idx(static_cast<std::size_t>(dimension), 0);
  while (true) {
    Site n(static_cast<std::size_t>(dimension));
    for (int j = 0; j < dimension; ++j) n[j] = axis[idx[j]];
    const int norm = sup_norm(n);
    if (norm >= inner && norm <= R) out.push_back(n);
    int j = dimension - 1;
    while (j >= 0 && ++idx[j] == axis.size()) idx[j--] = 0;
    if (j < 0) break;
  }
  return out;
}

SuitabilityScan suitability_scan(const ModelParams& params, double energy, int r, int R,
                                 int rho, double gamma, double tau, int step) {
  if (rho < 1) throw Error(ErrorKind::InvalidArgument, "rho must be >= 1");
  SuitabilityScan scan;
  scan.inner = (r + 1) / 2;
  scan.outer = R;
  scan.rho = rho;
  scan.step = step > 0 ? step : rho;
  for (const Site& c : shell_centers(params.dimension(), r, R, scan.step)) {
    ScanBox b;
    b.center = c;
    try {
      b.report = test_suitability(build_dual(params, make_cube(c, rho)), energy, gamma, tau);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SingularShift) throw;
      b.report.gamma = gamma;
      b.report.tau = tau;
      b.report.radius = rho;
      b.report.resolvent_norm = std::numeric_limits<double>::infinity();
      b.report.resolvent_bound = std::exp(std::pow(static_cast<double>(rho), tau));
    }
    if (!b.report.pass) ++scan.failures;
    scan.boxes.push_back(std::move(b));
  }
  if (scan.boxes.empty()) throw Error(ErrorKind::InvalidArgument, "empty shell");
  scan.pass = scan.failures == 0;
  return scan;
}

int rho_for(int r, RhoRule rule, int c1) {
  if (rule == RhoRule::Desk) return std::max(1, r / 8);
  if (c1 < 1) throw Error(ErrorKind::InvalidArgument, "C_1 must be >= 1");
  const double n = std::floor(std::pow(r / 2.0, 1.0 / c1) + 1e-12);
  return std::max(1, static_cast<int>(n));
}

bool continuation_regime(int rho, int r, int R) {
  if (rho >= 1 && 1000LL * rho <= r && 1000LL * r <= R) return true;
  if (rho >= 1 && 4 * rho <= r && 2 * r <= R) return false;
  throw Error(ErrorKind::PreconditionViolated,
              fmt::format("(rho, r, R) = ({}, {}, {}) is outside both the strict and desk regimes",
                          rho, r, R));
}

EigenCertificate continuation_step(const ModelParams& params, const EigenCertificate& previous,
                                   int R, const ContinuationOptions& options,
                                   SuitabilityScan* scan) {
  const int r = previous.scale;
  const int rho = options.rho;
  const bool strict = continuation_regime(rho, r, R);
  const bool radius_ok = previous.simplicity_radius >= std::exp(-options.gamma * r / 1000.0);
  if (strict && !radius_ok) {
    throw Error(ErrorKind::PreconditionViolated,
                "previous simplicity radius is below exp(-gamma r / 1000)");
  }
  const double e = previous.energy;
  if (options.run_scan || options.enforce_suitability) {
    SuitabilityScan s = suitability_scan(params, e, r, R, rho, options.gamma, options.tau,
                                         options.scan_step);
    if (options.enforce_suitability && !s.pass) {
      throw Error(ErrorKind::PreconditionViolated,
                  fmt::format("{} of {} shell boxes are not suitable", s.failures, s.boxes.size()));
    }
    if (scan) *scan = std::move(s);
  }
  const double window = options.window.value_or(std::exp(-options.gamma * r / 250.0));
  const double radius = options.simplicity_radius.value_or(std::exp(-300.0 * options.gamma * rho));

  const Restriction box = build_dual(params, origin_cube(params.dimension(), R));
  const Spectrum spec = eig_sym(box);
  const std::size_t idx = nearest_eigenvalue(spec.eigenvalues, e);
  const double et = spec.eigenvalues(static_cast<Eigen::Index>(idx));
  const auto nearby = nearest_values(spec.eigenvalues, e, 8);
  if (std::abs(et - e) > window) {
    throw Error(ErrorKind::NoEigenvalueInWindow,
                fmt::format("nearest eigenvalue is {:.3g} away, window {:.3g}", std::abs(et - e), window),
                nearby);
  }
  const auto cert = certify_simple(spec, et, radius);
  if (!cert.simple) {
    throw Error(ErrorKind::NotSimpleAtNewScale,
                fmt::format("{} eigenvalues within {:.3g} of {:.17g}", cert.count, radius, et), nearby);
  }

  EigenCertificate c;
  c.level = previous.level + 1;
  c.scale = R;
  c.sites = box.sites;
  c.energy = et;
  c.eigenvector = spec.eigenvector(idx);
  const Vector padded = pad_to(previous, *box.sites);
  if (c.eigenvector.dot(padded) < 0.0) c.eigenvector = -c.eigenvector;
  c.simplicity_radius = radius;
  c.window_count = cert.count;
  c.matrix_norm = spec.matrix_norm;
  c.residual = (box.matrix * c.eigenvector - et * c.eigenvector).norm();
  c.energy_diff = std::abs(et - e);
  c.vector_diff = (c.eigenvector - padded).norm();
  c.l1_norm = c.eigenvector.lpNorm<1>();
  c.strict_regime = strict;
  c.radius_precondition = radius_ok;
  c.nearby = nearby;
  return c;
}

std::size_t Trajectory::violations() const {
  return static_cast<std::size_t>(
      std::count_if(contracts.begin(), contracts.end(), [](const ContractCheck& c) { return !c.holds; }));
}

Trajectory run_multiscale(const ModelParams& params, const ScaleSchedule& schedule,
                          const MultiscaleOptions& options) {
  Trajectory t;
  t.asymptotic_schedule = schedule.asymptotic_schedule();
  auto add_contracts = [&](const EigenCertificate& c) {
    if (!t.asymptotic_schedule) return;
    const double delta = schedule.delta(c.level);
    t.contracts.push_back({c.level, "energy_step", c.energy_diff, std::pow(delta, 10),
                           c.energy_diff <= std::pow(delta, 10)});
    t.contracts.push_back({c.level, "vector_step", c.vector_diff, std::pow(delta, 3),
                           c.vector_diff <= std::pow(delta, 3)});
    t.contracts.push_back({c.level, "l1_norm", c.l1_norm, 2.0, c.l1_norm <= 2.0});
  };
  try {
    const int r1 = checked_int(schedule.scale(1));
    if (options.kappa) {
      t.kappa = *options.kappa;
    } else {
      const double margin = separation_margin(params.phase, params.frequency, r1);
      for (double k : kappa_ladder()) {
        if (k <= margin) {
          t.kappa = k;
          break;
        }
      }
      if (t.kappa == 0.0) throw Error(ErrorKind::NoSeparation, "separation margin below the ladder");
    }
    t.levels.push_back(initial_step(params, r1, t.kappa));
    add_contracts(t.levels.back());
    for (int j = 2; j <= schedule.levels(); ++j) {
      const int r = t.levels.back().scale;
      ContinuationOptions co;
      co.gamma = options.gamma;
      co.tau = options.tau;
      co.rho = rho_for(r, options.rho_rule, options.c1);
      co.scan_step = options.scan_step;
      co.window = options.window;
      co.simplicity_radius = options.simplicity_radius;
      co.enforce_suitability = options.enforce_suitability;
      co.run_scan = options.run_scan;
      SuitabilityScan scan;
      EigenCertificate next =
          continuation_step(params, t.levels.back(), checked_int(schedule.scale(j)), co, &scan);
      t.scans.push_back(std::move(scan));
      t.levels.push_back(std::move(next));
      add_contracts(t.levels.back());
    }
  } catch (const Error& e) {
    t.truncated = true;
    t.stop_kind = e.kind();
    t.stop_reason = e.what();
    t.stop_nearby = e.nearby();
  }
  return t;
}

std::vector<double> eigenvalue_gradient(const EigenCertificate& cert, const ModelParams& params) {
  const int d = params.dimension();
  std::vector<double> g(static_cast<std::size_t>(d), 0.0);
  for (std::size_t i = 0; i < cert.sites->size(); ++i) {
    const Site& n = (*cert.sites)[i];
    const double w = cert.eigenvector(static_cast<Eigen::Index>(i));
    const Phase y = shift_phase(params.phase, n, params.frequency);
    for (int j = 0; j < d; ++j) g[j] += w * w * (-2.0 * kTwoPi * std::sin(kTwoPi * y[j]));
  }
  return g;
}

TrackedPair track_eigenpair(const ModelParams& params, SiteSetPtr sites, double reference,
                            const Vector* align) {
  const Restriction box = build_dual(params, std::move(sites));
  const Spectrum spec = eig_sym(box);
  std::size_t idx = nearest_eigenvalue(spec.eigenvalues, reference);
  if (align) {
    // follow the branch with the largest overlap; energy breaks near-ties
    const Vector overlap = (spec.eigenvectors.transpose() * *align).cwiseAbs();
    for (Eigen::Index i = 0; i < overlap.size(); ++i) {
      const auto u = static_cast<std::size_t>(i);
      const double a = overlap(i), b = overlap(static_cast<Eigen::Index>(idx));
      if (a > b + 1e-12 || (std::abs(a - b) <= 1e-12 &&
                            std::abs(spec.eigenvalues(i) - reference) <
                                std::abs(spec.eigenvalues(static_cast<Eigen::Index>(idx)) - reference))) {
        idx = u;
      }
    }
  }
  TrackedPair p;
  p.energy = spec.eigenvalues(static_cast<Eigen::Index>(idx));
  p.eigenvector = spec.eigenvector(idx);
  if (align && p.eigenvector.dot(*align) < 0.0) p.eigenvector = -p.eigenvector;
  p.gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i) {
    if (static_cast<std::size_t>(i) != idx) p.gap = std::min(p.gap, std::abs(spec.eigenvalues(i) - p.energy));
  }
  return p;
}

SwapResult good_set_swap(const std::vector<std::vector<char>>& table, double epsilon) {
  if (table.empty() || table.front().empty()) throw Error(ErrorKind::InvalidArgument, "empty table");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw Error(ErrorKind::InvalidArgument, "epsilon outside [0,1]");
  SwapResult s;
  s.rows = table.size();
  s.cols = table.front().size();
  std::vector<std::size_t> col_pass(s.cols, 0);
  std::size_t total = 0;
  for (const auto& row : table) {
    if (row.size() != s.cols) throw Error(ErrorKind::InvalidArgument, "ragged table");
    for (std::size_t j = 0; j < s.cols; ++j) {
      if (row[j]) {
        ++col_pass[j];
        ++total;
      }
    }
  }
  const double rows = static_cast<double>(s.rows);
  const double cells = rows * static_cast<double>(s.cols);
  const double root = std::sqrt(epsilon);
  std::size_t good = 0;
  for (std::size_t j = 0; j < s.cols; ++j) {
    s.column_fraction.push_back(static_cast<double>(col_pass[j]) / rows);
    const bool ok = static_cast<double>(col_pass[j]) >= (1.0 - root) * rows;
    s.good_columns.push_back(ok);
    good += ok;
  }
  s.fraction_pass = static_cast<double>(total) / cells;
  s.fraction_good_columns = static_cast<double>(good) / static_cast<double>(s.cols);
  s.precondition = static_cast<double>(total) >= (1.0 - epsilon) * cells;
  if (s.precondition) {
    s.contract_holds = static_cast<double>(good) >= (1.0 - root) * static_cast<double>(s.cols);
  }
  return s;
}

}  // namespace qps
