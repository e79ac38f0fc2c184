#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qps/error.hpp"
#include "qps/spectral.hpp"

namespace qps {

/// How successive box radii are generated.
///   Power:    R_j = R_{j-1}^p (p = 10 is the asymptotic schedule)
///   Factor:   R_j = m * R_{j-1}
///   Explicit: caller supplied list
enum class ScaleRule { Power, Factor, Explicit };

struct ScaleSchedule {
  ScaleRule rule = ScaleRule::Power;
  int exponent = 10;
  int factor = 2;
  double coupling = 0.0;
  std::vector<std::int64_t> scales;  // scales[j-1] = R_j
  std::vector<double> deltas;        // deltas[j-1] = delta_j

  static ScaleSchedule power(std::int64_t first, int exponent, double coupling, int levels);
  static ScaleSchedule geometric(std::int64_t first, int factor, double coupling, int levels);
  static ScaleSchedule from_list(std::vector<std::int64_t> scales, double coupling);

  int levels() const { return static_cast<int>(scales.size()); }
  std::int64_t scale(int level) const { return scales.at(static_cast<std::size_t>(level - 1)); }
  double delta(int level) const { return deltas.at(static_cast<std::size_t>(level - 1)); }
  /// The asymptotic schedule: power rule with exponent 10.
  bool asymptotic_schedule() const { return rule == ScaleRule::Power && exponent == 10; }
};

/// delta_1 = lambda^{1/20}, delta_j = lambda^{1/20} exp(-sqrt(R_{j-1})).
double schedule_delta(double coupling, int level, std::int64_t previous_scale);

struct EigenCertificate {
  int level = 0;
  int scale = 0;
  double energy = 0.0;
  Vector eigenvector;  // indexed like `sites`
  SiteSetPtr sites;
  double simplicity_radius = 0.0;
  std::size_t window_count = 0;
  double residual = 0.0;
  double matrix_norm = 0.0;
  double energy_diff = 0.0;  // |E_j - E_{j-1}|
  double vector_diff = 0.0;  // ||psi_j - psi_{j-1}||, previous zero-padded
  double l1_norm = 0.0;
  bool strict_regime = true;
  /// Whether the previous radius met delta >= exp(-gamma r / 1000).
  bool radius_precondition = true;
  std::vector<double> nearby;  // eigenvalues near E at this scale

  double component(const Site& n) const;
};

/// Zero-padded copy of the certificate's vector on a larger site set.
Vector pad_to(const EigenCertificate& cert, const SiteSet& sites);

struct GoodSetEstimate {
  std::vector<std::vector<double>> points;
  std::vector<char> mask;
  std::vector<std::string> reasons;  // empty string for passing points
  double measure = 0.0;
  double sampling_error = 0.0;  // 1 / sqrt(N)

  std::size_t size() const { return mask.size(); }
};

/// Uniform grid {i / resolution}^d on [0,1)^d, first axis slowest.
std::vector<std::vector<double>> uniform_grid(int dimension, int resolution);
/// Kronecker sequence with the generalized golden ratio, count points.
std::vector<std::vector<double>> low_discrepancy_grid(int dimension, std::size_t count);

/// 2^{-1}, 2^{-2}, ..., 2^{-40}.
const std::vector<double>& kappa_ladder();

/// min over 0 < |n|_inf <= R of |W(x + n alpha) - W(x)|.
double separation_margin(const Phase& x, const Frequency& alpha, int R);

struct KappaSeparation {
  double kappa = 0.0;
  GoodSetEstimate good_set;
};

/// Largest ladder kappa whose passing fraction over the grid reaches 1 - epsilon.
KappaSeparation kappa_separation(const Phase& x, int R, double epsilon,
                                 const std::vector<Frequency>& alpha_grid);

/// Operator norm bound for the hopping part, sum_k |fhat(k)|.
inline double hopping_norm_bound(const PotentialSpec& p) { return p.sup_norm; }

EigenCertificate initial_step(const ModelParams& params, int R, double kappa);

struct ScanBox {
  Site center;
  SuitabilityReport report;
};

struct SuitabilityScan {
  int inner = 0;  // shell is inner <= |n|_inf <= outer
  int outer = 0;
  int rho = 1;
  int step = 1;
  std::vector<ScanBox> boxes;
  std::size_t failures = 0;
  bool pass = true;
};

/// Box centers on the shell ceil(r/2) <= |n|_inf <= R, coordinates on multiples
/// of `step` plus the shell edges.
std::vector<Site> shell_centers(int dimension, int r, int R, int step);

SuitabilityScan suitability_scan(const ModelParams& params, double energy, int r, int R,
                                 int rho, double gamma, double tau, int step = 0);

enum class RhoRule { Desk, Strict };

/// Desk: max(1, floor(r/8)). Strict: max(1, floor((r/2)^{1/c1})).
int rho_for(int r, RhoRule rule, int c1 = 4);

struct ContinuationOptions {
  double gamma = 0.4;
  double tau = 0.5;
  int rho = 1;
  int scan_step = 0;  // 0 means rho
  /// Overrides for the energy window exp(-gamma r/250) and radius exp(-300 gamma rho).
  std::optional<double> window;
  std::optional<double> simplicity_radius;
  bool enforce_suitability = false;
  bool run_scan = true;
};

/// Regime classification of (rho, r, R): true for 1000 rho <= r <= R/1000,
/// false for the desk regime rho <= r/4 <= R/8; throws otherwise.
bool continuation_regime(int rho, int r, int R);

EigenCertificate continuation_step(const ModelParams& params, const EigenCertificate& previous,
                                   int R, const ContinuationOptions& options,
                                   SuitabilityScan* scan = nullptr);

struct ContractCheck {
  int level = 0;
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool holds = true;
};

struct MultiscaleOptions {
  double gamma = 0.4;
  double tau = 0.5;
  RhoRule rho_rule = RhoRule::Desk;
  int c1 = 4;
  /// Initial-step separation; when unset the largest ladder value not
  /// exceeding the separation margin at (x, alpha) is used.
  std::optional<double> kappa;
  std::optional<double> window;
  std::optional<double> simplicity_radius;
  bool enforce_suitability = false;
  bool run_scan = true;
  int scan_step = 0;
};

struct Trajectory {
  std::vector<EigenCertificate> levels;
  std::vector<SuitabilityScan> scans;  // scans[i] belongs to levels[i + 1]
  std::vector<ContractCheck> contracts;
  double kappa = 0.0;
  bool asymptotic_schedule = false;
  bool truncated = false;
  std::optional<ErrorKind> stop_kind;
  std::string stop_reason;
  std::vector<double> stop_nearby;

  bool complete(int expected_levels) const {
    return !truncated && static_cast<int>(levels.size()) == expected_levels;
  }
  std::size_t violations() const;
};

Trajectory run_multiscale(const ModelParams& params, const ScaleSchedule& schedule,
                          const MultiscaleOptions& options);

/// d/dx_j of the eigenvalue: sum_n psi(n)^2 * (-4 pi sin(2 pi (x_j + n_j alpha_j))).
std::vector<double> eigenvalue_gradient(const EigenCertificate& cert, const ModelParams& params);

struct TrackedPair {
  double energy = 0.0;
  Vector eigenvector;
  double gap = 0.0;  // distance to the nearest other eigenvalue
};

/// Re-diagonalizes the dual operator on `sites` and follows the eigenpair whose
/// vector overlaps `align` most, or the eigenvalue nearest to `reference`
/// without one. The sign is fixed against `align`.
TrackedPair track_eigenpair(const ModelParams& params, SiteSetPtr sites, double reference,
                            const Vector* align = nullptr);

struct SwapResult {
  std::size_t rows = 0;  // phases x
  std::size_t cols = 0;  // frequencies alpha
  double fraction_pass = 0.0;
  std::vector<double> column_fraction;  // per-alpha measure of G
  std::vector<char> good_columns;
  double fraction_good_columns = 0.0;
  bool precondition = false;  // fraction_pass >= 1 - eps
  bool contract_holds = true;
};

/// table[i][j] says whether (x_i, alpha_j) passes.
SwapResult good_set_swap(const std::vector<std::vector<char>>& table, double epsilon);

}  // namespace qps
