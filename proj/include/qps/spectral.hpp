#pragma once

#include <cmath>
#include <cstddef>
#include <optional>

#include "qps/operator.hpp"

namespace qps {

/// Eigen-decomposition of a finite restriction, eigenvalues ascending.
struct Spectrum {
  Vector eigenvalues;
  Matrix eigenvectors;  // column i pairs with eigenvalues(i)
  SiteSetPtr sites;
  double matrix_norm = 0.0;  // max |eigenvalue|

  std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
  Vector eigenvector(std::size_t i) const { return eigenvectors.col(static_cast<Eigen::Index>(i)); }
};

Spectrum eig_sym(const Restriction& box);
Spectrum eig_sym(const Matrix& matrix, SiteSetPtr sites = nullptr);

/// |E - mu| below this counts as hitting the eigenvalue mu.
inline double singular_tolerance(double matrix_norm) { return 1e-12 * (1.0 + matrix_norm); }

struct SimplicityCertificate {
  double energy = 0.0;
  double radius = 0.0;
  std::size_t count = 0;
  bool simple = false;
};

/// Counts eigenvalues in the closed window [E - delta, E + delta].
SimplicityCertificate certify_simple(const Spectrum& spectrum, double energy, double delta);
std::size_t count_in_window(const Vector& eigenvalues, double lo, double hi);
double distance_to_spectrum(const Spectrum& spectrum, double energy);
/// Index of the eigenvalue nearest to E; exact ties go to the smaller one.
std::size_t nearest_eigenvalue(const Vector& eigenvalues, double energy);
/// Eigenvalues within the given radius of E (diagnostics for failures).
std::vector<double> eigenvalues_near(const Vector& eigenvalues, double energy, double radius);

/// G(E; n, m) = <delta_n, (H - E)^{-1} delta_m>, indexed like box.sites.
Matrix greens(const Restriction& box, double energy);
Matrix greens(const Restriction& box, double energy, const Spectrum& spectrum);

/// Metric used for |n - m| in the long-range decay condition.
inline constexpr DistanceMetric kSuitabilityMetric = DistanceMetric::Sup;

struct GreensPair {
  Site n;
  Site m;
  double value = 0.0;  // |G(E; n, m)|
  double bound = 0.0;  // exp(-gamma |n - m|)
};

struct SuitabilityReport {
  double gamma = 0.0;
  double tau = 0.0;
  int radius = 0;
  double resolvent_norm = 0.0;
  double resolvent_bound = 0.0;  // exp(R^tau)
  bool resolvent_ok = false;
  /// Pair with the largest |G| / bound among long-range pairs, if any exist.
  std::optional<GreensPair> worst_pair;
  bool decay_ok = false;
  bool pass = false;
};

/// Literal (gamma, tau)-suitability of a cube: resolvent norm <= exp(R^tau) and
/// |G(n, m)| <= exp(-gamma |n - m|) whenever |n - m| >= R / 2.
SuitabilityReport test_suitability(const Restriction& box, double energy, double gamma,
                                   double tau, DistanceMetric metric = kSuitabilityMetric);

/// Right-hand side of psi(n) = -sum_{m in inner} G^inner(n, m) sum_{l outside} H(m, l) psi(l)
/// for n in the inner set; H is the outer restriction, so its off-diagonal
/// entries already carry the coupling. Result is indexed like `inner`.
Vector poisson_expand(const Restriction& outer, const Vector& psi, double energy,
                      SiteSetPtr inner);

struct TruncationResult {
  Vector phi;  // indexed like the outer restriction
  int cut_radius = 0;
  double residual = 0.0;
  double bound = 0.0;  // (10 R)^{2d} delta
  double boundary_max = 0.0;
};

/// phi = psi restricted to the cube of radius floor(3R/2) around the origin.
/// Requires |psi| <= delta on the annulus R < |n| <= 2R and delta >= exp(-eta R / 10).
TruncationResult truncate_test_function(const Restriction& outer, const Vector& psi,
                                        double energy, int R, double delta, double decay_rate);

/// max |psi| over sites of the outer set with inner < |n - center|_inf <= outer_radius.
double shell_max(const Restriction& outer, const Vector& psi, const Site& center, int inner,
                 int outer_radius);

/// Sites with floor(r/2) < |n|_inf <= R.
SiteSetPtr annulus_sites(int dimension, int r, int R);

/// Exact ||(H - E)^{-1}|| for the dual operator on the annulus floor(r/2) < |n|_inf <= R.
double annulus_resolvent_norm(const ModelParams& params, int r, int R, double energy);
inline double annulus_resolvent_bound(int rho, double tau) {
  return std::exp(5.0 * std::pow(static_cast<double>(rho), tau));
}

struct DecayIterationReport {
  std::size_t checked = 0;
  double max_ratio = 0.0;  // |psi(n)| / bound, worst over checked sites
  Site worst_site;
  bool holds = true;
};

/// For an eigenvector psi of the outer restriction and the cube of radius R
/// at `center`, compares |psi(n)| with
///   coupling * exp(-gamma/2 * (R - |n - c|)) * max_m exp(-eta/2 * dist(m, cube)) |psi(m)|
/// over |n - c|_inf <= R / 4.
DecayIterationReport decay_iteration_check(const Restriction& outer, const Vector& psi,
                                           const Site& center, int R, double coupling,
                                           double gamma, double decay_rate);

}  // namespace qps
