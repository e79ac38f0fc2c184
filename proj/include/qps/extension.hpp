#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "qps/sampling.hpp"

namespace qps {

/// Real values on a uniform torus grid together with the subset where the
/// field is prescribed.
struct GridField {
  TorusGrid grid{1, 2};
  std::vector<double> values;
  std::vector<char> mask;

  GridField() = default;
  explicit GridField(const TorusGrid& g) : grid(g), values(g.size(), 0.0), mask(g.size(), 0) {}

  std::size_t size() const { return values.size(); }
  std::size_t mask_count() const;
  double mask_fraction() const;
  /// Central differences with periodic wrap.
  std::vector<double> gradient(std::size_t i) const;
  double gradient_norm(std::size_t i) const;
};

/// Normalized bump e^{-1/(1-|z|^2)} on the unit ball of R^d.
class Mollifier {
 public:
  explicit Mollifier(int dimension);

  int dimension() const { return dimension_; }
  /// eta at Euclidean radius r; zero for r >= 1.
  double operator()(double r) const;
  /// ||grad eta||_{L^1}, computed once by radial quadrature.
  double gradient_l1() const { return gradient_l1_; }
  /// sum over z in h Z^d of h^d eta_t(z).
  double grid_mass(double t, double h) const;
  /// Nonzero samples of eta_t on h Z^d all lie strictly inside the ball of radius t.
  bool support_inside(double t, double h) const;

 private:
  int dimension_;
  double norm_ = 1.0;
  double gradient_l1_ = 0.0;
};

/// Chebyshev grid distance (in steps) from every node to the mask, by a
/// multi-source breadth-first sweep. `parent` receives, for each node off the
/// mask, a neighbor one step closer.
std::vector<int> mask_distance(const TorusGrid& grid, const std::vector<char>& mask,
                               std::vector<std::size_t>* parent = nullptr);

struct ExtensionResult {
  GridField field;                // F, with mask A
  double max_gradient = 0.0;      // max |grad F| over nodes off A
  double gradient_bound = 0.0;    // C' eps / delta
  double quadrature_slack = 0.0;  // declared allowance added to the bound
  double mismatch_on_mask = 0.0;  // max |F - f| on A, zero by construction

  bool within() const { return max_gradient <= gradient_bound + quadrature_slack; }
};

/// Extends f from its mask A. `f.values` hold f on A and the local
/// continuation near A; only nodes within delta/3 of A are read, the rest
/// count as zero. Off A, F is the normalized grid quadrature of the bump at
/// scale min(dist(x, A), delta/6).
ExtensionResult lipschitz_extension(const GridField& f, double eps, double delta, double C = 1.0);

struct KappaSet {
  double kappa = 0.0;
  GridField set;  // mask: |grad W| >= 2 kappa; values: |grad W|
};

/// Ladder kappa = 2 pi 2^{-i}, i = 0..40.
std::vector<double> kappa_set_ladder();

/// Largest ladder kappa whose set covers at least 1 - sqrt(eps) of the grid.
KappaSet build_kappa_set(int dimension, int resolution, double eps);

struct LevelReport {
  int level = 0;
  double delta = 0.0;      // extension radius used for this level
  double eps = 0.0;        // max |phi| over the set and its continuation
  double lipschitz = 0.0;  // C with |grad phi| <= C eps / delta on the continuation
  double max_change = 0.0;  // max |gamma_j - gamma_{j-1}| over the kappa set
  double change_bound = 0.0;
  bool change_ok = true;
  bool exact_on_set = true;  // gamma_j == E_j on the prescribed set
  double min_gradient = 0.0;  // over the prescribed set
  double gradient_floor = 0.0;  // kappa - delta_1 - ... - delta_j
  std::optional<bool> gradient_ok;  // only when the floor is positive
  std::size_t tracked = 0;  // nodes continued by eigenvalue tracking
  double extension_gradient = 0.0;
  double extension_bound = 0.0;
};

struct GammaField {
  GridField gamma;  // final level; mask = kappa set ∩ nodes good at every level
  double kappa = 0.0;
  std::vector<GridField> levels;
  std::vector<LevelReport> reports;
};

struct GammaOptions {
  /// Lower bound for the extension constant; the data may force a larger one.
  double C = 1.0;
  /// Optional override of the per-level extension radius; defaults to the schedule's delta_j.
  std::vector<double> deltas;
};

/// Level by level: phi = gamma_{j-1} - E_j on the kappa set intersected with
/// the level-j good nodes, continued to its delta/3 neighborhood by
/// eigenvalue tracking, extended, and subtracted.
GammaField build_gamma_field(const EigenfunctionField& field, const KappaSet& kset,
                             const GammaOptions& options = {});

}  // namespace qps
