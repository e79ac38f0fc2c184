#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qps/multiscale.hpp"

namespace qps {

/// How off-grid phases are read from a sampled field.
enum class FieldLookup { Multilinear, Nearest };

struct FieldValue {
  double energy = 0.0;
  Vector vector;  // normalized, indexed like EigenfunctionField::sites()
};

/// Multiscale trajectories sampled on a phase grid for a fixed frequency.
/// A node is good when its trajectory completed every level. Off-grid
/// phases are read by multilinear interpolation over the enclosing cell,
/// which counts as good only when all of its corners are.
class EigenfunctionField {
 public:
  static EigenfunctionField sample(const ModelParams& base, int resolution,
                                   const ScaleSchedule& schedule, const MultiscaleOptions& options,
                                   FieldLookup lookup = FieldLookup::Multilinear);

  const TorusGrid& grid() const { return grid_; }
  const ModelParams& params() const { return params_; }
  const ScaleSchedule& schedule() const { return schedule_; }
  SiteSetPtr sites() const { return sites_; }
  int scale() const { return sites_->cube()->radius; }
  int levels() const { return schedule_.levels(); }
  FieldLookup lookup() const { return lookup_; }

  bool node_good(std::size_t node) const { return good_[node] != 0; }
  /// Number of levels the node's trajectory completed.
  int node_levels(std::size_t node) const { return static_cast<int>(level_energies_[node].size()); }
  double node_energy(std::size_t node, int level) const {
    return level_energies_[node].at(static_cast<std::size_t>(level - 1));
  }
  const Vector& node_vector(std::size_t node) const { return vectors_[node]; }
  /// Level-j eigenvector of the node, indexed like the cube of radius R_j.
  const Vector& node_level_vector(std::size_t node, int level) const {
    return level_vectors_[node].at(static_cast<std::size_t>(level - 1));
  }
  double node_residual(std::size_t node) const { return residuals_[node]; }
  const std::string& node_reason(std::size_t node) const { return reasons_[node]; }
  double good_fraction() const;

  /// chi_G at an arbitrary phase.
  bool contains(const Phase& y) const;
  std::optional<FieldValue> value(const Phase& y) const;
  std::optional<double> energy(const Phase& y) const;
  /// psi(y; n), zero off the good set or outside the box.
  double component(const Phase& y, const Site& n) const;

  /// Largest node residual over good nodes.
  double max_node_residual() const;
  /// Bound on the residual of an interpolated pair: see README.
  double interpolation_bound() const { return interpolation_bound_; }

 private:
  struct Cell {
    std::vector<std::size_t> corners;
    std::vector<double> weights;
    std::size_t key = 0;
    bool good = false;
  };
  Cell locate(const Phase& y) const;
  void finish();

  TorusGrid grid_{1, 2};
  ModelParams params_;
  ScaleSchedule schedule_;
  FieldLookup lookup_ = FieldLookup::Multilinear;
  SiteSetPtr sites_;
  std::vector<char> good_;
  std::vector<std::string> reasons_;
  std::vector<std::vector<double>> level_energies_;
  std::vector<Vector> vectors_;
  std::vector<std::vector<Vector>> level_vectors_;
  std::vector<double> residuals_;
  std::vector<Matrix> cell_gram_;  // corner Gram matrices of good cells, keyed by lower corner
  double interpolation_bound_ = 0.0;
};

}  // namespace qps
