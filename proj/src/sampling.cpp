#include "qps/sampling.hpp"

#include <cmath>
#include <numbers>

#include "qps/parallel.hpp"

namespace qps {

EigenfunctionField EigenfunctionField::sample(const ModelParams& base, int resolution,
                                              const ScaleSchedule& schedule,
                                              const MultiscaleOptions& options, FieldLookup lookup) {
  EigenfunctionField f;
  f.grid_ = TorusGrid(base.dimension(), resolution);
  f.params_ = base;
  f.schedule_ = schedule;
  f.lookup_ = lookup;
  const auto last = schedule.scales.back();
  if (last > 1000) throw Error(ErrorKind::BoxTooLarge, "field sampling box too large");
  f.sites_ = origin_cube(base.dimension(), static_cast<int>(last));
  const std::size_t n = f.grid_.size();
  f.good_.assign(n, 0);
  f.reasons_.assign(n, "");
  f.level_energies_.assign(n, {});
  f.vectors_.assign(n, Vector());
  f.level_vectors_.assign(n, {});
  f.residuals_.assign(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    const Trajectory t = run_multiscale(base.with_phase(f.grid_.point(i)), schedule, options);
    for (const auto& c : t.levels) {
      f.level_energies_[i].push_back(c.energy);
      f.level_vectors_[i].push_back(c.eigenvector);
    }
    if (t.complete(schedule.levels())) {
      f.good_[i] = 1;
      f.vectors_[i] = t.levels.back().eigenvector;
      f.residuals_[i] = t.levels.back().residual;
    } else {
      f.reasons_[i] = t.stop_reason;
    }
  });
  f.finish();
  return f;
}

double EigenfunctionField::good_fraction() const {
  std::size_t c = 0;
  for (char g : good_) c += g != 0;
  return static_cast<double>(c) / static_cast<double>(good_.size());
}

double EigenfunctionField::max_node_residual() const {
  double m = 0.0;
  for (std::size_t i = 0; i < good_.size(); ++i)
    if (good_[i]) m = std::max(m, residuals_[i]);
  return m;
}

EigenfunctionField::Cell EigenfunctionField::locate(const Phase& y) const {
  Cell cell;
  const int d = grid_.dimension();
  const int N = grid_.resolution();
  if (lookup_ == FieldLookup::Nearest) {
    cell.corners = {grid_.nearest(y)};
    cell.weights = {1.0};
    cell.key = cell.corners[0];
    cell.good = good_[cell.key] != 0;
    return cell;
  }
  std::vector<int> lower(static_cast<std::size_t>(d));
  std::vector<double> frac(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    const double t = wrap_unit(y[j]) * N;
    int i0 = static_cast<int>(std::floor(t));
    double f = t - i0;
    if (i0 >= N) {
      i0 = N - 1;
      f = 1.0;
    }
    lower[j] = i0;
    frac[j] = f;
  }
  cell.key = grid_.flat_index(lower);
  cell.good = true;
  std::vector<int> m(static_cast<std::size_t>(d));
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    double w = 1.0;
    for (int j = 0; j < d; ++j) {
      const bool up = (mask >> j) & 1u;
      m[j] = lower[j] + (up ? 1 : 0);
      w *= up ? frac[j] : 1.0 - frac[j];
    }
    if (w == 0.0) continue;  // on a face: the far corners do not contribute
    const std::size_t idx = grid_.flat_index(m);
    cell.corners.push_back(idx);
    cell.weights.push_back(w);
    if (!good_[idx]) cell.good = false;
  }
  return cell;
}

void EigenfunctionField::finish() {
  const int d = grid_.dimension();
  const double h = grid_.step();
  cell_gram_.assign(grid_.size(), Matrix());
  const double node_res = max_node_residual();
  double bound = node_res;
  const double dH = 4.0 * std::numbers::pi * h;  // |dW/dx_j| <= 4 pi
  for (std::size_t key = 0; key < grid_.size(); ++key) {
    const auto lower = grid_.multi_index(key);
    std::vector<std::size_t> corners;
    bool all = true;
    std::vector<int> m(lower.size());
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
      for (int j = 0; j < d; ++j) m[j] = lower[j] + static_cast<int>((mask >> j) & 1u);
      corners.push_back(grid_.flat_index(m));
      if (!good_[corners.back()]) all = false;
    }
    if (!all) continue;
    const auto k = static_cast<Eigen::Index>(corners.size());
    Matrix g(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
      for (Eigen::Index b = 0; b < k; ++b)
        g(a, b) = vectors_[corners[static_cast<std::size_t>(a)]].dot(vectors_[corners[static_cast<std::size_t>(b)]]);
    cell_gram_[key] = g;
    // cross term of blending two eigenpairs: (1/4)(|dH| + |dE|) |d psi| per axis
    double cross = 0.0;
    double spread = 0.0;
    const int J = levels();
    for (std::size_t a = 0; a < corners.size(); ++a) {
      spread = std::max(spread, (vectors_[corners[a]] - vectors_[corners[0]]).norm());
      for (std::size_t b = a + 1; b < corners.size(); ++b) {
        const double dE = std::abs(node_energy(corners[a], J) - node_energy(corners[b], J));
        cross = std::max(cross, (dH + dE) * (vectors_[corners[a]] - vectors_[corners[b]]).norm());
      }
    }
    const double numer = node_res + 0.25 * d * cross + std::numbers::pi * std::numbers::pi * h * h * d;
    const double denom = std::max(1e-3, 1.0 - spread);
    if (lookup_ == FieldLookup::Multilinear) bound = std::max(bound, numer / denom);
  }
  if (lookup_ == FieldLookup::Nearest) {
    // a node's pair is used at distance up to h/2 per axis
    bound = node_res + 2.0 * std::numbers::pi * h * d;
  }
  interpolation_bound_ = bound;
}

bool EigenfunctionField::contains(const Phase& y) const { return locate(y).good; }

std::optional<FieldValue> EigenfunctionField::value(const Phase& y) const {
  const Cell cell = locate(y);
  if (!cell.good) return std::nullopt;
  FieldValue v;
  v.vector = Vector::Zero(static_cast<Eigen::Index>(sites_->size()));
  const int J = levels();
  for (std::size_t c = 0; c < cell.corners.size(); ++c) {
    v.vector += cell.weights[c] * vectors_[cell.corners[c]];
    v.energy += cell.weights[c] * node_energy(cell.corners[c], J);
  }
  v.vector /= v.vector.norm();
  return v;
}

std::optional<double> EigenfunctionField::energy(const Phase& y) const {
  const Cell cell = locate(y);
  if (!cell.good) return std::nullopt;
  double e = 0.0;
  for (std::size_t c = 0; c < cell.corners.size(); ++c)
    e += cell.weights[c] * node_energy(cell.corners[c], levels());
  return e;
}

double EigenfunctionField::component(const Phase& y, const Site& n) const {
  const auto idx = sites_->index_of(n);
  if (!idx) return 0.0;
  const Cell cell = locate(y);
  if (!cell.good) return 0.0;
  const auto i = static_cast<Eigen::Index>(*idx);
  double num = 0.0;
  for (std::size_t c = 0; c < cell.corners.size(); ++c) num += cell.weights[c] * vectors_[cell.corners[c]](i);
  double norm2 = 0.0;
  const Matrix& g = cell_gram_[cell.key];
  if (lookup_ == FieldLookup::Multilinear && cell.corners.size() == static_cast<std::size_t>(g.rows())) {
    // full cell: corners appear in mask order, matching the cached Gram matrix
    for (std::size_t a = 0; a < cell.corners.size(); ++a)
      for (std::size_t b = 0; b < cell.corners.size(); ++b)
        norm2 += cell.weights[a] * cell.weights[b] * g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  } else {
    for (std::size_t a = 0; a < cell.corners.size(); ++a)
      for (std::size_t b = 0; b < cell.corners.size(); ++b)
        norm2 += cell.weights[a] * cell.weights[b] *
                 vectors_[cell.corners[a]].dot(vectors_[cell.corners[b]]);
  }
  return num / std::sqrt(norm2);
}

}  // namespace qps
