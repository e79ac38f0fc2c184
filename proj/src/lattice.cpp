#include "qps/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "qps/error.hpp"

namespace qps {

double wrap_unit(double t) {
  double r = t - std::floor(t);
  // floor can round t - floor(t) up to exactly 1 for tiny negative t
  if (r >= 1.0) r = 0.0;
  return r;
}

Phase wrap_phase(Phase x) {
  for (double& c : x) c = wrap_unit(c);
  return x;
}

Phase shift_phase(const Phase& x, const Site& n, const Frequency& alpha, int sign) {
  if (x.size() != n.size() || alpha.size() != n.size()) {
    throw Error(ErrorKind::InvalidArgument, "shift_phase: dimension mismatch");
  }
  Phase y(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    y[j] = wrap_unit(x[j] + sign * n[j] * alpha[j]);
  }
  return y;
}

int sup_norm(const Site& n) {
  int m = 0;
  for (int c : n) m = std::max(m, std::abs(c));
  return m;
}

int sup_distance(const Site& a, const Site& b) {
  int m = 0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

int l1_distance(const Site& a, const Site& b) {
  int s = 0;
  for (std::size_t j = 0; j < a.size(); ++j) s += std::abs(a[j] - b[j]);
  return s;
}

int lattice_distance(const Site& a, const Site& b, DistanceMetric metric) {
  return metric == DistanceMetric::Sup ? sup_distance(a, b) : l1_distance(a, b);
}

Site add(const Site& a, const Site& b) {
  Site c(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) c[j] = a[j] + b[j];
  return c;
}

Site subtract(const Site& a, const Site& b) {
  Site c(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) c[j] = a[j] - b[j];
  return c;
}

Site negate(const Site& a) {
  Site c(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) c[j] = -a[j];
  return c;
}

SiteSet::SiteSet(int dimension, std::vector<Site> sites, std::optional<Cube> cube)
    : dimension_(dimension), sites_(std::move(sites)), cube_(std::move(cube)) {
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    if (static_cast<int>(sites_[i].size()) != dimension_) {
      throw Error(ErrorKind::InvalidArgument, "SiteSet: site of wrong dimension");
    }
    if (!index_.emplace(sites_[i], i).second) {
      throw Error(ErrorKind::InvalidArgument, "SiteSet: duplicate site");
    }
  }
}

SiteSet SiteSet::cube(const Site& center, int radius) {
  if (center.empty()) throw Error(ErrorKind::InvalidArgument, "cube: dimension must be positive");
  if (radius < 0) throw Error(ErrorKind::InvalidArgument, "cube: negative radius");
  const int d = static_cast<int>(center.size());
  const int side = 2 * radius + 1;
  std::size_t count = 1;
  for (int j = 0; j < d; ++j) count *= static_cast<std::size_t>(side);
  std::vector<Site> sites;
  sites.reserve(count);
  Site offset(d, -radius);
  for (std::size_t i = 0; i < count; ++i) {
    sites.push_back(add(center, offset));
    for (int j = d - 1; j >= 0; --j) {
      if (++offset[j] <= radius) break;
      offset[j] = -radius;
    }
  }
  return SiteSet(d, std::move(sites), Cube{center, radius});
}

SiteSet SiteSet::annulus(int dimension, int outer, int inner) {
  SiteSet full = cube(Site(dimension, 0), outer);
  std::vector<Site> sites;
  for (const Site& n : full.sites()) {
    if (sup_norm(n) > inner) sites.push_back(n);
  }
  return SiteSet(dimension, std::move(sites), std::nullopt);
}

SiteSet SiteSet::from_sites(int dimension, std::vector<Site> sites) {
  return SiteSet(dimension, std::move(sites), std::nullopt);
}

std::optional<std::size_t> SiteSet::index_of(const Site& n) const {
  if (cube_) {
    const int side = 2 * cube_->radius + 1;
    std::size_t idx = 0;
    for (int j = 0; j < dimension_; ++j) {
      const int off = n[j] - cube_->center[j] + cube_->radius;
      if (off < 0 || off >= side) return std::nullopt;
      idx = idx * side + off;
    }
    return idx;
  }
  auto it = index_.find(n);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TorusGrid::TorusGrid(int dimension, int resolution)
    : dimension_(dimension), resolution_(resolution), size_(1) {
  if (dimension < 1) throw Error(ErrorKind::InvalidArgument, "TorusGrid: dimension must be >= 1");
  if (resolution < 2) throw Error(ErrorKind::InvalidArgument, "TorusGrid: resolution must be >= 2");
  for (int j = 0; j < dimension; ++j) size_ *= static_cast<std::size_t>(resolution);
}

std::vector<int> TorusGrid::multi_index(std::size_t index) const {
  std::vector<int> m(dimension_);
  for (int j = dimension_ - 1; j >= 0; --j) {
    m[j] = static_cast<int>(index % resolution_);
    index /= resolution_;
  }
  return m;
}

Phase TorusGrid::point(std::size_t index) const {
  auto m = multi_index(index);
  Phase x(dimension_);
  for (int j = 0; j < dimension_; ++j) x[j] = static_cast<double>(m[j]) / resolution_;
  return x;
}

std::size_t TorusGrid::flat_index(std::span<const int> multi) const {
  std::size_t idx = 0;
  for (int j = 0; j < dimension_; ++j) {
    int c = multi[j] % resolution_;
    if (c < 0) c += resolution_;
    idx = idx * resolution_ + static_cast<std::size_t>(c);
  }
  return idx;
}

std::size_t TorusGrid::nearest(const Phase& x) const {
  std::vector<int> m(dimension_);
  for (int j = 0; j < dimension_; ++j) {
    m[j] = static_cast<int>(std::lround(wrap_unit(x[j]) * resolution_));
  }
  return flat_index(m);
}

std::size_t TorusGrid::neighbor(std::size_t index, int axis, int offset) const {
  auto m = multi_index(index);
  m[axis] += offset;
  return flat_index(m);
}

}  // namespace qps
