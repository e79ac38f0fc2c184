#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace qps {

/// A point of Z^d.
using Site = std::vector<int>;

/// A point of the torus T^d, every coordinate kept in [0, 1).
using Phase = std::vector<double>;

/// Frequency vector alpha in [0, 1]^d.
using Frequency = std::vector<double>;

/// Reduce t modulo 1 into [0, 1).
double wrap_unit(double t);

/// Reduce every coordinate modulo 1.
Phase wrap_phase(Phase x);

/// x + sign * (n ⋆ alpha) reduced modulo 1, where (n ⋆ alpha)_j = n_j alpha_j.
Phase shift_phase(const Phase& x, const Site& n, const Frequency& alpha, int sign = 1);

int sup_norm(const Site& n);
int sup_distance(const Site& a, const Site& b);
int l1_distance(const Site& a, const Site& b);
Site add(const Site& a, const Site& b);
Site subtract(const Site& a, const Site& b);
Site negate(const Site& a);

/// Distance conventions available for lattice-distance based tests.
enum class DistanceMetric { Sup, L1 };

int lattice_distance(const Site& a, const Site& b, DistanceMetric metric);

struct Cube {
  Site center;
  int radius = 0;
};

/// Finite subset of Z^d with a fixed enumeration. Cubes are enumerated in
/// lexicographic order with the first coordinate varying slowest.
class SiteSet {
 public:
  static SiteSet cube(const Site& center, int radius);
  /// Sites m with inner < |m|_inf <= outer.
  static SiteSet annulus(int dimension, int outer, int inner);
  static SiteSet from_sites(int dimension, std::vector<Site> sites);

  std::size_t size() const { return sites_.size(); }
  int dimension() const { return dimension_; }
  const Site& operator[](std::size_t i) const { return sites_[i]; }
  const std::vector<Site>& sites() const { return sites_; }
  const std::optional<Cube>& cube() const { return cube_; }

  std::optional<std::size_t> index_of(const Site& n) const;
  bool contains(const Site& n) const { return index_of(n).has_value(); }

 private:
  SiteSet(int dimension, std::vector<Site> sites, std::optional<Cube> cube);

  int dimension_ = 0;
  std::vector<Site> sites_;
  std::map<Site, std::size_t> index_;
  std::optional<Cube> cube_;
};

using SiteSetPtr = std::shared_ptr<const SiteSet>;

inline SiteSetPtr make_cube(const Site& center, int radius) {
  return std::make_shared<const SiteSet>(SiteSet::cube(center, radius));
}

inline SiteSetPtr origin_cube(int dimension, int radius) {
  return make_cube(Site(static_cast<std::size_t>(dimension), 0), radius);
}

/// Uniform grid on T^d with the same number of points per axis. Point i has
/// coordinates (i_1, ..., i_d) / resolution, first axis varying slowest.
class TorusGrid {
 public:
  TorusGrid(int dimension, int resolution);

  int dimension() const { return dimension_; }
  int resolution() const { return resolution_; }
  double step() const { return 1.0 / resolution_; }
  std::size_t size() const { return size_; }

  Phase point(std::size_t index) const;
  std::vector<int> multi_index(std::size_t index) const;
  std::size_t flat_index(std::span<const int> multi) const;  // wraps periodically
  std::size_t nearest(const Phase& x) const;
  /// Index of the neighbor at offset (periodic wrap).
  std::size_t neighbor(std::size_t index, int axis, int offset) const;

 private:
  int dimension_;
  int resolution_;
  std::size_t size_;
};

}  // namespace qps
