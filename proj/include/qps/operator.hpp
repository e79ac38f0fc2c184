#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <map>
#include <string>
#include <utility>

#include "qps/lattice.hpp"

namespace qps {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Fourier data of the real-analytic sampling function f on T^d.
///
/// Only finitely many coefficients are stored. The stored data satisfies
/// |fhat(k)| <= normalization * exp(-decay_rate |k|_inf), fhat(-k) = fhat(k)
/// and at least one nonzero coefficient with k != 0.
struct PotentialSpec {
  int dimension = 1;
  std::map<Site, double> coefficients;
  double decay_rate = 1.0;
  double normalization = 1.0;
  /// sum_k |fhat(k)|, an upper bound for sup|f| and for the norm of T.
  double sup_norm = 0.0;

  /// f(y) = sum_k fhat(k) cos(2 pi k.y); the sine parts cancel by symmetry.
  double evaluate(const Phase& y) const;
  double coefficient(const Site& k) const;
  double constant_term() const;
  /// Largest |k|_inf among stored coefficients.
  int range() const;
};

PotentialSpec validate_potential(int dimension, const std::map<Site, double>& raw,
                                 double decay_rate, double normalization = 1.0);

/// f(y) = sum_j 2 cos(2 pi y_j), i.e. fhat(+-e_j) = 1. With unit coefficients
/// the decay bound needs normalization >= exp(decay_rate); decay_rate 1 and
/// normalization e are used.
PotentialSpec cosine_potential(int dimension);

struct ModelParams {
  PotentialSpec potential;
  double coupling = 0.0;
  Frequency frequency;
  Phase phase;

  int dimension() const { return potential.dimension; }
  /// Validates dimensions and ranges; phases are reduced modulo 1.
  static ModelParams make(PotentialSpec potential, double coupling, Frequency frequency,
                          Phase phase);
  ModelParams with_phase(Phase x) const;
  ModelParams with_coupling(double lambda) const;
  ModelParams with_frequency(Frequency alpha) const;
};

/// W(x) = sum_j 2 cos(2 pi x_j).
double potential_W(const Phase& x);

/// Long-range hopping T psi(n) = sum_{k != 0} t_{n,k} psi(n + k).
struct HoppingSpec {
  int dimension = 1;
  double decay_rate = 1.0;
  double normalization = 1.0;
  std::map<Site, double> coefficients;
  /// Site-dependent overrides keyed by (n, k).
  std::map<std::pair<Site, Site>, double> site_coefficients;

  double coefficient(const Site& n, const Site& k) const;
  int range() const;
  void validate() const;

  static HoppingSpec from_potential(const PotentialSpec& potential);
};

using LatticeVector = std::map<Site, double>;

/// (T psi)(n) for n in the domain, hops restricted to the domain.
LatticeVector apply_hopping(const HoppingSpec& hopping, const LatticeVector& psi,
                            const SiteSet& domain);

/// Finite-volume restriction of an operator to an explicit site set.
struct Restriction {
  SiteSetPtr sites;
  Matrix matrix;

  std::size_t size() const { return static_cast<std::size_t>(matrix.rows()); }
  double symmetry_defect() const;
  /// Principal submatrix on the given subset of sites.
  Restriction restrict_to(SiteSetPtr subset) const;
};

inline constexpr std::size_t kDefaultMaxSide = 4096;

/// Delta + lambda V restricted to the sites, V(n) = f(x + alpha ⋆ n).
Restriction build_primal(const ModelParams& params, SiteSetPtr sites,
                         std::size_t max_side = kDefaultMaxSide);
Restriction build_primal(const ModelParams& params, const Site& center, int radius,
                         std::size_t max_side = kDefaultMaxSide);

/// lambda T + W restricted to the sites: off-diagonal lambda fhat(m - n),
/// diagonal W(x + n ⋆ alpha) + lambda fhat(0). Hops leaving the set are dropped.
Restriction build_dual(const ModelParams& params, SiteSetPtr sites,
                       std::size_t max_side = kDefaultMaxSide);
Restriction build_dual(const ModelParams& params, const Site& center, int radius,
                       std::size_t max_side = kDefaultMaxSide);

/// Diagonal entry of the dual operator at site n.
double dual_diagonal(const ModelParams& params, const Site& n);

/// Structured-text potential files (JSON). See README for the schema.
PotentialSpec load_potential(const std::string& path);
PotentialSpec parse_potential(const std::string& text);
std::string dump_potential(const PotentialSpec& potential);

}  // namespace qps
