#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "qps/sampling.hpp"

namespace qps {

struct Rational {
  long long p = 0;
  long long q = 1;
};

/// Continued-fraction search for p/q within tol of a with q <= max_period.
Rational rationalize(double a, double tol = 1e-12, long long max_period = 4096);

struct ConjugationResult {
  double mismatch = 0.0;  // max over Bloch phases of the sorted-spectrum distance
  std::vector<long long> periods;
  std::size_t fibers = 0;
};

using ComplexMatrix = Eigen::MatrixXcd;

/// Floquet fiber of the q-periodic primal operator at Bloch phases kappa_j.
ComplexMatrix primal_fiber(const ModelParams& params, const std::vector<Rational>& alpha,
                           const std::vector<double>& kappa);
/// Dual fiber: (Dc)(m) = W(theta + m*alpha) c(m) + lambda sum_k fhat(k) e(k.x) c(m - k mod q).
ComplexMatrix dual_fiber(const ModelParams& params, const std::vector<Rational>& alpha,
                         const std::vector<double>& theta);

/// Compares the primal fiber at kappa = q * theta with the dual fiber at theta
/// for theta on a uniform grid with `theta_points` points per axis.
ConjugationResult fourier_conjugation_check(const ModelParams& params, int theta_points = 8);

struct FamilyMember {
  Site label;
  Phase phase;  // x - label * alpha
  double energy = 0.0;
  Vector vector;  // indexed like EigenfunctionFamily::box
  double tolerance = 0.0;  // declared bound for the member's eigen-residual
};

struct EigenfunctionFamily {
  Phase x;
  int window = 0;
  SiteSetPtr box;
  std::vector<FamilyMember> members;
};

/// psi_l(x; n) = psi(x - l*alpha; n + l) for |l|_inf <= L with x - l*alpha in the good set,
/// placed on the cube of radius scale + L.
EigenfunctionFamily build_family(const EigenfunctionField& field, const Phase& x, int L);

struct GramReport {
  double off_diagonal = 0.0;    // max_{l != k} |<psi_l, psi_k>|
  double norm_deviation = 0.0;  // max_l | ||psi_l|| - 1 |
  double deviation() const { return std::max(off_diagonal, norm_deviation); }
};

GramReport gram_check(const EigenfunctionFamily& family);

/// 12 lambda^{1/10}.
inline double gram_envelope(double coupling) { return 12.0 * std::pow(coupling, 0.1); }

struct ResidualReport {
  std::vector<double> residuals;
  std::vector<double> tolerances;
  bool within = true;
};

/// ||(H^box - gamma(x - l alpha)) psi_l|| on the cube of the given radius.
ResidualReport eigen_residuals(const EigenfunctionFamily& family, const ModelParams& params,
                               int working_radius);

struct Collision {
  Site a;
  Site b;
  double gap = 0.0;
};

/// Member pairs whose energies are closer than `radius`.
std::vector<Collision> energy_collisions(const EigenfunctionFamily& family, double radius);

/// g(x) = sum_i c_i cos(2 pi k_i . x + phi_i), evaluated exactly at any phase.
struct TrigPolynomial {
  std::vector<Site> modes;
  std::vector<double> amplitudes;
  std::vector<double> shifts;

  double operator()(const Phase& x) const;
  static TrigPolynomial random(int dimension, int max_mode, int terms, std::uint64_t seed);
};

/// Coefficients q_k(x) = chi_G(x + k alpha) psi(x + k alpha; -k), |k|_inf <= window,
/// evaluated on demand from the field.
class QAssembly {
 public:
  QAssembly(const EigenfunctionField& field, int window);

  int window() const { return window_; }
  const EigenfunctionField& field() const { return *field_; }
  const std::vector<Site>& labels() const { return labels_; }

  double coefficient(const Site& k, const Phase& x) const;
  /// sum_k |q_k(x)|^2
  double coefficient_mass(const Phase& x) const;
  double apply(const TrigPolynomial& g, const Phase& x) const;          // (Qg)(x)
  double apply_adjoint_q(const TrigPolynomial& g, const Phase& x) const;  // (Q*Qg)(x)

 private:
  const EigenfunctionField* field_;
  int window_;
  std::vector<Site> labels_;
};

struct IsometryReport {
  double pointwise = 0.0;  // max_x |Q*Qg(x) - chi_G(x) g(x)|
  double quadratic = 0.0;  // |<g, Q*Qg> - ||chi_G g||^2| by quadrature
  double norm_gap = 0.0;   // |(||Qg||^2) - ||chi_G g||^2| by quadrature, informational
  double mass_deviation = 0.0;  // max_x |sum_k |q_k(x)|^2 - chi_G(x)|
  double mass_tolerance = 0.0;  // (2L+1)^d max_y (1 - psi(y;0)^2)
};

IsometryReport q_isometry_check(const QAssembly& q, const std::vector<TrigPolynomial>& tests,
                                const std::vector<Phase>& points);

/// max over points and |l| <= window of the defect in
/// W(x) q_l(x) + lambda sum_k fhat(k) q_{l-k}(x + k alpha) = gamma(x + l alpha) q_l(x).
double intertwining_residual(const QAssembly& q, const std::vector<Phase>& points);

}  // namespace qps
