#include "qps/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <fmt/format.h>

#include "qps/error.hpp"

namespace qps {

namespace {

std::size_t index_or_throw(const SiteSet& set, const Site& n) {
  auto i = set.index_of(n);
  if (!i) throw Error(ErrorKind::InvalidArgument, "site outside the restriction");
  return *i;
}

}  // namespace

Spectrum eig_sym(const Matrix& matrix, SiteSetPtr sites) {
  if (matrix.rows() != matrix.cols()) throw Error(ErrorKind::InvalidArgument, "eig_sym: non-square");
  Spectrum s;
  s.sites = std::move(sites);
  if (matrix.rows() == 0) return s;
  const Eigen::Index n = matrix.rows();
  if ((matrix - Matrix(matrix.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0) {
    // exactly diagonal: return the entries themselves rather than rescaled copies
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return matrix(a, a) < matrix(b, b); });
    s.eigenvalues.resize(n);
    s.eigenvectors = Matrix::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const Eigen::Index i = order[static_cast<std::size_t>(k)];
      s.eigenvalues(k) = matrix(i, i);
      s.eigenvectors(i, k) = 1.0;
    }
    s.matrix_norm = s.eigenvalues.cwiseAbs().maxCoeff();
    return s;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(matrix, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::ConvergenceFailure,
                fmt::format("symmetric eigensolver failed on a {}x{} matrix", matrix.rows(), matrix.rows()));
  }
  s.eigenvalues = solver.eigenvalues();
  s.eigenvectors = solver.eigenvectors();
  s.matrix_norm = s.eigenvalues.cwiseAbs().maxCoeff();
  return s;
}

Spectrum eig_sym(const Restriction& box) { return eig_sym(box.matrix, box.sites); }

std::size_t count_in_window(const Vector& eigenvalues, double lo, double hi) {
  std::size_t c = 0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    if (eigenvalues(i) >= lo && eigenvalues(i) <= hi) ++c;
  }
  return c;
}

SimplicityCertificate certify_simple(const Spectrum& spectrum, double energy, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "simplicity radius must be positive");
  SimplicityCertificate c;
  c.energy = energy;
  c.radius = delta;
  c.count = count_in_window(spectrum.eigenvalues, energy - delta, energy + delta);
  c.simple = c.count == 1;
  return c;
}

double distance_to_spectrum(const Spectrum& spectrum, double energy) {
  if (spectrum.size() == 0) return std::numeric_limits<double>::infinity();
  return (spectrum.eigenvalues.array() - energy).abs().minCoeff();
}

std::size_t nearest_eigenvalue(const Vector& eigenvalues, double energy) {
  if (eigenvalues.size() == 0) throw Error(ErrorKind::InvalidArgument, "empty spectrum");
  std::size_t best = 0;
  double best_d = std::abs(eigenvalues(0) - energy);
  // ascending order, so strict improvement keeps the smaller one on ties
  for (Eigen::Index i = 1; i < eigenvalues.size(); ++i) {
    const double d = std::abs(eigenvalues(i) - energy);
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::size_t>(i);
    }
  }
  return best;
}

std::vector<double> eigenvalues_near(const Vector& eigenvalues, double energy, double radius) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    if (std::abs(eigenvalues(i) - energy) <= radius) out.push_back(eigenvalues(i));
  }
  return out;
}

Matrix greens(const Restriction& box, double energy, const Spectrum& spectrum) {
  const double dist = distance_to_spectrum(spectrum, energy);
  if (dist < singular_tolerance(spectrum.matrix_norm)) {
    throw Error(ErrorKind::SingularShift,
                fmt::format("E = {:.17g} is within {:.3g} of the spectrum", energy, dist),
                eigenvalues_near(spectrum.eigenvalues, energy, 1e-6));
  }
  const auto n = static_cast<Eigen::Index>(box.size());
  Matrix shifted = box.matrix - energy * Matrix::Identity(n, n);
  Matrix g = shifted.partialPivLu().inverse();
  return 0.5 * (g + g.transpose());
}

Matrix greens(const Restriction& box, double energy) { return greens(box, energy, eig_sym(box)); }

SuitabilityReport test_suitability(const Restriction& box, double energy, double gamma,
                                   double tau, DistanceMetric metric) {
  if (!box.sites->cube()) throw Error(ErrorKind::InvalidArgument, "suitability needs a cube");
  if (!(gamma > 0.0) || !(tau > 0.0 && tau < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "need gamma > 0 and tau in (0,1)");
  }
  const int R = box.sites->cube()->radius;
  const Spectrum spectrum = eig_sym(box);
  const Matrix g = greens(box, energy, spectrum);

  SuitabilityReport rep;
  rep.gamma = gamma;
  rep.tau = tau;
  rep.radius = R;
  rep.resolvent_norm = 1.0 / distance_to_spectrum(spectrum, energy);
  rep.resolvent_bound = std::exp(std::pow(static_cast<double>(R), tau));
  rep.resolvent_ok = rep.resolvent_norm <= rep.resolvent_bound;

  const SiteSet& sites = *box.sites;
  double worst_log_ratio = -std::numeric_limits<double>::infinity();
  rep.decay_ok = true;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    for (std::size_t j = i; j < sites.size(); ++j) {
      const int dist = lattice_distance(sites[i], sites[j], metric);
      if (2 * dist < R) continue;
      const double v = std::abs(g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      // compare in log space so tiny bounds do not underflow
      const double log_ratio = (v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity()) +
                               gamma * dist;
      if (log_ratio > 0.0) rep.decay_ok = false;
      if (log_ratio > worst_log_ratio || !rep.worst_pair) {
        worst_log_ratio = log_ratio;
        rep.worst_pair = GreensPair{sites[i], sites[j], v, std::exp(-gamma * dist)};
      }
    }
  }
  rep.pass = rep.resolvent_ok && rep.decay_ok;
  return rep;
}

Vector poisson_expand(const Restriction& outer, const Vector& psi, double energy,
                      SiteSetPtr inner) {
  const auto N = static_cast<Eigen::Index>(outer.size());
  if (psi.size() != N) throw Error(ErrorKind::InvalidArgument, "poisson_expand: size mismatch");
  const double residual = (outer.matrix * psi - energy * psi).norm();
  const double scale = 1.0 + outer.matrix.cwiseAbs().rowwise().sum().maxCoeff();
  if (residual > 1e-10 * scale) {
    throw Error(ErrorKind::PreconditionViolated,
                fmt::format("psi is not an eigenvector: residual {:.3g}", residual));
  }
  const Restriction in = outer.restrict_to(inner);
  const Matrix g = greens(in, energy);

  std::vector<Eigen::Index> map(inner->size());
  std::vector<char> is_inner(static_cast<std::size_t>(N), 0);
  for (std::size_t i = 0; i < inner->size(); ++i) {
    map[i] = static_cast<Eigen::Index>(index_or_throw(*outer.sites, (*inner)[i]));
    is_inner[static_cast<std::size_t>(map[i])] = 1;
  }
  // leak(m) = sum over outside sites l of H(m, l) psi(l)
  Vector leak(static_cast<Eigen::Index>(inner->size()));
  for (std::size_t i = 0; i < inner->size(); ++i) {
    double s = 0.0;
    for (Eigen::Index l = 0; l < N; ++l) {
      if (!is_inner[static_cast<std::size_t>(l)]) s += outer.matrix(map[i], l) * psi(l);
    }
    leak(static_cast<Eigen::Index>(i)) = s;
  }
  return -(g * leak);
}

double shell_max(const Restriction& outer, const Vector& psi, const Site& center, int inner,
                 int outer_radius) {
  double m = 0.0;
  for (std::size_t i = 0; i < outer.size(); ++i) {
    const int d = sup_distance((*outer.sites)[i], center);
    if (d > inner && d <= outer_radius) m = std::max(m, std::abs(psi(static_cast<Eigen::Index>(i))));
  }
  return m;
}

TruncationResult truncate_test_function(const Restriction& outer, const Vector& psi,
                                        double energy, int R, double delta, double decay_rate) {
  if (R < 1) throw Error(ErrorKind::InvalidArgument, "truncation radius must be >= 1");
  if (psi.size() != static_cast<Eigen::Index>(outer.size())) {
    throw Error(ErrorKind::InvalidArgument, "truncate_test_function: size mismatch");
  }
  const double floor_delta = std::exp(-decay_rate * R / 10.0);
  if (delta < floor_delta) {
    throw Error(ErrorKind::PreconditionViolated,
                fmt::format("delta {:.3g} below exp(-eta R/10) = {:.3g}", delta, floor_delta));
  }
  const SiteSet& sites = *outer.sites;
  const int d = sites.dimension();
  TruncationResult out;
  out.cut_radius = (3 * R) / 2;
  out.phi = Vector::Zero(psi.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const int r = sup_norm(sites[i]);
    if (r > R && r <= 2 * R) {
      out.boundary_max = std::max(out.boundary_max, std::abs(psi(ii)));
      if (std::abs(psi(ii)) > delta) {
        std::string at;
        for (int c : sites[i]) at += (at.empty() ? "" : ",") + std::to_string(c);
        throw Error(ErrorKind::PreconditionViolated,
                    fmt::format("|psi({})| = {:.3g} exceeds delta = {:.3g}", at, std::abs(psi(ii)), delta));
      }
    }
    if (r <= out.cut_radius) out.phi(ii) = psi(ii);
  }
  out.residual = (outer.matrix * out.phi - energy * out.phi).norm();
  out.bound = std::pow(10.0 * R, 2.0 * d) * delta;
  return out;
}

SiteSetPtr annulus_sites(int dimension, int r, int R) {
  if (r < 0 || R < 0) throw Error(ErrorKind::InvalidArgument, "annulus radii must be nonnegative");
  return std::make_shared<const SiteSet>(SiteSet::annulus(dimension, R, r / 2));
}

double annulus_resolvent_norm(const ModelParams& params, int r, int R, double energy) {
  SiteSetPtr sites = annulus_sites(params.dimension(), r, R);
  if (sites->size() == 0) throw Error(ErrorKind::InvalidArgument, "empty annulus");
  const Restriction box = build_dual(params, sites);
  const Spectrum s = eig_sym(box);
  const double dist = distance_to_spectrum(s, energy);
  if (dist < singular_tolerance(s.matrix_norm)) {
    throw Error(ErrorKind::SingularShift, "energy is an eigenvalue of the annulus restriction",
                eigenvalues_near(s.eigenvalues, energy, 1e-6));
  }
  return 1.0 / dist;
}

DecayIterationReport decay_iteration_check(const Restriction& outer, const Vector& psi,
                                           const Site& center, int R, double coupling,
                                           double gamma, double decay_rate) {
  const SiteSet& sites = *outer.sites;
  double envelope = 0.0;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const int out = std::max(0, sup_distance(sites[i], center) - R);
    envelope = std::max(envelope, std::exp(-0.5 * decay_rate * out) *
                                      std::abs(psi(static_cast<Eigen::Index>(i))));
  }
  DecayIterationReport rep;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const int r = sup_distance(sites[i], center);
    if (4 * r > R) continue;
    const double bound = coupling * std::exp(-0.5 * gamma * (R - r)) * envelope;
    const double v = std::abs(psi(static_cast<Eigen::Index>(i)));
    const double ratio = bound > 0.0 ? v / bound : (v > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    ++rep.checked;
    if (rep.worst_site.empty() || ratio > rep.max_ratio) {
      rep.max_ratio = ratio;
      rep.worst_site = sites[i];
    }
  }
  rep.holds = rep.max_ratio <= 1.0;
  return rep;
}

}  // namespace qps
