#include "qps/duality.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace qps {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
using Complex = std::complex<double>;

std::vector<Rational> rational_frequency(const Frequency& alpha) {
  std::vector<Rational> out;
  for (double a : alpha) out.push_back(rationalize(a));
  return out;
}

// Mixed-radix enumeration of prod_j Z_{q_j}, first axis slowest.
struct Torus {
  std::vector<long long> q;
  long long size = 1;
  explicit Torus(const std::vector<Rational>& alpha) {
    for (const auto& r : alpha) {
      q.push_back(r.q);
      size *= r.q;
    }
  }
  std::vector<long long> digits(long long i) const {
    std::vector<long long> m(q.size());
    for (std::size_t j = q.size(); j-- > 0;) {
      m[j] = i % q[j];
      i /= q[j];
    }
    return m;
  }
  long long index(const std::vector<long long>& m) const {
    long long i = 0;
    for (std::size_t j = 0; j < q.size(); ++j) i = i * q[j] + (((m[j] % q[j]) + q[j]) % q[j]);
    return i;
  }
};

Vector sorted_eigenvalues(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::ConvergenceFailure, "fiber eigensolver failed");
  return solver.eigenvalues();
}

}  // namespace

Rational rationalize(double a, double tol, long long max_period) {
  if (!std::isfinite(a)) throw Error(ErrorKind::InvalidArgument, "non-finite frequency");
  // convergents h/k of the continued fraction of a
  long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double rest = a;
  for (int it = 0; it < 64; ++it) {
    const double fl = std::floor(rest);
    const auto ai = static_cast<long long>(fl);
    const long long h2 = ai * h1 + h0;
    const long long k2 = ai * k1 + k0;
    if (k2 > max_period) break;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    if (std::abs(a - static_cast<double>(h1) / static_cast<double>(k1)) <= tol) {
      const long long g = std::gcd(h1, k1);
      return Rational{h1 / g, k1 / g};
    }
    const double frac = rest - fl;
    if (frac <= 0.0) break;
    rest = 1.0 / frac;
  }
  throw Error(ErrorKind::IrrationalFrequency,
              fmt::format("{:.17g} has no rational p/q with q <= {} within {:.1e}", a, max_period, tol));
}

ComplexMatrix primal_fiber(const ModelParams& params, const std::vector<Rational>& alpha,
                           const std::vector<double>& kappa) {
  const Torus t(alpha);
  const int d = params.dimension();
  ComplexMatrix h = ComplexMatrix::Zero(t.size, t.size);
  for (long long i = 0; i < t.size; ++i) {
    const auto n = t.digits(i);
    Phase y(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      y[j] = wrap_unit(params.phase[j] + static_cast<double>(n[j] * alpha[j].p % alpha[j].q) / alpha[j].q);
    }
    h(i, i) += params.coupling * params.potential.evaluate(y);
    for (int j = 0; j < d; ++j) {
      auto m = n;
      m[j] += 1;
      const long long k = t.index(m);
      // hops across the cell boundary pick up the Bloch factor
      const Complex w = n[j] + 1 == alpha[j].q ? std::polar(1.0, kTwoPi * kappa[j]) : Complex(1.0);
      h(i, k) += w;
      h(k, i) += std::conj(w);
    }
  }
  return h;
}

ComplexMatrix dual_fiber(const ModelParams& params, const std::vector<Rational>& alpha,
                         const std::vector<double>& theta) {
  const Torus t(alpha);
  const int d = params.dimension();
  ComplexMatrix h = ComplexMatrix::Zero(t.size, t.size);
  for (long long i = 0; i < t.size; ++i) {
    const auto m = t.digits(i);
    double w = 0.0;
    for (int j = 0; j < d; ++j) {
      const double frac = static_cast<double>(m[j] * alpha[j].p % alpha[j].q) / alpha[j].q;
      w += 2.0 * std::cos(kTwoPi * wrap_unit(theta[j] + frac));
    }
    h(i, i) += w;
    for (const auto& [k, c] : params.potential.coefficients) {
      std::vector<long long> target(m);
      double kx = 0.0;
      for (int j = 0; j < d; ++j) {
        target[j] -= k[j];
        kx += k[j] * params.phase[j];
      }
      h(i, t.index(target)) += params.coupling * c * std::polar(1.0, kTwoPi * wrap_unit(kx));
    }
  }
  return h;
}

ConjugationResult fourier_conjugation_check(const ModelParams& params, int theta_points) {
  if (theta_points < 1) throw Error(ErrorKind::InvalidArgument, "need at least one Bloch phase");
  const auto alpha = rational_frequency(params.frequency);
  const int d = params.dimension();
  ConjugationResult res;
  for (const auto& r : alpha) res.periods.push_back(r.q);
  const Torus t(alpha);
  if (t.size > static_cast<long long>(kDefaultMaxSide)) {
    throw Error(ErrorKind::BoxTooLarge, "Floquet fiber exceeds the dense cap");
  }
  long long count = 1;
  for (int j = 0; j < d; ++j) count *= theta_points;
  for (long long c = 0; c < count; ++c) {
    std::vector<double> theta(static_cast<std::size_t>(d));
    std::vector<double> kappa(static_cast<std::size_t>(d));
    long long rest = c;
    for (int j = d - 1; j >= 0; --j) {
      const long long tj = rest % theta_points;
      rest /= theta_points;
      theta[j] = (static_cast<double>(tj) + 0.25) / (static_cast<double>(theta_points) * alpha[j].q);
      kappa[j] = wrap_unit(alpha[j].q * theta[j]);
    }
    const Vector a = sorted_eigenvalues(primal_fiber(params, alpha, kappa));
    const Vector b = sorted_eigenvalues(dual_fiber(params, alpha, theta));
    res.mismatch = std::max(res.mismatch, (a - b).cwiseAbs().maxCoeff());
    ++res.fibers;
  }
  return res;
}

EigenfunctionFamily build_family(const EigenfunctionField& field, const Phase& x, int L) {
  if (L < 0) throw Error(ErrorKind::InvalidArgument, "negative label window");
  const ModelParams& params = field.params();
  EigenfunctionFamily fam;
  fam.x = wrap_phase(x);
  fam.window = L;
  fam.box = origin_cube(params.dimension(), field.scale() + L);
  const SiteSet& support = *field.sites();
  const SiteSet labels = SiteSet::cube(Site(x.size(), 0), L);
  for (const Site& l : labels.sites()) {
    const Phase y = shift_phase(fam.x, l, params.frequency, -1);
    auto v = field.value(y);
    if (!v) continue;
    FamilyMember m;
    m.label = l;
    m.phase = y;
    m.energy = v->energy;
    m.vector = Vector::Zero(static_cast<Eigen::Index>(fam.box->size()));
    for (std::size_t i = 0; i < support.size(); ++i) {
      // psi_l(n) = psi(y; n + l), so site s of the support lands on n = s - l
      const auto k = fam.box->index_of(subtract(support[i], l));
      m.vector(static_cast<Eigen::Index>(*k)) = v->vector(static_cast<Eigen::Index>(i));
    }
    m.tolerance = field.interpolation_bound();
    fam.members.push_back(std::move(m));
  }
  if (fam.members.empty()) throw Error(ErrorKind::EmptyFamily, "no label lands in the good set");
  return fam;
}

GramReport gram_check(const EigenfunctionFamily& family) {
  GramReport r;
  const auto& ms = family.members;
  for (std::size_t a = 0; a < ms.size(); ++a) {
    r.norm_deviation = std::max(r.norm_deviation, std::abs(ms[a].vector.norm() - 1.0));
    for (std::size_t b = a + 1; b < ms.size(); ++b) {
      r.off_diagonal = std::max(r.off_diagonal, std::abs(ms[a].vector.dot(ms[b].vector)));
    }
  }
  return r;
}

ResidualReport eigen_residuals(const EigenfunctionFamily& family, const ModelParams& params,
                               int working_radius) {
  const int R = family.box->cube()->radius - family.window;
  for (const auto& m : family.members) {
    if (R + sup_norm(m.label) > working_radius) {
      throw Error(ErrorKind::BoxTooSmall,
                  fmt::format("working radius {} does not contain a member supported to radius {}",
                              working_radius, R + sup_norm(m.label)));
    }
  }
  const Restriction box = build_dual(params.with_phase(family.x), origin_cube(params.dimension(), working_radius));
  ResidualReport rep;
  for (const auto& m : family.members) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(box.size()));
    std::vector<char> inside(box.size(), 0);
    for (std::size_t i = 0; i < family.box->size(); ++i) {
      const double c = m.vector(static_cast<Eigen::Index>(i));
      const Site& n = (*family.box)[i];
      if (auto k = box.sites->index_of(n)) {
        v(static_cast<Eigen::Index>(*k)) = c;
        // support of the member is the cube of radius R around -label
        if (sup_distance(n, negate(m.label)) <= R) inside[*k] = 1;
      }
    }
    const Vector r = box.matrix * v - m.energy * v;
    double leak = 0.0;
    for (std::size_t i = 0; i < box.size(); ++i) {
      if (!inside[i]) leak += r(static_cast<Eigen::Index>(i)) * r(static_cast<Eigen::Index>(i));
    }
    const double tol = m.tolerance + std::sqrt(leak);
    rep.residuals.push_back(r.norm());
    rep.tolerances.push_back(tol);
    if (r.norm() > tol) rep.within = false;
  }
  return rep;
}

std::vector<Collision> energy_collisions(const EigenfunctionFamily& family, double radius) {
  std::vector<Collision> out;
  const auto& ms = family.members;
  for (std::size_t a = 0; a < ms.size(); ++a)
    for (std::size_t b = a + 1; b < ms.size(); ++b) {
      const double gap = std::abs(ms[a].energy - ms[b].energy);
      if (gap < radius) out.push_back({ms[a].label, ms[b].label, gap});
    }
  return out;
}

double TrigPolynomial::operator()(const Phase& x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    double arg = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) arg += modes[i][j] * x[j];
    s += amplitudes[i] * std::cos(kTwoPi * wrap_unit(arg) + shifts[i]);
  }
  return s;
}

TrigPolynomial TrigPolynomial::random(int dimension, int max_mode, int terms, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> mode(-max_mode, max_mode);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::uniform_real_distribution<double> shift(0.0, kTwoPi);
  TrigPolynomial g;
  for (int t = 0; t < terms; ++t) {
    Site k(static_cast<std::size_t>(dimension));
    for (int& c : k) c = mode(rng);
    g.modes.push_back(k);
    g.amplitudes.push_back(amp(rng) / terms);
    g.shifts.push_back(shift(rng));
  }
  return g;
}

QAssembly::QAssembly(const EigenfunctionField& field, int window) : field_(&field), window_(window) {
  if (window < 0) throw Error(ErrorKind::InvalidArgument, "negative coefficient window");
  labels_ = SiteSet::cube(Site(static_cast<std::size_t>(field.grid().dimension()), 0), window).sites();
}

double QAssembly::coefficient(const Site& k, const Phase& x) const {
  if (sup_norm(k) > window_) return 0.0;
  const Phase y = shift_phase(x, k, field_->params().frequency);
  return field_->component(y, negate(k));
}

double QAssembly::coefficient_mass(const Phase& x) const {
  double s = 0.0;
  for (const Site& k : labels_) {
    const double c = coefficient(k, x);
    s += c * c;
  }
  return s;
}

double QAssembly::apply(const TrigPolynomial& g, const Phase& x) const {
  double s = 0.0;
  for (const Site& k : labels_) {
    const double c = coefficient(k, x);
    if (c != 0.0) s += c * g(shift_phase(x, k, field_->params().frequency));
  }
  return s;
}

double QAssembly::apply_adjoint_q(const TrigPolynomial& g, const Phase& x) const {
  // (Q*h)(x) = chi_G(x) sum_k psi(x; -k) h(x - k alpha) with h = Qg
  double s = 0.0;
  for (const Site& k : labels_) {
    const double c = field_->component(x, negate(k));
    if (c == 0.0) continue;
    s += c * apply(g, shift_phase(x, k, field_->params().frequency, -1));
  }
  return s;
}

IsometryReport q_isometry_check(const QAssembly& q, const std::vector<TrigPolynomial>& tests,
                                const std::vector<Phase>& points) {
  IsometryReport rep;
  const EigenfunctionField& f = q.field();
  const auto origin = *f.sites()->index_of(Site(static_cast<std::size_t>(f.grid().dimension()), 0));
  double leak = 0.0;
  for (std::size_t i = 0; i < f.grid().size(); ++i) {
    if (!f.node_good(i)) continue;
    const double c = f.node_vector(i)(static_cast<Eigen::Index>(origin));
    leak = std::max(leak, 1.0 - c * c);
  }
  rep.mass_tolerance = static_cast<double>(q.labels().size()) * (leak + f.interpolation_bound());
  for (const Phase& x : points) {
    const double chi = f.contains(x) ? 1.0 : 0.0;
    rep.mass_deviation = std::max(rep.mass_deviation, std::abs(q.coefficient_mass(x) - chi));
  }
  if (points.empty()) return rep;
  const double n = static_cast<double>(points.size());
  for (const auto& g : tests) {
    double inner = 0.0, chi_norm = 0.0, q_norm = 0.0;
    for (const Phase& x : points) {
      const double gx = g(x);
      const double chi = f.contains(x) ? 1.0 : 0.0;
      const double qq = q.apply_adjoint_q(g, x);
      const double qg = q.apply(g, x);
      rep.pointwise = std::max(rep.pointwise, std::abs(qq - chi * gx));
      inner += gx * qq;
      chi_norm += chi * gx * gx;
      q_norm += qg * qg;
    }
    rep.quadratic = std::max(rep.quadratic, std::abs(inner - chi_norm) / n);
    rep.norm_gap = std::max(rep.norm_gap, std::abs(q_norm - chi_norm) / n);
  }
  return rep;
}

double intertwining_residual(const QAssembly& q, const std::vector<Phase>& points) {
  const EigenfunctionField& f = q.field();
  const ModelParams& p = f.params();
  double worst = 0.0;
  for (const Phase& x : points) {
    const double w = potential_W(x);
    for (const Site& l : q.labels()) {
      const Phase y = shift_phase(x, l, p.frequency);
      const auto gamma = f.energy(y);
      if (!gamma) continue;  // every term carries chi_G(x + l alpha)
      const double ql = q.coefficient(l, x);
      double hop = 0.0;
      for (const auto& [k, c] : p.potential.coefficients) {
        hop += c * q.coefficient(subtract(l, k), shift_phase(x, k, p.frequency));
      }
      worst = std::max(worst, std::abs(w * ql + p.coupling * hop - *gamma * ql));
    }
  }
  return worst;
}

}  // namespace qps
