#include "qps/extension.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "qps/parallel.hpp"

namespace qps {

namespace {

constexpr double kPi = std::numbers::pi;

double bump(double r) { return r >= 1.0 ? 0.0 : std::exp(-1.0 / (1.0 - r * r)); }

double bump_slope(double r) {
  if (r >= 1.0) return 0.0;
  const double u = 1.0 - r * r;
  return bump(r) * (-2.0 * r / (u * u));
}

double sphere_area(int d) {
  // surface of the unit sphere in R^d
  return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

template <class F>
double simpson(F&& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// Offsets of the cube of half-width m in Z^d.
std::vector<std::vector<int>> offsets(int d, int m) {
  std::vector<std::vector<int>> out;
  std::vector<int> z(static_cast<std::size_t>(d), -m);
  while (true) {
    out.push_back(z);
    int j = d - 1;
    while (j >= 0 && z[j] == m) z[j--] = -m;
    if (j < 0) break;
    ++z[j];
  }
  return out;
}

double euclid(const std::vector<int>& z) {
  double s = 0.0;
  for (int c : z) s += static_cast<double>(c) * c;
  return std::sqrt(s);
}

}  // namespace

std::size_t GridField::mask_count() const {
  return static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(), [](char c) { return c != 0; }));
}

double GridField::mask_fraction() const {
  return mask.empty() ? 0.0 : static_cast<double>(mask_count()) / static_cast<double>(mask.size());
}

std::vector<double> GridField::gradient(std::size_t i) const {
  const int d = grid.dimension();
  std::vector<double> g(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    g[j] = (values[grid.neighbor(i, j, 1)] - values[grid.neighbor(i, j, -1)]) / (2.0 * grid.step());
  }
  return g;
}

double GridField::gradient_norm(std::size_t i) const {
  double s = 0.0;
  for (double c : gradient(i)) s += c * c;
  return std::sqrt(s);
}

Mollifier::Mollifier(int dimension) : dimension_(dimension) {
  if (dimension < 1) throw Error(ErrorKind::InvalidArgument, "mollifier dimension must be positive");
  const double area = sphere_area(dimension);
  const int d = dimension;
  norm_ = area * simpson([d](double r) { return bump(r) * std::pow(r, d - 1); }, 0.0, 1.0, 200000);
  gradient_l1_ = area * simpson([d](double r) { return std::abs(bump_slope(r)) * std::pow(r, d - 1); }, 0.0, 1.0,
                                200000) /
                 norm_;
}

double Mollifier::operator()(double r) const { return bump(r) / norm_; }

double Mollifier::grid_mass(double t, double h) const {
  const int m = static_cast<int>(std::ceil(t / h));
  double s = 0.0;
  for (const auto& z : offsets(dimension_, m)) s += (*this)(euclid(z) * h / t);
  return s * std::pow(h / t, dimension_);
}

bool Mollifier::support_inside(double t, double h) const {
  const int m = static_cast<int>(std::ceil(t / h)) + 1;
  for (const auto& z : offsets(dimension_, m)) {
    if ((*this)(euclid(z) * h / t) != 0.0 && euclid(z) * h >= t) return false;
  }
  return true;
}

std::vector<int> mask_distance(const TorusGrid& grid, const std::vector<char>& mask,
                               std::vector<std::size_t>* parent) {
  const std::size_t n = grid.size();
  std::vector<int> dist(n, -1);
  if (parent) parent->assign(n, n);
  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < n; ++i)
    if (mask[i]) {
      dist[i] = 0;
      queue.push_back(i);
    }
  const int d = grid.dimension();
  std::vector<std::vector<int>> steps;
  for (auto& z : offsets(d, 1))
    if (std::any_of(z.begin(), z.end(), [](int c) { return c != 0; })) steps.push_back(z);
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    const auto base = grid.multi_index(i);
    std::vector<int> m(base.size());
    for (const auto& z : steps) {
      for (int j = 0; j < d; ++j) m[j] = base[j] + z[j];
      const std::size_t k = grid.flat_index(m);
      if (dist[k] >= 0) continue;
      dist[k] = dist[i] + 1;
      if (parent) (*parent)[k] = i;
      queue.push_back(k);
    }
  }
  return dist;
}

ExtensionResult lipschitz_extension(const GridField& f, double eps, double delta, double C) {
  if (!(eps >= 0.0) || !(delta > 0.0) || !(C > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "extension needs eps >= 0, delta > 0, C > 0");
  }
  const TorusGrid& grid = f.grid;
  const double h = grid.step();
  if (h > delta / 12.0) {
    throw Error(ErrorKind::ResolutionTooCoarse, "grid step exceeds delta/12");
  }
  if (f.mask_count() == 0) throw Error(ErrorKind::MaskEmpty, "extension needs a nonempty set");
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.mask[i] && std::abs(f.values[i]) > eps * (1.0 + 1e-12)) {
      throw Error(ErrorKind::PreconditionViolated, "|f| exceeds eps on the prescribed set");
    }
  }
  const int d = grid.dimension();
  const Mollifier eta(d);
  const std::vector<int> dist = mask_distance(grid, f.mask);
  // continuation region: within delta/3 of A; outside it f_1 = 0
  const auto reach = static_cast<int>(std::floor(delta / (3.0 * h) + 1e-9));
  std::vector<double> f1(f.size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i)
    if (dist[i] <= reach) f1[i] = f.values[i];

  ExtensionResult res;
  res.field = GridField(grid);
  res.field.mask = f.mask;
  parallel_for(f.size(), [&](std::size_t i) {
    if (f.mask[i]) {
      res.field.values[i] = f.values[i];
      return;
    }
    const double s = std::min(dist[i] * h, delta / 6.0);
    const int m = static_cast<int>(std::ceil(s / h));
    const auto base = grid.multi_index(i);
    std::vector<int> y(base.size());
    double num = 0.0, den = 0.0;
    for (const auto& z : offsets(d, m)) {
      const double w = eta(euclid(z) * h / s);
      if (w == 0.0) continue;
      for (int j = 0; j < d; ++j) y[j] = base[j] - z[j];
      num += w * f1[grid.flat_index(y)];
      den += w;
    }
    // normalizing the discrete weights keeps constants exact at small s
    res.field.values[i] = num / den;
  });
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.mask[i]) continue;
    res.max_gradient = std::max(res.max_gradient, res.field.gradient_norm(i));
  }
  res.gradient_bound = 6.0 * C * eta.gradient_l1() * eps / delta;
  res.quadrature_slack = res.gradient_bound * h / delta;
  return res;
}

std::vector<double> kappa_set_ladder() {
  std::vector<double> out;
  for (int i = 0; i <= 40; ++i) out.push_back(2.0 * kPi * std::ldexp(1.0, -i));
  return out;
}

KappaSet build_kappa_set(int dimension, int resolution, double eps) {
  if (resolution < 16) throw Error(ErrorKind::InvalidArgument, "kappa set needs resolution >= 16");
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be positive");
  KappaSet ks;
  ks.set = GridField(TorusGrid(dimension, resolution));
  for (std::size_t i = 0; i < ks.set.size(); ++i) {
    const Phase x = ks.set.grid.point(i);
    double s = 0.0;
    for (double c : x) s += 16.0 * kPi * kPi * std::pow(std::sin(2.0 * kPi * c), 2);
    ks.set.values[i] = std::sqrt(s);
  }
  const double target = 1.0 - std::sqrt(eps);
  const auto ladder = kappa_set_ladder();
  for (double k : ladder) {
    std::size_t c = 0;
    for (double v : ks.set.values) c += v >= 2.0 * k;
    ks.kappa = k;
    if (static_cast<double>(c) >= target * static_cast<double>(ks.set.size())) break;
  }
  for (std::size_t i = 0; i < ks.set.size(); ++i) ks.set.mask[i] = ks.set.values[i] >= 2.0 * ks.kappa;
  return ks;
}

GammaField build_gamma_field(const EigenfunctionField& field, const KappaSet& kset, const GammaOptions& options) {
  const TorusGrid& grid = field.grid();
  if (kset.set.grid.resolution() != grid.resolution() || kset.set.grid.dimension() != grid.dimension()) {
    throw Error(ErrorKind::InvalidArgument, "kappa set and field use different grids");
  }
  const ScaleSchedule& sched = field.schedule();
  const int J = field.levels();
  const bool asymptotic = sched.rule == ScaleRule::Power && sched.exponent == 10;
  const std::size_t n = grid.size();
  GammaField out;
  out.kappa = kset.kappa;

  GridField prev(grid);
  for (std::size_t i = 0; i < n; ++i) prev.values[i] = potential_W(grid.point(i));
  prev.mask = kset.set.mask;
  double floor = kset.kappa;

  for (int j = 1; j <= J; ++j) {
    LevelReport rep;
    rep.level = j;
    rep.delta = options.deltas.size() >= static_cast<std::size_t>(j) ? options.deltas[j - 1] : sched.deltas[j - 1];
    floor -= sched.deltas[j - 1];
    rep.gradient_floor = floor;

    GridField phi(grid);
    for (std::size_t i = 0; i < n; ++i) phi.mask[i] = kset.set.mask[i] && field.node_levels(i) >= j;
    if (phi.mask_count() == 0) throw Error(ErrorKind::MaskEmpty, fmt::format("no kappa-set node certified at level {}", j));

    // E_j near the prescribed set: own certificate when present, else tracked from the parent
    std::vector<std::size_t> parent;
    const std::vector<int> dist = mask_distance(grid, phi.mask, &parent);
    const auto reach = static_cast<int>(std::floor(rep.delta / (3.0 * grid.step()) + 1e-9));
    std::vector<double> energy(n, std::numeric_limits<double>::quiet_NaN());
    std::vector<Vector> vec(n);
    const SiteSetPtr sites = origin_cube(grid.dimension(), static_cast<int>(sched.scales[j - 1]));
    std::vector<std::vector<std::size_t>> rings(static_cast<std::size_t>(reach) + 1);
    for (std::size_t i = 0; i < n; ++i)
      if (dist[i] >= 0 && dist[i] <= reach) rings[static_cast<std::size_t>(dist[i])].push_back(i);
    for (std::size_t i : rings[0]) {
      energy[i] = field.node_energy(i, j);
      vec[i] = field.node_level_vector(i, j);
    }
    std::size_t tracked = 0;
    for (std::size_t r = 1; r < rings.size(); ++r) {
      const auto& ring = rings[r];
      std::vector<char> did(ring.size(), 0);
      parallel_for(ring.size(), [&](std::size_t t) {
        const std::size_t i = ring[t];
        if (field.node_levels(i) >= j) {
          energy[i] = field.node_energy(i, j);
          vec[i] = field.node_level_vector(i, j);
          return;
        }
        const std::size_t p = parent[i];
        const TrackedPair tp =
            track_eigenpair(field.params().with_phase(grid.point(i)), sites, energy[p], &vec[p]);
        energy[i] = tp.energy;
        vec[i] = tp.eigenvector;
        did[t] = 1;
      });
      for (char c : did) tracked += c != 0;
    }
    rep.tracked = tracked;

    // the lemma's eps and C are read off the continued data on the whole neighborhood
    for (std::size_t i = 0; i < n; ++i) {
      if (std::isnan(energy[i])) continue;
      phi.values[i] = prev.values[i] - energy[i];
      rep.eps = std::max(rep.eps, std::abs(phi.values[i]));
    }
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::isnan(energy[i])) continue;
      bool inner = true;
      for (int a = 0; a < grid.dimension() && inner; ++a)
        inner = !std::isnan(energy[grid.neighbor(i, a, 1)]) && !std::isnan(energy[grid.neighbor(i, a, -1)]);
      if (inner) slope = std::max(slope, phi.gradient_norm(i));
    }
    rep.lipschitz = rep.eps > 0.0 ? std::max(options.C, slope * rep.delta / rep.eps) : options.C;
    const ExtensionResult ext = lipschitz_extension(phi, rep.eps, rep.delta, rep.lipschitz);
    rep.extension_gradient = ext.max_gradient;
    rep.extension_bound = ext.gradient_bound + ext.quadrature_slack;

    GridField cur(grid);
    cur.mask = phi.mask;
    for (std::size_t i = 0; i < n; ++i) {
      // copied on the prescribed set so that property (i) holds bit for bit
      cur.values[i] = phi.mask[i] ? field.node_energy(i, j) : prev.values[i] - ext.field.values[i];
      if (phi.mask[i] && cur.values[i] != field.node_energy(i, j)) rep.exact_on_set = false;
    }
    rep.change_bound = asymptotic ? std::pow(sched.deltas[j - 1], 10) : rep.eps * (1.0 + 1e-12);
    rep.min_gradient = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (!kset.set.mask[i]) continue;
      rep.max_change = std::max(rep.max_change, std::abs(cur.values[i] - prev.values[i]));
      if (phi.mask[i]) rep.min_gradient = std::min(rep.min_gradient, cur.gradient_norm(i));
    }
    rep.change_ok = rep.max_change <= rep.change_bound;
    if (floor > 0.0) rep.gradient_ok = rep.min_gradient >= floor;
    out.reports.push_back(rep);
    out.levels.push_back(cur);
    prev = std::move(cur);
  }
  out.gamma = prev;
  return out;
}

}  // namespace qps
