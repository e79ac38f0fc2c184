#include "qps/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace qps {

double mask_gradient_floor(const GridField& field) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < field.size(); ++i)
    if (field.mask[i]) m = std::min(m, field.gradient_norm(i));
  return std::isinf(m) ? 0.0 : m;
}

double level_set_slack(const GridField& field) {
  return 8.0 * field.grid.dimension() * field.grid.step();
}

double level_set_measure(const GridField& field, double E, double s) {
  if (!(s > 0.0)) throw Error(ErrorKind::InvalidArgument, "level-set half-width must be positive");
  std::size_t c = 0;
  for (std::size_t i = 0; i < field.size(); ++i)
    if (field.mask[i] && std::abs(field.values[i] - E) <= s) ++c;
  return static_cast<double>(c) / static_cast<double>(field.size());
}

LevelSetEstimate level_set_check(const GridField& field, double E, double s, double constant, double slack) {
  LevelSetEstimate est;
  est.energy = E;
  est.halfwidth = s;
  est.fraction = level_set_measure(field, E, s);
  est.gradient_floor = mask_gradient_floor(field);
  const double cd = constant > 0.0 ? constant : level_set_constant(field.grid.dimension());
  const double sl = slack >= 0.0 ? slack : level_set_slack(field);
  est.bound = est.gradient_floor > 0.0 ? cd * s / est.gradient_floor + sl : std::numeric_limits<double>::infinity();
  est.within = est.fraction <= est.bound;
  return est;
}

CoverageReport ac_coverage_report(const GridField& field, int bins, double lo, double hi) {
  const int d = field.grid.dimension();
  if (bins <= 0) bins = 256;
  if (!(hi > lo)) {
    lo = -2.0 * d - 1.0;
    hi = 2.0 * d + 1.0;
  }
  CoverageReport rep;
  rep.mask_fraction = field.mask_fraction();
  const double width = (hi - lo) / bins;
  rep.bins.resize(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    rep.bins[b].lo = lo + b * width;
    rep.bins[b].hi = b + 1 == bins ? hi : lo + (b + 1) * width;
  }
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (!field.mask[i]) continue;
    const double v = field.values[i];
    if (v < lo || v >= hi) continue;
    auto b = static_cast<int>(std::floor((v - lo) / width));
    b = std::clamp(b, 0, bins - 1);
    ++rep.bins[b].count;
  }
  rep.gradient_floor = field.mask_count() ? mask_gradient_floor(field) : 0.0;
  // a bin of half-width w/2 is a level set, so its density is at most C_d / (2 floor) + slack / w
  rep.density_cap = rep.gradient_floor > 0.0
                        ? level_set_constant(d) / (2.0 * rep.gradient_floor) + level_set_slack(field) / width
                        : std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(field.size());
  double covered = 0.0;
  for (auto& bin : rep.bins) {
    bin.fraction = static_cast<double>(bin.count) / n;
    bin.density = bin.fraction / (bin.hi - bin.lo);
    bin.bounded = bin.density <= rep.density_cap;
    if (bin.count > 0 && bin.bounded) {
      const double a = std::max(bin.lo, -2.0 * d);
      const double b = std::min(bin.hi, 2.0 * d);
      if (b > a) covered += b - a;
    }
  }
  rep.covered = covered / (4.0 * d);
  return rep;
}

double arcsine_mass(double a, double b) {
  const auto clip = [](double t) { return std::clamp(t / 2.0, -1.0, 1.0); };
  return (std::asin(clip(b)) - std::asin(clip(a))) / std::numbers::pi;
}

}  // namespace qps
