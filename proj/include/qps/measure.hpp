#pragma once

#include <cstddef>
#include <vector>

#include "qps/extension.hpp"

namespace qps {

/// Default level-set constant C_d = 4d.
inline double level_set_constant(int dimension) { return 4.0 * dimension; }

/// Smallest central-difference gradient norm over the mask.
double mask_gradient_floor(const GridField& field);

/// Declared grid error of a level-set fraction: 8 d h.
double level_set_slack(const GridField& field);

struct LevelSetEstimate {
  double energy = 0.0;
  double halfwidth = 0.0;
  double fraction = 0.0;  // |{x in mask : gamma(x) in [E - s, E + s]}| as a grid fraction
  double gradient_floor = 0.0;
  double bound = 0.0;     // C_d s / gradient_floor + slack, infinite when the floor is 0
  bool within = true;
};

/// Grid fraction of {x in mask : |gamma(x) - E| <= s}.
double level_set_measure(const GridField& field, double E, double s);

LevelSetEstimate level_set_check(const GridField& field, double E, double s, double constant = 0.0,
                                 double slack = -1.0);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double fraction = 0.0;  // count over the whole grid
  double density = 0.0;   // fraction / width
  bool bounded = true;
};

struct CoverageReport {
  std::vector<HistogramBin> bins;
  double gradient_floor = 0.0;
  double density_cap = 0.0;  // infinite when the mask has no gradient floor
  double covered = 0.0;      // fraction of [-2d, 2d] covered by bins with positive, bounded density
  double mask_fraction = 0.0;
};

/// Pushforward histogram of the field over its mask. Default bins: 256 over [-2d-1, 2d+1].
CoverageReport ac_coverage_report(const GridField& field, int bins = 0, double lo = 0.0, double hi = 0.0);

/// Probability that 2 cos(2 pi x) lands in [a, b] for uniform x.
double arcsine_mass(double a, double b);

}  // namespace qps
