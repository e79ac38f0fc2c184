#include <doctest.h>

#include "qps/measure.hpp"
#include "support/generators.hpp"

using namespace qps;

namespace {

// Random union of arcs (d = 1) or discs (d = 2) with smooth data of size eps.
GridField random_case(std::mt19937_64& rng, int d, int resolution, double eps) {
  GridField f(TorusGrid(d, resolution));
  std::vector<Phase> centers;
  std::vector<double> radii;
  const int blobs = gen::integer(rng, 1, 3);
  for (int b = 0; b < blobs; ++b) {
    centers.push_back(gen::phase(rng, d));
    radii.push_back(gen::uniform(rng, 0.1, 0.25));
  }
  const Phase shift = gen::phase(rng, d);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Phase x = f.grid.point(i);
    double v = 1.0;
    for (int a = 0; a < d; ++a) v *= std::sin(2 * M_PI * (x[static_cast<std::size_t>(a)] + shift[static_cast<std::size_t>(a)]));
    f.values[i] = eps * v;
    for (std::size_t b = 0; b < centers.size(); ++b) {
      double r2 = 0.0;
      for (int a = 0; a < d; ++a) {
        double dx = std::abs(x[static_cast<std::size_t>(a)] - centers[b][static_cast<std::size_t>(a)]);
        dx = std::min(dx, 1.0 - dx);
        r2 += dx * dx;
      }
      if (r2 <= radii[b] * radii[b]) f.mask[i] = 1;
    }
  }
  if (f.mask_count() == 0) f.mask[0] = 1;
  return f;
}

}  // namespace

TEST_CASE("extension is exact on the mask and within its gradient bound") {
  std::mt19937_64 rng(501);
  for (int t = 0; t < 10; ++t) {
    const int d = 1 + t % 2;
    const double delta = d == 1 ? gen::uniform(rng, 0.05, 0.2) : gen::uniform(rng, 0.4, 0.5);
    const int res = d == 1 ? 512 : 48;
    const double eps = gen::uniform(rng, 1e-3, 1e-1);
    auto f = random_case(rng, d, res, eps);
    // the data's own Lipschitz constant sets C
    const double C = std::max(1.0, 2 * M_PI * std::sqrt(static_cast<double>(d)) * delta);
    auto r = lipschitz_extension(f, eps, delta, C);
    CAPTURE(d);
    CAPTURE(delta);
    for (std::size_t i = 0; i < f.size(); ++i)
      if (f.mask[i]) CHECK(r.field.values[i] == f.values[i]);
    CHECK(r.mismatch_on_mask == 0.0);
    CHECK(r.within());
  }
}

TEST_CASE("mollifier mass and support") {
  std::mt19937_64 rng(502);
  for (int t = 0; t < 10; ++t) {
    const int d = 1 + t % 2;
    Mollifier eta(d);
    const double delta = gen::uniform(rng, 0.05, 0.5);
    for (double s : {delta / 6, delta / 12}) {
      const double h = s / (d == 1 ? 400 : 60);
      CHECK(std::abs(eta.grid_mass(s, h) - 1.0) <= 1e-8);
      CHECK(eta.support_inside(s, h));
    }
  }
}

TEST_CASE("refinement moves off-mask values by O(h)") {
  std::mt19937_64 rng(503);
  for (int t = 0; t < 5; ++t) {
    const double eps = 0.01, delta = 0.1;
    const std::uint64_t seed = rng();
    std::mt19937_64 a(seed), b(seed);
    auto coarse = random_case(a, 1, 256, eps);
    auto fine = random_case(b, 1, 512, eps);
    auto rc = lipschitz_extension(coarse, eps, delta, 1.0);
    auto rf = lipschitz_extension(fine, eps, delta, 1.0);
    double change = 0.0;
    for (std::size_t i = 0; i < coarse.size(); ++i) {
      if (coarse.mask[i] || fine.mask[2 * i]) {
        CHECK(rf.field.values[2 * i] == fine.values[2 * i]);
        continue;
      }
      change = std::max(change, std::abs(rc.field.values[i] - rf.field.values[2 * i]));
    }
    // a Lipschitz field sampled on two grids: the difference is bounded by a
    // few grid steps times the declared gradient bound
    CHECK(change <= 4.0 * rc.gradient_bound / 256.0);
  }
}

TEST_CASE("level-set bound on eigenvalue fields") {
  std::mt19937_64 rng(504);
  MultiscaleOptions opts;
  opts.kappa = 0.05;
  opts.run_scan = false;
  for (double lambda : {0.0, 1e-3, 1e-2}) {
    auto field = EigenfunctionField::sample(gen::cosine(lambda, {0.618034}, {0.0}), 256,
                                            ScaleSchedule::geometric(6, 2, lambda, 2), opts);
    GammaOptions go;
    go.deltas = {0.1, 0.1};
    auto gf = build_gamma_field(field, build_kappa_set(1, 256, 0.04), go);
    for (int k = 0; k < 20; ++k) {
      const double E = gen::uniform(rng, -2.2, 2.2), s = std::pow(10.0, gen::uniform(rng, -3, -0.5));
      auto est = level_set_check(gf.gamma, E, s);
      CAPTURE(E);
      CAPTURE(s);
      CHECK(est.within);
    }
  }
}
