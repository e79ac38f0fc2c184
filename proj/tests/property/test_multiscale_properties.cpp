#include <doctest.h>

#include "qps/multiscale.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace qps;

TEST_CASE("power schedule reproduces the closed formulas") {
  std::mt19937_64 rng(301);
  for (int t = 0; t < 50; ++t) {
    // R_2 = R_1^10 must fit in 64 bits
    const std::int64_t r1 = gen::integer(rng, 2, 70);
    const double lambda = std::pow(10.0, gen::uniform(rng, -12, -1));
    auto s = ScaleSchedule::power(r1, 10, lambda, 2);
    std::int64_t r = r1;
    for (int j = 1; j <= s.levels(); ++j) {
      CHECK(s.scale(j) == r);
      const double base = std::pow(lambda, 1.0 / 20.0);
      const double expected = j == 1 ? base : base * std::exp(-std::sqrt(static_cast<double>(s.scale(j - 1))));
      CHECK(s.delta(j) == expected);
      std::int64_t next = 1;
      for (int e = 0; e < 10; ++e) next *= r;
      r = next;
    }
  }
}

TEST_CASE("initial step bounds across a coupling decade") {
  std::mt19937_64 rng(302);
  int accepted = 0;
  for (int t = 0; t < 200 && accepted < 40; ++t) {
    const double x = gen::uniform(rng), alpha = gen::uniform(rng, 0.05, 0.95);
    const double kappa = 0.05;
    const double lambda = 1e-3 * std::pow(10.0, gen::uniform(rng, 0, 1)) * (kappa / 0.05);
    auto params = gen::cosine(lambda, {alpha}, {x});
    const int R = gen::integer(rng, 3, 8);
    if (separation_margin(params.phase, params.frequency, R) < kappa) continue;
    auto c = initial_step(params, R, kappa);
    const double tnorm = hopping_norm_bound(params.potential);
    CHECK(c.vector_diff <= 2.0 * tnorm * lambda / kappa);
    CHECK(c.energy_diff <= lambda * params.potential.sup_norm);
    CHECK(std::abs(c.eigenvector.norm() - 1.0) <= 1e-10);
    ++accepted;
  }
  CHECK(accepted == 40);
}

TEST_CASE("vector steps shrink along desk trajectories") {
  // Literal shell scans at gamma = 0.4 essentially never pass at desk radii, so
  // the property is asserted on every complete trajectory, which contains the
  // passing-scan case. Couplings are large enough that the steps sit above
  // the roundoff floor.
  std::mt19937_64 rng(303);
  MultiscaleOptions opts;
  opts.kappa = 0.15;
  opts.run_scan = false;
  int in_scope = 0;
  for (int t = 0; t < 60; ++t) {
    const double lambda = gen::uniform(rng, 0.005, 0.03);
    auto params = gen::cosine(lambda, {0.618034}, {gen::uniform(rng)});
    auto traj = run_multiscale(params, ScaleSchedule::geometric(4, 2, lambda, 3), opts);
    if (!traj.complete(3)) continue;
    ++in_scope;
    CAPTURE(lambda);
    CAPTURE(params.phase[0]);
    for (std::size_t j = 2; j < traj.levels.size(); ++j) {
      CHECK(traj.levels[j].vector_diff <= traj.levels[j - 1].vector_diff + 1e-14);
    }
  }
  CHECK(in_scope >= 20);
}

TEST_CASE("analytic gradient against central differences") {
  std::mt19937_64 rng(304);
  MultiscaleOptions opts;
  opts.kappa = 0.05;
  opts.run_scan = false;
  int tested = 0;
  for (int t = 0; t < 200 && tested < 20; ++t) {
    const int d = 1 + t % 2;
    auto alpha = gen::phase(rng, d);
    auto x = gen::phase(rng, d);
    const double lambda = std::pow(10.0, gen::uniform(rng, -3, -2));
    auto schedule = ScaleSchedule::geometric(d == 1 ? 6 : 4, 2, lambda, 2);
    auto at = [&](const Phase& y) { return run_multiscale(gen::cosine(lambda, alpha, y), schedule, opts); };
    auto traj = at(x);
    if (!traj.complete(2)) continue;
    const auto g = eigenvalue_gradient(traj.levels.back(), gen::cosine(lambda, alpha, x));
    bool ok = true;
    for (int a = 0; a < d && ok; ++a) {
      Phase up = x, down = x;
      up[a] += 1e-6;
      down[a] -= 1e-6;
      auto tu = at(up), td = at(down);
      if (!tu.complete(2) || !td.complete(2)) {
        ok = false;
        break;
      }
      const double fd = (tu.levels.back().energy - td.levels.back().energy) / 2e-6;
      CHECK(std::abs(g[static_cast<std::size_t>(a)] - fd) <= 1e-5 * std::max(std::abs(fd), 1e-3));
    }
    tested += ok;
  }
  CHECK(tested == 20);
}
