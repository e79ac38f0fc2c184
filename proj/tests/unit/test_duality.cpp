#include <doctest.h>

#include <cmath>
#include <complex>

#include "qps/duality.hpp"
#include "qps/error.hpp"
#include "support/oracles.hpp"

using namespace qps;

namespace {

ModelParams cosine_model(double lambda, double alpha, double x) {
  return ModelParams::make(cosine_potential(1), lambda, {alpha}, {x});
}

EigenfunctionField small_field(double lambda, int resolution, double kappa = 0.3) {
  MultiscaleOptions opts;
  opts.kappa = kappa;
  opts.run_scan = false;
  return EigenfunctionField::sample(cosine_model(lambda, 0.618034, 0.0), resolution,
                                    ScaleSchedule::geometric(6, 2, lambda, 2), opts);
}

std::size_t first_good(const EigenfunctionField& f) {
  for (std::size_t i = 0; i < f.grid().size(); ++i)
    if (f.node_good(i)) return i;
  FAIL("no good node");
  return 0;
}

}  // namespace

TEST_CASE("rational approximation") {
  auto r = rationalize(0.4);
  CHECK(r.p == 2);
  CHECK(r.q == 5);
  CHECK(rationalize(1.0 / 3.0).q == 3);
  CHECK_THROWS_AS(rationalize(0.618034), Error);
  CHECK_THROWS_AS(fourier_conjugation_check(cosine_model(0.3, 0.618034, 0.1)), Error);
}

TEST_CASE("Fourier conjugation on rational frequencies") {
  SUBCASE("zero coupling, period three") {
    auto params = cosine_model(0.0, 1.0 / 3.0, 0.2);
    CHECK(fourier_conjugation_check(params).mismatch <= 1e-10);
    // free fiber with Bloch twist kappa: eigenvalues 2cos(2 pi (kappa + j) / 3)
    const double kappa = 0.37;
    ComplexMatrix fiber = primal_fiber(params, {{1, 3}}, {kappa});
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(fiber);
    std::vector<double> expected;
    for (int j = 0; j < 3; ++j) expected.push_back(oracle::two_cos((kappa + j) / 3.0));
    expected = oracle::sorted(expected);
    for (int j = 0; j < 3; ++j) CHECK(es.eigenvalues()(j) == doctest::Approx(expected[j]).epsilon(1e-12));
  }
  SUBCASE("self-dual point") {
    CHECK(fourier_conjugation_check(cosine_model(1.0, 0.5, 0.1)).mismatch <= 1e-10);
  }
  SUBCASE("period five") {
    auto c = fourier_conjugation_check(cosine_model(0.3, 0.4, 0.1));
    CHECK(c.mismatch <= 1e-8);
    REQUIRE(c.periods.size() == 1);
    CHECK(c.periods[0] == 5);
  }
}

TEST_CASE("eigenfunction family") {
  SUBCASE("zero coupling gives translated deltas") {
    auto f = small_field(0.0, 32, 0.05);
    const Phase x = f.grid().point(first_good(f));
    auto fam = build_family(f, x, 3);
    REQUIRE(!fam.members.empty());
    for (const auto& m : fam.members) {
      const auto at = *fam.box->index_of(negate(m.label));
      for (Eigen::Index i = 0; i < m.vector.size(); ++i) CHECK(m.vector(i) == (i == static_cast<Eigen::Index>(at) ? 1.0 : 0.0));
    }
    CHECK(gram_check(fam).deviation() == 0.0);
    // the member energy is the sampled field read off-grid, so the residual of
    // delta_{-l} is exactly the interpolation error of W at x - l alpha
    auto rr = eigen_residuals(fam, f.params(), f.scale() + 3);
    for (std::size_t i = 0; i < fam.members.size(); ++i) {
      const auto& m = fam.members[i];
      const double exact = oracle::W_at(x, negate(m.label), {0.618034});
      CHECK(rr.residuals[i] == doctest::Approx(std::abs(exact - m.energy)).epsilon(1e-9));
      if (sup_norm(m.label) == 0) CHECK(rr.residuals[i] <= 1e-15);
      CHECK(rr.residuals[i] <= rr.tolerances[i]);
    }
  }
  SUBCASE("single label") {
    auto f = small_field(0.05, 32);
    const std::size_t node = first_good(f);
    auto fam = build_family(f, f.grid().point(node), 0);
    REQUIRE(fam.members.size() == 1);
    CHECK(gram_check(fam).off_diagonal == 0.0);
    auto rr = eigen_residuals(fam, f.params(), f.scale());
    CHECK(rr.residuals[0] == doctest::Approx(f.node_residual(node)).epsilon(1e-6));
    CHECK(rr.residuals[0] <= 1e-12);
    CHECK_THROWS_AS(eigen_residuals(fam, f.params(), f.scale() - 1), Error);
  }
  SUBCASE("small coupling, window three") {
    auto f = small_field(0.05, 64);
    auto fam = build_family(f, f.grid().point(first_good(f)), 3);
    auto g = gram_check(fam);
    CAPTURE(fam.members.size());
    CHECK(g.deviation() <= gram_envelope(0.05));
    CHECK(gram_envelope(0.05) == doctest::Approx(12 * std::pow(0.05, 0.1)));
    auto rr = eigen_residuals(fam, f.params(), f.scale() + 3);
    CHECK(rr.within);
    for (std::size_t i = 0; i < rr.residuals.size(); ++i) CHECK(rr.residuals[i] <= rr.tolerances[i]);
    CHECK(energy_collisions(fam, 1e-12).empty());
  }
  SUBCASE("no good label") {
    auto f = small_field(0.05, 16, 1.9);
    CHECK(f.good_fraction() == 0.0);
    CHECK_THROWS_AS(build_family(f, {0.1}, 1), Error);
  }
}

TEST_CASE("Q assembly") {
  SUBCASE("zero coupling is multiplication by the good set") {
    auto f = small_field(0.0, 32, 0.05);
    QAssembly q(f, 6);
    std::vector<Phase> nodes;
    for (std::size_t i = 0; i < f.grid().size(); ++i) nodes.push_back(f.grid().point(i));
    auto tests = std::vector<TrigPolynomial>{TrigPolynomial::random(1, 3, 4, 5), TrigPolynomial::random(1, 3, 4, 6)};
    auto iso = q_isometry_check(q, tests, nodes);
    CHECK(iso.pointwise == 0.0);
    CHECK(iso.quadratic <= 1e-15);
    CHECK(intertwining_residual(q, nodes) <= 1e-14);
    for (const auto& x : nodes) {
      CHECK(q.coefficient({0}, x) == (f.contains(x) ? 1.0 : 0.0));
      CHECK(q.coefficient({2}, x) == 0.0);
    }
  }
  SUBCASE("zero test function") {
    auto f = small_field(0.05, 32);
    QAssembly q(f, 6);
    TrigPolynomial zero;
    auto iso = q_isometry_check(q, {zero}, {{0.1}, {0.5}});
    CHECK(iso.pointwise == 0.0);
    CHECK(iso.quadratic == 0.0);
  }
  SUBCASE("coefficients vanish off the good set") {
    auto f = small_field(0.05, 32);
    QAssembly q(f, 6);
    for (std::size_t i = 0; i < f.grid().size(); ++i) {
      const Phase x = f.grid().point(i);
      for (int k = -6; k <= 6; ++k) {
        const Phase y = shift_phase(x, {k}, f.params().frequency);
        if (!f.contains(y)) CHECK(q.coefficient({k}, x) == 0.0);
      }
    }
  }
  SUBCASE("coefficient mass on the nodes") {
    auto f = small_field(0.05, 32);
    QAssembly q(f, 6);
    std::vector<Phase> nodes;
    for (std::size_t i = 0; i < f.grid().size(); ++i) nodes.push_back(f.grid().point(i));
    auto iso = q_isometry_check(q, {TrigPolynomial::random(1, 2, 3, 1)}, nodes);
    CHECK(iso.mass_deviation <= iso.mass_tolerance);
  }
}

TEST_CASE("trigonometric test functions") {
  auto g = TrigPolynomial::random(2, 3, 4, 42);
  auto h = TrigPolynomial::random(2, 3, 4, 42);
  CHECK(g.modes == h.modes);
  CHECK(g.amplitudes == h.amplitudes);
  double direct = 0.0;
  const Phase x{0.3, 0.7};
  for (std::size_t i = 0; i < g.modes.size(); ++i)
    direct += g.amplitudes[i] * std::cos(2 * M_PI * (g.modes[i][0] * x[0] + g.modes[i][1] * x[1]) + g.shifts[i]);
  CHECK(g(x) == doctest::Approx(direct).epsilon(1e-14));
}
