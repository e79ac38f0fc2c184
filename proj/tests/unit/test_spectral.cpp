#include <doctest.h>

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "qps/error.hpp"
#include "qps/spectral.hpp"
#include "support/oracles.hpp"

using namespace qps;

namespace {

ModelParams cosine_model(double lambda, double alpha, double x) {
  return ModelParams::make(cosine_potential(1), lambda, {alpha}, {x});
}

Spectrum spectrum_of(std::vector<double> values) {
  Spectrum s;
  s.eigenvalues = Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  return s;
}

double identity_defect(const Matrix& h, double energy, const Matrix& g) {
  const Matrix shifted = h - energy * Matrix::Identity(h.rows(), h.cols());
  return (shifted * g - Matrix::Identity(h.rows(), h.cols())).cwiseAbs().maxCoeff();
}

// Midpoint of the widest gap between consecutive eigenvalues.
double widest_gap_midpoint(const Vector& ev) {
  double best = -1.0, mid = 0.0;
  for (Eigen::Index i = 0; i + 1 < ev.size(); ++i) {
    if (ev(i + 1) - ev(i) > best) {
      best = ev(i + 1) - ev(i);
      mid = 0.5 * (ev(i) + ev(i + 1));
    }
  }
  return mid;
}

}  // namespace

TEST_CASE("symmetric eigensolver") {
  SUBCASE("diagonal input") {
    Matrix m = Vector::Map(std::vector<double>{-1, 0, 2}.data(), 3).asDiagonal();
    auto s = eig_sym(m);
    CHECK(s.eigenvalues(0) == -1.0);
    CHECK(s.eigenvalues(1) == 0.0);
    CHECK(s.eigenvalues(2) == 2.0);
    CHECK((s.eigenvectors.cwiseAbs() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("swap matrix") {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    auto s = eig_sym(m);
    CHECK(s.eigenvalues(0) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(s.eigenvalues(1) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("five site dual box against bisection") {
    auto box = build_dual(cosine_model(0.1, 0.618034, 0.13), Site{0}, 2);
    std::vector<double> diag, off;
    for (int i = 0; i < 5; ++i) diag.push_back(box.matrix(i, i));
    for (int i = 0; i < 4; ++i) off.push_back(box.matrix(i, i + 1));
    // nearest-neighbor hopping only, so the box is tridiagonal
    CHECK(box.matrix(0, 2) == 0.0);
    auto ref = oracle::tridiagonal_bisection(diag, off);
    auto s = eig_sym(box);
    for (int i = 0; i < 5; ++i) CHECK(std::abs(s.eigenvalues(i) - ref[static_cast<std::size_t>(i)]) < 1e-10);
  }
}

TEST_CASE("simplicity windows") {
  auto a = certify_simple(spectrum_of({0, 1, 3}), 1.0, 0.5);
  CHECK(a.count == 1);
  CHECK(a.simple);
  auto b = certify_simple(spectrum_of({0, 1, 1.2}), 1.0, 0.5);
  CHECK(b.count == 2);
  CHECK_FALSE(b.simple);
  auto c = certify_simple(spectrum_of({0, 1, 3}), 2.0, 0.5);
  CHECK(c.count == 0);
  CHECK_FALSE(c.simple);
  // closed interval: an endpoint eigenvalue counts
  CHECK(certify_simple(spectrum_of({0, 1, 1.5}), 1.0, 0.5).count == 2);
}

TEST_CASE("Green's function") {
  SUBCASE("diagonal box") {
    auto params = cosine_model(0.0, 0.618034, 0.13);
    auto box = build_dual(params, Site{0}, 4);
    const double E = 0.05;
    auto g = greens(box, E);
    for (int i = 0; i < 9; ++i) {
      for (int j = 0; j < 9; ++j) {
        const double expected = i == j ? 1.0 / (oracle::W_at({0.13}, {i - 4}, {0.618034}) - E) : 0.0;
        CHECK(std::abs(g(i, j) - expected) <= 1e-12 * (1 + std::abs(expected)));
      }
    }
  }
  SUBCASE("single site") {
    Matrix m(1, 1);
    m << 2.0;
    Restriction r{origin_cube(1, 0), m};
    CHECK(greens(r, 0.0)(0, 0) == 0.5);
  }
  SUBCASE("free Laplacian at E = 3") {
    auto box = build_primal(cosine_model(0.0, 0.3, 0.0), Site{0}, 1);
    auto g = greens(box, 3.0);
    CHECK(identity_defect(box.matrix, 3.0, g) < 1e-10);
    auto inv = oracle::inverse(oracle::to_dense(box.matrix - 3.0 * Matrix::Identity(3, 3)));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(std::abs(g(i, j) - inv[i][j]) < 1e-12);
  }
  SUBCASE("singular shift") {
    Matrix m(1, 1);
    m << 2.0;
    Restriction r{origin_cube(1, 0), m};
    CHECK_THROWS_AS(greens(r, 2.0), Error);
  }
}

TEST_CASE("suitability predicate") {
  SUBCASE("diagonal box far from the spectrum") {
    auto box = build_dual(cosine_model(0.0, 0.618034, 0.13), Site{0}, 6);
    auto r = test_suitability(box, 4.5, 3.0, 0.5);
    CHECK(r.pass);
    CHECK(r.resolvent_norm <= 1.0);
  }
  SUBCASE("energy next to an eigenvalue") {
    auto box = build_dual(cosine_model(0.05, 0.618034, 0.13), Site{0}, 6);
    auto s = eig_sym(box);
    const double E = s.eigenvalues(3) + 0.5 * std::exp(-std::pow(6.0, 0.5));
    auto r = test_suitability(box, E, 0.5, 0.5);
    CHECK_FALSE(r.resolvent_ok);
    CHECK_FALSE(r.pass);
  }
  SUBCASE("mid-gap energy at R = 12 against the dense inverse and golden flag") {
    auto box = build_dual(cosine_model(0.05, 0.618034, 0.13), Site{0}, 12);
    const double E = widest_gap_midpoint(eig_sym(box).eigenvalues);
    auto r = test_suitability(box, E, 0.5, 0.5);

    auto shifted = oracle::to_dense(box.matrix - E * Matrix::Identity(box.matrix.rows(), box.matrix.cols()));
    auto inv = oracle::inverse(shifted);
    auto ev = oracle::jacobi_eigen(shifted);
    double smallest = INFINITY;
    for (double v : ev) smallest = std::min(smallest, std::abs(v));
    const double norm = 1.0 / smallest;
    bool decay = true;
    for (int i = 0; i < 25; ++i)
      for (int j = 0; j < 25; ++j)
        if (2 * std::abs(i - j) >= 12 && std::abs(inv[i][j]) > std::exp(-0.5 * std::abs(i - j))) decay = false;
    const bool pass = norm <= std::exp(std::sqrt(12.0)) && decay;

    CHECK(r.resolvent_norm == doctest::Approx(norm).epsilon(1e-9));
    CHECK(r.decay_ok == decay);
    CHECK(r.pass == pass);

    std::ifstream in(QPS_TEST_DATA_DIR "/suitability_golden.json");
    REQUIRE(in.good());
    auto golden = nlohmann::json::parse(in);
    CHECK(r.pass == golden.at("pass").get<bool>());
    CHECK(E == doctest::Approx(golden.at("energy").get<double>()).epsilon(1e-10));
  }
}

TEST_CASE("Poisson reconstruction") {
  SUBCASE("zero coupling takes the error path or vanishes") {
    auto outer = build_dual(cosine_model(0.0, 0.618034, 0.13), Site{0}, 8);
    auto s = eig_sym(outer);
    for (std::size_t i = 0; i < s.size(); ++i) {
      try {
        Vector rec = poisson_expand(outer, s.eigenvector(i), s.eigenvalues(static_cast<Eigen::Index>(i)),
                                    origin_cube(1, 4));
        CHECK(rec.cwiseAbs().maxCoeff() == 0.0);
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SingularShift);
      }
    }
  }
  // at x = 0.17 the ground state sits at n = 7, outside both inner boxes, so
  // the inner resolvents stay well conditioned
  for (int inner : {4, 6}) {
    CAPTURE(inner);
    auto outer = build_dual(cosine_model(0.1, 0.618034, 0.17), Site{0}, 8);
    auto s = eig_sym(outer);
    auto inner_sites = origin_cube(1, inner);
    Vector rec = poisson_expand(outer, s.eigenvector(0), s.eigenvalues(0), inner_sites);
    double err = 0.0;
    for (std::size_t i = 0; i < inner_sites->size(); ++i) {
      const auto at = static_cast<Eigen::Index>(*outer.sites->index_of((*inner_sites)[i]));
      err = std::max(err, std::abs(rec(static_cast<Eigen::Index>(i)) - s.eigenvectors(at, 0)));
    }
    CHECK(err <= 1e-8);
  }
}

TEST_CASE("test-function truncation") {
  SUBCASE("zero coupling leaves no residual") {
    auto outer = build_dual(cosine_model(0.0, 0.618034, 0.13), Site{0}, 12);
    auto s = eig_sym(outer);
    const auto center = static_cast<Eigen::Index>(*outer.sites->index_of({0}));
    Vector psi = Vector::Zero(outer.matrix.rows());
    psi(center) = 1.0;
    auto t = truncate_test_function(outer, psi, outer.matrix(center, center), 4, 1.0, 1.0);
    CHECK(t.residual == 0.0);
  }
  SUBCASE("support well inside the cut") {
    auto outer = build_dual(cosine_model(0.05, 0.618034, 0.13), Site{0}, 12);
    auto inner = outer.restrict_to(origin_cube(1, 2));
    auto s = eig_sym(inner);
    Vector psi = Vector::Zero(outer.matrix.rows());
    for (std::size_t i = 0; i < inner.size(); ++i)
      psi(static_cast<Eigen::Index>(*outer.sites->index_of((*inner.sites)[i]))) = s.eigenvectors(static_cast<Eigen::Index>(i), 0);
    // psi is an eigenvector of the inner box only; the cut at 3R/2 = 6 does not touch it
    auto full = (outer.matrix * psi - s.eigenvalues(0) * psi).norm();
    auto t = truncate_test_function(outer, psi, s.eigenvalues(0), 4, 1.0, 1.0);
    CHECK(t.residual == doctest::Approx(full).epsilon(1e-14));
  }
  SUBCASE("localized eigenvector at R = 6") {
    auto outer = build_dual(cosine_model(0.05, 0.618034, 0.13), Site{0}, 18);
    auto s = eig_sym(outer);
    // the eigenvector concentrated at the origin
    const auto center = static_cast<Eigen::Index>(*outer.sites->index_of({0}));
    Eigen::Index best = 0;
    s.eigenvectors.row(center).cwiseAbs().maxCoeff(&best);
    Vector psi = s.eigenvectors.col(best);
    const double boundary = shell_max(outer, psi, Site{0}, 6, 12);
    const double delta = std::max(boundary, std::exp(-0.6));
    auto t = truncate_test_function(outer, psi, s.eigenvalues(best), 6, delta, 1.0);
    CHECK(t.boundary_max == boundary);
    CHECK(t.residual <= std::pow(60.0, 2) * boundary);
    CHECK(t.residual <= t.bound);
  }
  SUBCASE("boundary bound violation") {
    auto outer = build_dual(cosine_model(0.05, 0.618034, 0.13), Site{0}, 12);
    Vector psi = Vector::Constant(outer.matrix.rows(), 1.0);
    CHECK_THROWS_AS(truncate_test_function(outer, psi, 0.0, 4, 0.9, 1.0), Error);
  }
}

TEST_CASE("annulus resolvent") {
  SUBCASE("diagonal case") {
    auto params = cosine_model(0.0, 0.618034, 0.13);
    const double E = 0.3;
    double closest = INFINITY;
    for (int n = -12; n <= 12; ++n)
      if (std::abs(n) > 4) closest = std::min(closest, std::abs(oracle::W_at({0.13}, {n}, {0.618034}) - E));
    CHECK(annulus_resolvent_norm(params, 8, 12, E) == doctest::Approx(1.0 / closest).epsilon(1e-12));
  }
  SUBCASE("far below the spectrum") {
    auto params = cosine_model(0.05, 0.618034, 0.13);
    auto box = build_dual(params, Site{0}, 12);
    const double E = -eig_sym(box).matrix_norm - 1.0;
    CHECK(annulus_resolvent_norm(params, 8, 12, E) <= 1.0);
  }
  SUBCASE("ground energy of the small box") {
    auto params = cosine_model(0.05, 0.618034, 0.13);
    const double E = eig_sym(build_dual(params, Site{0}, 4)).eigenvalues(0);
    const double norm = annulus_resolvent_norm(params, 8, 24, E);
    auto annulus = build_dual(params, annulus_sites(1, 8, 24));
    auto ev = oracle::jacobi_eigen(oracle::to_dense(annulus.matrix));
    double gap = INFINITY;
    for (double v : ev) gap = std::min(gap, std::abs(v - E));
    CHECK(norm == doctest::Approx(1.0 / gap).epsilon(1e-9));
    const int rho = 1;
    CAPTURE(annulus_resolvent_bound(rho, 0.5));
    CHECK(std::isfinite(norm));
  }
}
