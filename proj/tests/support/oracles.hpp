#pragma once

// Reference computations that share no code with the library solvers.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "qps/lattice.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

template <class M>
Dense to_dense(const M& m) {
  Dense out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

// Cyclic Jacobi rotations; returns ascending eigenvalues, and eigenvectors as
// columns of `vectors` when requested.
inline std::vector<double> jacobi_eigen(Dense a, Dense* vectors = nullptr) {
  const std::size_t n = a.size();
  Dense v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return a[x][x] < a[y][y]; });
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a[order[i]][order[i]];
  if (vectors) {
    vectors->assign(n, std::vector<double>(n));
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i) (*vectors)[k][i] = v[k][order[i]];
  }
  return values;
}

// Number of eigenvalues below x of the symmetric tridiagonal matrix, from the
// signs of the leading principal minors of T - x.
inline int sturm_count(const std::vector<double>& diag, const std::vector<double>& off, double x) {
  int count = 0;
  double d = 1.0;
  for (std::size_t i = 0; i < diag.size(); ++i) {
    const double b2 = i == 0 ? 0.0 : off[i - 1] * off[i - 1];
    d = diag[i] - x - (i == 0 ? 0.0 : b2 / d);
    if (d == 0.0) d = -1e-300;
    if (d < 0) ++count;
  }
  return count;
}

// Eigenvalues of a symmetric tridiagonal matrix by bisection on the
// characteristic polynomial's sign changes.
inline std::vector<double> tridiagonal_bisection(const std::vector<double>& diag,
                                                 const std::vector<double>& off) {
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < diag.size(); ++i) {
    const double r = (i > 0 ? std::abs(off[i - 1]) : 0.0) + (i < off.size() ? std::abs(off[i]) : 0.0);
    lo = std::min(lo, diag[i] - r);
    hi = std::max(hi, diag[i] + r);
  }
  std::vector<double> out;
  for (std::size_t k = 0; k < diag.size(); ++k) {
    double a = lo - 1.0, b = hi + 1.0;
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (a + b);
      if (sturm_count(diag, off, m) > static_cast<int>(k)) b = m; else a = m;
    }
    out.push_back(0.5 * (a + b));
  }
  return out;
}

// Gauss-Jordan inverse with partial pivoting.
inline Dense inverse(Dense a) {
  const std::size_t n = a.size();
  Dense inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    if (std::abs(a[p][c]) < 1e-300) throw std::runtime_error("singular");
    std::swap(a[p], a[c]);
    std::swap(inv[p], inv[c]);
    const double piv = a[c][c];
    for (std::size_t k = 0; k < n; ++k) { a[c][k] /= piv; inv[c][k] /= piv; }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c] == 0.0) continue;
      const double f = a[r][c];
      for (std::size_t k = 0; k < n; ++k) { a[r][k] -= f * a[c][k]; inv[r][k] -= f * inv[c][k]; }
    }
  }
  return inv;
}

inline double two_cos(double t) { return 2.0 * std::cos(2.0 * std::numbers::pi * t); }

// W at x + n * alpha summed directly, without phase reduction.
inline double W_at(const qps::Phase& x, const qps::Site& n, const qps::Frequency& alpha) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += two_cos(x[j] + n[j] * alpha[j]);
  return s;
}

inline std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace oracle
