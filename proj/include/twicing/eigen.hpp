#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "twicing/error.hpp"
#include "twicing/matrix.hpp"

namespace twicing {

/// Eigenpairs of a real symmetric matrix. Column j of `eigenvectors` pairs
/// with `eigenvalues[j]`; eigenvalues are sorted descending.
struct SymmetricSpectrum {
  std::vector<double> eigenvalues;
  Matrix eigenvectors;
};

struct JacobiOptions {
  double tolerance = 1e-12;  // off-diagonal Frobenius norm, relative to max(1, ‖S‖_F)
  int max_sweeps = 100;
  double symmetry_tolerance = 1e-10;
};

namespace detail {

inline double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace detail

/// Cyclic Jacobi eigendecomposition. Sweeps over all (p, q) pairs in row order
/// until the off-diagonal mass falls below tolerance.
inline SymmetricSpectrum eig_symmetric(const Matrix& s, const JacobiOptions& opt = {}) {
  if (!s.is_square()) throw DomainError("eig_symmetric: matrix is " + shape_string(s));
  require_finite(s, "eig_symmetric");
  const std::size_t n = s.rows();
  const double scale = std::max(1.0, max_abs(s));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(s(i, j) - s(j, i)) > opt.symmetry_tolerance * scale) {
        throw DomainError("eig_symmetric: asymmetric input at (" + std::to_string(i) + "," +
                          std::to_string(j) + ")");
      }
    }
  }

  Matrix a = s;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (s(i, j) + s(j, i));
  Matrix v = Matrix::identity(n);

  const double threshold = opt.tolerance * std::max(1.0, frobenius_norm(a));
  double off = detail::off_diagonal_norm(a);
  int sweep = 0;
  while (off >= threshold) {
    if (sweep == opt.max_sweeps) {
      throw NumericError("eig_symmetric: no convergence after " + std::to_string(sweep) +
                         " sweeps, off-diagonal residual " + std::to_string(off));
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle chosen to annihilate a(p, q); t is the smaller root.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;

        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
    ++sweep;
    off = detail::off_diagonal_norm(a);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  SymmetricSpectrum out{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
  }
  return out;
}

/// Eigenvalues only, sorted descending.
inline std::vector<double> symmetric_eigenvalues(const Matrix& s) {
  return eig_symmetric(s).eigenvalues;
}

}  // namespace twicing
