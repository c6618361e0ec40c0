#pragma once

// Independent reference computations for the test suites. Nothing here calls
// into the code path it is used to check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include "twicing/matrix.hpp"

namespace twicing::oracle {

/// Real part of the DFT of a circulant generator: the circulant's eigenvalues
/// when the generator is symmetric under index negation.
inline std::vector<double> dft_real(const std::vector<double>& g) {
  const std::size_t n = g.size();
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t m = 0; m < n; ++m)
      s += g[m] * std::cos(2.0 * std::numbers::pi * static_cast<double>(k * m) / static_cast<double>(n));
    out[k] = s;
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

/// Roots of the 2x2 characteristic polynomial, descending.
inline std::vector<double> eig2(double a, double b, double d) {
  const double tr = a + d;
  const double det = a * d - b * b;
  const double disc = std::sqrt(tr * tr / 4.0 - det);
  return {tr / 2.0 + disc, tr / 2.0 - disc};
}

/// Roots of the 3x3 symmetric characteristic polynomial by the trigonometric
/// (Smith) formula, descending.
inline std::vector<double> eig3(const Matrix& s) {
  const double p1 = s(0, 1) * s(0, 1) + s(0, 2) * s(0, 2) + s(1, 2) * s(1, 2);
  const double q = (s(0, 0) + s(1, 1) + s(2, 2)) / 3.0;
  const double p2 = (s(0, 0) - q) * (s(0, 0) - q) + (s(1, 1) - q) * (s(1, 1) - q) +
                    (s(2, 2) - q) * (s(2, 2) - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  Matrix b(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) b(i, j) = (s(i, j) - (i == j ? q : 0.0)) / p;
  const double detb = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) -
                      b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0)) +
                      b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
  const double r = std::clamp(detb / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double e1 = q + 2.0 * p * std::cos(phi);
  const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  return {e1, 3.0 * q - e1 - e3, e3};
}

/// Plain triple-loop product.
inline Matrix naive_product(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

/// Dense 2A - A².
inline Matrix dense_twicing_operator(const Matrix& a) {
  const Matrix a2 = naive_product(a, a);
  Matrix t(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(i, j) = 2.0 * a(i, j) - a2(i, j);
  return t;
}

/// Self-attention straight from the per-token weighted sum
/// uᵢ = Σⱼ softmax(qᵢᵀkⱼ/s) vⱼ.
inline Matrix attention_loop(const Matrix& x, const Matrix& wq, const Matrix& wk,
                             const Matrix& wv, double s, bool twice) {
  const std::size_t n = x.rows();
  auto proj = [&](const Matrix& w) {
    Matrix out(n, w.rows());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t a = 0; a < w.rows(); ++a) {
        double acc = 0.0;
        for (std::size_t b = 0; b < x.cols(); ++b) acc += w(a, b) * x(i, b);
        out(i, a) = acc;
      }
    return out;
  };
  const Matrix q = proj(wq), k = proj(wk), v = proj(wv);
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t c = 0; c < q.cols(); ++c) dot += q(i, c) * k(j, c);
      a(i, j) = std::exp(dot / s);
      den += a(i, j);
    }
    for (std::size_t j = 0; j < n; ++j) a(i, j) /= den;
  }
  const Matrix op = twice ? dense_twicing_operator(a) : a;
  return naive_product(op, v);
}

/// Central finite differences, element by element.
inline Matrix finite_difference(const std::function<double(const Matrix&)>& f, Matrix x,
                                double step) {
  Matrix g(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double orig = x(i, j);
      x(i, j) = orig + step;
      const double up = f(x);
      x(i, j) = orig - step;
      const double down = f(x);
      x(i, j) = orig;
      g(i, j) = (up - down) / (2.0 * step);
    }
  return g;
}

/// max|a - b| / max(max|a|, max|b|).
inline double relative_error(const Matrix& a, const Matrix& b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    diff = std::max(diff, std::abs(a.values()[k] - b.values()[k]));
    scale = std::max({scale, std::abs(a.values()[k]), std::abs(b.values()[k])});
  }
  return scale == 0.0 ? 0.0 : diff / scale;
}

/// Periodic gaussian generator exp(-d²/2σ²) over circular distance d,
/// normalized to unit sum.
inline std::vector<double> gaussian_generator(std::size_t n, double sigma) {
  std::vector<double> g(n);
  double s = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    const double d = static_cast<double>(std::min(m, n - m));
    g[m] = std::exp(-d * d / (2.0 * sigma * sigma));
    s += g[m];
  }
  for (double& x : g) x /= s;
  return g;
}

}  // namespace twicing::oracle
