#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "twicing/error.hpp"

namespace twicing {

/// Dense row-major matrix of doubles. The single carrier for token batches,
/// weight matrices, affinities, averaging operators and signals.
class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw DomainError("Matrix: data length " + std::to_string(data_.size()) +
                        " does not match " + std::to_string(rows_) + "x" +
                        std::to_string(cols_));
    }
  }

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
      if (row.size() != c) throw DomainError("Matrix::from_rows: ragged rows");
      data.insert(data.end(), row.begin(), row.end());
    }
    return Matrix(r, c, std::move(data));
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  /// Single column holding `values`.
  static Matrix column(std::span<const double> values) {
    return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  Matrix& operator+=(const Matrix& other) {
    require_same_shape(other, "operator+=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
  }

  Matrix& operator-=(const Matrix& other) {
    require_same_shape(other, "operator-=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
    return *this;
  }

  Matrix& operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
  }

  bool operator==(const Matrix&) const = default;

  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

 private:
  void require_same_shape(const Matrix& other, const char* op) const {
    if (!same_shape(other)) {
      throw DomainError(std::string("Matrix::") + op + ": shape mismatch " +
                        std::to_string(rows_) + "x" + std::to_string(cols_) + " vs " +
                        std::to_string(other.rows_) + "x" + std::to_string(other.cols_));
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
inline Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
inline Matrix operator*(Matrix a, double s) { return a *= s; }
inline Matrix operator*(double s, Matrix a) { return a *= s; }

inline std::string shape_string(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DomainError("matmul: inner dimensions differ (" + shape_string(a) + " * " +
                      shape_string(b) + ")");
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

/// a * bᵀ without materializing the transpose.
inline Matrix matmul_transposed(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw DomainError("matmul_transposed: column counts differ (" + shape_string(a) +
                      " vs " + shape_string(b) + ")");
  }
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ai = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      auto bj = b.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += ai[k] * bj[k];
      c(i, j) = s;
    }
  }
  return c;
}

inline Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

inline double max_abs(const Matrix& m) {
  double r = 0.0;
  for (double x : m.values()) r = std::max(r, std::abs(x));
  return r;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) {
    throw DomainError("max_abs_diff: shape mismatch " + shape_string(a) + " vs " +
                      shape_string(b));
  }
  double r = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t k = 0; k < av.size(); ++k) r = std::max(r, std::abs(av[k] - bv[k]));
  return r;
}

inline double frobenius_norm(const Matrix& m) {
  double s = 0.0;
  for (double x : m.values()) s += x * x;
  return std::sqrt(s);
}

inline bool all_finite(const Matrix& m) {
  return std::all_of(m.values().begin(), m.values().end(),
                     [](double x) { return std::isfinite(x); });
}

inline void require_finite(const Matrix& m, const char* where) {
  if (!all_finite(m)) throw DomainError(std::string(where) + ": non-finite entry in input");
}

inline std::vector<double> row_sums(const Matrix& m) {
  std::vector<double> s(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (double x : m.row(i)) s[i] += x;
  return s;
}

/// Row-wise softmax of m / scale, with the row maximum subtracted first so
/// any finite input is safe from overflow.
inline Matrix row_softmax(const Matrix& m, double scale = 1.0) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw DomainError("row_softmax: scale must be positive and finite");
  }
  require_finite(m, "row_softmax");
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto in = m.row(i);
    auto o = out.row(i);
    if (in.empty()) continue;
    const double mx = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t j = 0; j < in.size(); ++j) {
      o[j] = std::exp((in[j] - mx) / scale);
      total += o[j];
    }
    for (double& x : o) x /= total;
  }
  return out;
}

/// (𝟙𝟙ᵀ/N) u: every column replaced by its mean.
inline Matrix project_constant(const Matrix& u) {
  if (u.empty()) throw DomainError("project_constant: empty input");
  require_finite(u, "project_constant");
  Matrix out(u.rows(), u.cols());
  const double n = static_cast<double>(u.rows());
  for (std::size_t j = 0; j < u.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.rows(); ++i) s += u(i, j);
    const double mean = s / n;
    for (std::size_t i = 0; i < u.rows(); ++i) out(i, j) = mean;
  }
  return out;
}

/// Periodic convolution kernel given by the first row of a circulant matrix.
struct CirculantSpec {
  std::size_t size = 0;
  std::vector<double> generator;
};

/// Entry (i, j) = generator[(j - i) mod size].
inline Matrix build_circulant(const CirculantSpec& spec) {
  if (spec.size == 0) throw DomainError("build_circulant: size must be positive");
  if (spec.generator.size() != spec.size) {
    throw DomainError("build_circulant: generator length " +
                      std::to_string(spec.generator.size()) + " != size " +
                      std::to_string(spec.size));
  }
  const std::size_t n = spec.size;
  Matrix c(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) c(i, j) = spec.generator[(j + n - i) % n];
  return c;
}

/// Periodic self-convolution g * g of a circulant generator.
inline std::vector<double> periodic_self_convolution(std::span<const double> g) {
  const std::size_t n = g.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    double s = 0.0;
    for (std::size_t l = 0; l < n; ++l) s += g[l] * g[(m + n - l) % n];
    out[m] = s;
  }
  return out;
}

}  // namespace twicing
