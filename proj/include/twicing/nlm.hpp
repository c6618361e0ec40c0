#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "twicing/error.hpp"
#include "twicing/matrix.hpp"
#include "twicing/spectral.hpp"

namespace twicing {

/// Nonnegative affinity W with every row sum positive.
class AffinityMatrix {
 public:
  explicit AffinityMatrix(Matrix w) : w_(std::move(w)) {
    if (!w_.is_square() || w_.empty()) {
      throw DomainError("AffinityMatrix: weights must be square and nonempty, got " +
                        shape_string(w_));
    }
    require_finite(w_, "AffinityMatrix");
    for (double x : w_.values()) {
      if (x < 0.0) throw DomainError("AffinityMatrix: negative weight");
    }
    symmetric_ = max_abs_diff(w_, transpose(w_)) < 1e-12;
  }

  const Matrix& weights() const noexcept { return w_; }
  bool symmetric() const noexcept { return symmetric_; }
  std::size_t size() const noexcept { return w_.rows(); }

 private:
  Matrix w_;
  bool symmetric_ = false;
};

/// A = D⁻¹W together with the degrees Dᵢᵢ = Σⱼ Wᵢⱼ.
struct AveragingOperator {
  Matrix a;
  std::vector<double> degrees;

  std::size_t size() const noexcept { return a.rows(); }
};

/// Clean or current signal `values` (N x D) with an optional noisy reference f.
struct Signal {
  Matrix values;
  std::optional<Matrix> reference;
};

struct FidelityConfig {
  double lambda = 0.0;
};

/// Pixel layout of a signal: rows are ordered row-major over a width x height
/// grid. A height of 1 is a 1-D signal.
struct GridShape {
  std::size_t width = 0;
  std::size_t height = 1;
};

namespace detail {

inline std::size_t clamp_index(long long i, std::size_t n) {
  if (i < 0) return 0;
  if (i >= static_cast<long long>(n)) return n - 1;
  return static_cast<std::size_t>(i);
}

/// One row per sample, holding its patch with replicate padding at the borders.
inline Matrix extract_patches(const Matrix& u, std::size_t radius, GridShape shape) {
  const long long r = static_cast<long long>(radius);
  const std::size_t side = 2 * radius + 1;
  const std::size_t span_y = shape.height > 1 ? side : 1;
  Matrix patches(u.rows(), side * span_y * u.cols());
  for (std::size_t y = 0; y < shape.height; ++y) {
    for (std::size_t x = 0; x < shape.width; ++x) {
      auto out = patches.row(y * shape.width + x);
      std::size_t k = 0;
      const long long ylo = shape.height > 1 ? -r : 0;
      const long long yhi = shape.height > 1 ? r : 0;
      for (long long dy = ylo; dy <= yhi; ++dy) {
        const std::size_t yy = clamp_index(static_cast<long long>(y) + dy, shape.height);
        for (long long dx = -r; dx <= r; ++dx) {
          const std::size_t xx = clamp_index(static_cast<long long>(x) + dx, shape.width);
          for (double v : u.row(yy * shape.width + xx)) out[k++] = v;
        }
      }
    }
  }
  return patches;
}

}  // namespace detail

/// w(i, j) = exp(-‖patchᵢ - patchⱼ‖² / bandwidth²), patches clamped at the
/// borders. The result is symmetric with unit diagonal.
inline AffinityMatrix build_patch_affinity(const Signal& signal, std::size_t patch_radius,
                                           double bandwidth, GridShape shape = {}) {
  const Matrix& u = signal.values;
  if (u.rows() == 0 || u.cols() == 0) throw DomainError("build_patch_affinity: empty signal");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw DomainError("build_patch_affinity: bandwidth must be positive");
  }
  require_finite(u, "build_patch_affinity");
  if (shape.width == 0) shape = GridShape{u.rows(), 1};
  if (shape.width * shape.height != u.rows()) {
    throw DomainError("build_patch_affinity: grid " + std::to_string(shape.width) + "x" +
                      std::to_string(shape.height) + " does not cover " +
                      std::to_string(u.rows()) + " samples");
  }

  const Matrix patches = detail::extract_patches(u, patch_radius, shape);
  const std::size_t n = u.rows();
  const double inv_h2 = 1.0 / (bandwidth * bandwidth);
  Matrix w(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    w(i, i) = 1.0;
    auto pi = patches.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      auto pj = patches.row(j);
      double d2 = 0.0;
      for (std::size_t k = 0; k < pi.size(); ++k) {
        const double d = pi[k] - pj[k];
        d2 += d * d;
      }
      w(i, j) = w(j, i) = std::exp(-d2 * inv_h2);
    }
  }
  return AffinityMatrix(std::move(w));
}

inline AveragingOperator averaging_operator(const AffinityMatrix& w) {
  const Matrix& wm = w.weights();
  AveragingOperator op{Matrix(wm.rows(), wm.cols()), row_sums(wm)};
  for (std::size_t i = 0; i < wm.rows(); ++i) {
    const double d = op.degrees[i];
    if (!(d > 0.0)) {
      throw DomainError("averaging_operator: row " + std::to_string(i) + " has zero weight sum");
    }
    for (std::size_t j = 0; j < wm.cols(); ++j) op.a(i, j) = wm(i, j) / d;
  }
  return op;
}

/// One step of uᵢ ← (λfᵢ + Σⱼ Wᵢⱼuⱼ) / (λ + dᵢ), written as
/// (Au)ᵢ + λ(fᵢ - (Au)ᵢ)/(λ + dᵢ) so that λ = 0 is exactly A·u.
inline Signal fixed_point_step(const AveragingOperator& op, const Signal& u,
                               const FidelityConfig& fid) {
  if (!(fid.lambda >= 0.0) || !std::isfinite(fid.lambda)) {
    throw DomainError("fixed_point_step: lambda must be finite and nonnegative");
  }
  if (fid.lambda > 0.0 && !u.reference) {
    throw DomainError("fixed_point_step: lambda > 0 needs the noisy reference f");
  }
  if (u.reference && !u.reference->same_shape(u.values)) {
    throw DomainError("fixed_point_step: reference shape differs from signal");
  }
  Signal out{matmul(op.a, u.values), u.reference};
  if (fid.lambda > 0.0) {
    const Matrix& f = *u.reference;
    for (std::size_t i = 0; i < out.values.rows(); ++i) {
      const double mix = fid.lambda / (fid.lambda + op.degrees[i]);
      for (std::size_t j = 0; j < out.values.cols(); ++j)
        out.values(i, j) += mix * (f(i, j) - out.values(i, j));
    }
  }
  return out;
}

/// p(A)ⁿ u, with p(A) formed once by apply_matrix_filter.
inline Signal iterate_filter(const AveragingOperator& op, const Signal& u,
                             const FilterPolynomial& poly, unsigned steps) {
  if (op.a.cols() != u.values.rows()) {
    throw DomainError("iterate_filter: operator size " + std::to_string(op.size()) +
                      " vs signal " + shape_string(u.values));
  }
  if (steps == 0) return u;
  const Matrix filter = apply_matrix_filter(poly, op.a);
  Signal out = u;
  for (unsigned s = 0; s < steps; ++s) out.values = matmul(filter, out.values);
  return out;
}

/// J_w(u) = ½ Σᵢⱼ Wᵢⱼ ‖uᵢ - uⱼ‖².
inline double energy_jw(const AffinityMatrix& w, const Matrix& u) {
  const Matrix& wm = w.weights();
  if (wm.rows() != u.rows()) throw DomainError("energy_jw: affinity and signal sizes differ");
  double total = 0.0;
  for (std::size_t i = 0; i < u.rows(); ++i) {
    for (std::size_t j = 0; j < u.rows(); ++j) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < u.cols(); ++c) {
        const double d = u(i, c) - u(j, c);
        d2 += d * d;
      }
      total += wm(i, j) * d2;
    }
  }
  return 0.5 * total;
}

/// ∂J_w/∂uᵢ = Σⱼ (uᵢ - uⱼ)(Wᵢⱼ + Wⱼᵢ).
inline Matrix grad_jw(const AffinityMatrix& w, const Matrix& u) {
  const Matrix& wm = w.weights();
  if (wm.rows() != u.rows()) throw DomainError("grad_jw: affinity and signal sizes differ");
  Matrix g(u.rows(), u.cols());
  for (std::size_t i = 0; i < u.rows(); ++i) {
    for (std::size_t j = 0; j < u.rows(); ++j) {
      const double s = wm(i, j) + wm(j, i);
      if (s == 0.0) continue;
      for (std::size_t c = 0; c < u.cols(); ++c) g(i, c) += (u(i, c) - u(j, c)) * s;
    }
  }
  return g;
}

/// 10·log₁₀(peak² / MSE); +infinity when the signals are identical.
inline double psnr(const Matrix& clean, const Matrix& estimate, double peak) {
  if (!clean.same_shape(estimate)) {
    throw DomainError("psnr: shape mismatch " + shape_string(clean) + " vs " +
                      shape_string(estimate));
  }
  if (!(peak > 0.0)) throw DomainError("psnr: peak must be positive");
  if (clean.empty()) throw DomainError("psnr: empty signal");
  double se = 0.0;
  auto c = clean.values();
  auto e = estimate.values();
  for (std::size_t k = 0; k < c.size(); ++k) se += (c[k] - e[k]) * (c[k] - e[k]);
  if (se == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = se / static_cast<double>(c.size());
  return 10.0 * std::log10(peak * peak / mse);
}

/// ‖u - Pu‖₂ where P replaces each column by its mean.
inline double distance_to_constant(const Matrix& u) {
  return frobenius_norm(u - project_constant(u));
}

}  // namespace twicing
