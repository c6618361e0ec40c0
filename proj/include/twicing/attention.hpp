#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "twicing/error.hpp"
#include "twicing/matrix.hpp"

namespace twicing {

/// Projection weights of one attention head. `w_query` and `w_key` are D x D_x,
/// `w_value` is D_v x D_x. When `scale` is unset the softmax temperature is √D.
struct AttentionParams {
  Matrix w_query;
  Matrix w_key;
  Matrix w_value;
  std::optional<double> scale;

  std::size_t head_dim() const noexcept { return w_query.rows(); }
  std::size_t input_dim() const noexcept { return w_query.cols(); }
  std::size_t value_dim() const noexcept { return w_value.rows(); }

  double effective_scale() const {
    return scale ? *scale : std::sqrt(static_cast<double>(head_dim()));
  }
};

/// N x D_x token matrix, one token per row.
struct TokenBatch {
  Matrix tokens;

  std::size_t count() const noexcept { return tokens.rows(); }
};

struct AttentionGradients {
  Matrix d_tokens;
  Matrix d_w_query;
  Matrix d_w_key;
  Matrix d_w_value;
};

inline constexpr double kRowStochasticTolerance = 1e-10;

namespace detail {

inline void check_attention_shapes(const TokenBatch& x, const AttentionParams& p) {
  if (x.count() == 0) throw DomainError("attention: token batch is empty");
  const std::size_t dx = x.tokens.cols();
  if (p.w_query.cols() != dx || p.w_key.cols() != dx || p.w_value.cols() != dx) {
    throw DomainError("attention: weight input width does not match token width " +
                      std::to_string(dx));
  }
  if (p.w_query.rows() != p.w_key.rows()) {
    throw DomainError("attention: query and key weights disagree on D (" +
                      shape_string(p.w_query) + " vs " + shape_string(p.w_key) + ")");
  }
  if (p.scale && !(*p.scale > 0.0)) throw DomainError("attention: scale must be positive");
  require_finite(x.tokens, "attention");
}

inline void check_row_stochastic(const Matrix& a, const char* where) {
  if (!a.is_square()) {
    throw DomainError(std::string(where) + ": attention matrix is " + shape_string(a));
  }
  for (double x : a.values()) {
    if (x < 0.0) throw DomainError(std::string(where) + ": attention matrix has a negative entry");
  }
  const auto sums = row_sums(a);
  for (std::size_t i = 0; i < sums.size(); ++i) {
    if (!(std::abs(sums[i] - 1.0) <= kRowStochasticTolerance)) {
      throw DomainError(std::string(where) + ": row " + std::to_string(i) + " sums to " +
                        std::to_string(sums[i]) + ", not 1");
    }
  }
}

}  // namespace detail

/// A = softmax(Q Kᵀ / scale) with Q = X W_Qᵀ and K = X W_Kᵀ.
inline Matrix attention_matrix(const TokenBatch& x, const AttentionParams& p) {
  detail::check_attention_shapes(x, p);
  const Matrix q = matmul_transposed(x.tokens, p.w_query);
  const Matrix k = matmul_transposed(x.tokens, p.w_key);
  return row_softmax(matmul_transposed(q, k), p.effective_scale());
}

inline Matrix value_projection(const TokenBatch& x, const AttentionParams& p) {
  return matmul_transposed(x.tokens, p.w_value);
}

/// U = A V.
inline Matrix standard_attention(const TokenBatch& x, const AttentionParams& p) {
  return matmul(attention_matrix(x, p), value_projection(x, p));
}

/// (2A - A²) V evaluated as AV + A(V - AV), so A² is never formed.
inline Matrix twicing_apply(const Matrix& a, const Matrix& v) {
  detail::check_row_stochastic(a, "twicing_apply");
  if (v.rows() != a.rows()) {
    throw DomainError("twicing_apply: value rows " + std::to_string(v.rows()) +
                      " != attention size " + std::to_string(a.rows()));
  }
  Matrix smoothed = matmul(a, v);
  Matrix correction = matmul(a, v - smoothed);
  return smoothed += correction;
}

inline Matrix twicing_attention(const TokenBatch& x, const AttentionParams& p) {
  return twicing_apply(attention_matrix(x, p), value_projection(x, p));
}

/// Multi-head attention as independent heads with outputs concatenated
/// column-wise in head order.
template <typename HeadFn>
Matrix multi_head(const TokenBatch& x, const std::vector<AttentionParams>& heads, HeadFn head) {
  if (heads.empty()) throw DomainError("multi_head: no heads");
  std::vector<Matrix> outs;
  std::size_t width = 0;
  for (const auto& p : heads) {
    outs.push_back(head(x, p));
    width += outs.back().cols();
  }
  Matrix u(x.count(), width);
  std::size_t offset = 0;
  for (const auto& o : outs) {
    for (std::size_t i = 0; i < o.rows(); ++i)
      for (std::size_t j = 0; j < o.cols(); ++j) u(i, offset + j) = o(i, j);
    offset += o.cols();
  }
  return u;
}

/// Vector-Jacobian product of twicing_attention: given G = ∂L/∂U, returns
/// ∂L/∂X and ∂L/∂W for all three projections.
inline AttentionGradients twicing_backward(const TokenBatch& x, const AttentionParams& p,
                                           const Matrix& upstream) {
  detail::check_attention_shapes(x, p);
  const std::size_t n = x.count();
  if (upstream.rows() != n || upstream.cols() != p.value_dim()) {
    throw DomainError("twicing_backward: upstream is " + shape_string(upstream) +
                      ", expected " + std::to_string(n) + "x" + std::to_string(p.value_dim()));
  }
  const double scale = p.effective_scale();
  const Matrix& xt = x.tokens;
  const Matrix q = matmul_transposed(xt, p.w_query);
  const Matrix k = matmul_transposed(xt, p.w_key);
  const Matrix v = matmul_transposed(xt, p.w_value);
  const Matrix a = row_softmax(matmul_transposed(q, k), scale);
  const Matrix b = matmul(a, v);  // U = 2B - A B
  const Matrix& g = upstream;

  const Matrix at = transpose(a);
  // B feeds U both directly (2G) and through -A B (-AᵀG).
  const Matrix d_b = 2.0 * g - matmul(at, g);
  // ∂L/∂A = dB Vᵀ - G Bᵀ
  Matrix d_a = matmul_transposed(d_b, v);
  d_a -= matmul_transposed(g, b);
  const Matrix d_v = matmul(at, d_b);

  Matrix d_logits(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double dot = 0.0;
    for (std::size_t j = 0; j < n; ++j) dot += a(i, j) * d_a(i, j);
    for (std::size_t j = 0; j < n; ++j) d_logits(i, j) = a(i, j) * (d_a(i, j) - dot) / scale;
  }
  const Matrix d_q = matmul(d_logits, k);
  const Matrix d_k = matmul(transpose(d_logits), q);

  AttentionGradients out;
  out.d_w_query = matmul(transpose(d_q), xt);
  out.d_w_key = matmul(transpose(d_k), xt);
  out.d_w_value = matmul(transpose(d_v), xt);
  out.d_tokens = matmul(d_q, p.w_query);
  out.d_tokens += matmul(d_k, p.w_key);
  out.d_tokens += matmul(d_v, p.w_value);
  return out;
}

}  // namespace twicing
