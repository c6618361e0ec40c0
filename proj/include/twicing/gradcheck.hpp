#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "twicing/attention.hpp"
#include "twicing/matrix.hpp"
#include "twicing/nlm.hpp"
#include "twicing/random.hpp"

namespace twicing {

/// Blockwise relative error max|a - f| / max(max|a|, max|f|); 0 when both vanish.
inline double block_relative_error(const Matrix& analytic, const Matrix& numeric) {
  const double diff = max_abs_diff(analytic, numeric);
  const double scale = std::max(max_abs(analytic), max_abs(numeric));
  return scale == 0.0 ? 0.0 : diff / scale;
}

/// Central differences of a scalar function of a matrix argument.
inline Matrix central_difference(const std::function<double(const Matrix&)>& f, const Matrix& x,
                                 double step = 1e-5) {
  Matrix g(x.rows(), x.cols());
  Matrix probe = x;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double orig = probe.values()[k];
    probe.values()[k] = orig + step;
    const double up = f(probe);
    probe.values()[k] = orig - step;
    const double down = f(probe);
    probe.values()[k] = orig;
    g.values()[k] = (up - down) / (2.0 * step);
  }
  return g;
}

inline double frobenius_inner(const Matrix& a, const Matrix& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a.values()[k] * b.values()[k];
  return s;
}

struct GradcheckRow {
  std::string block;
  double max_relative_error = 0.0;
};

/// Compares twicing_backward and grad_jw against central differences on one
/// seeded 3-token instance.
inline std::vector<GradcheckRow> run_gradcheck(std::uint64_t seed, double step = 1e-5) {
  SplitMix64 rng(seed);
  const std::size_t n = 3, dx = 4, d = 3, dv = 2;
  const TokenBatch x{random_normal(n, dx, rng)};
  AttentionParams p;
  p.w_query = random_uniform(d, dx, -0.5, 0.5, rng);
  p.w_key = random_uniform(d, dx, -0.5, 0.5, rng);
  p.w_value = random_uniform(dv, dx, -0.5, 0.5, rng);
  const Matrix g = random_normal(n, dv, rng);

  const auto grads = twicing_backward(x, p, g);
  auto loss = [&](const TokenBatch& xx, const AttentionParams& pp) {
    return frobenius_inner(g, twicing_attention(xx, pp));
  };

  std::vector<GradcheckRow> rows;
  rows.push_back({"twicing_tokens",
                  block_relative_error(grads.d_tokens,
                                       central_difference(
                                           [&](const Matrix& m) { return loss(TokenBatch{m}, p); },
                                           x.tokens, step))});
  auto weight_fd = [&](Matrix AttentionParams::*field) {
    return central_difference(
        [&](const Matrix& m) {
          AttentionParams q = p;
          q.*field = m;
          return loss(x, q);
        },
        p.*field, step);
  };
  rows.push_back({"twicing_w_query",
                  block_relative_error(grads.d_w_query, weight_fd(&AttentionParams::w_query))});
  rows.push_back({"twicing_w_key",
                  block_relative_error(grads.d_w_key, weight_fd(&AttentionParams::w_key))});
  rows.push_back({"twicing_w_value",
                  block_relative_error(grads.d_w_value, weight_fd(&AttentionParams::w_value))});

  const auto zero = twicing_backward(x, p, Matrix(n, dv));
  rows.push_back({"twicing_zero_upstream",
                  std::max({max_abs(zero.d_tokens), max_abs(zero.d_w_query), max_abs(zero.d_w_key),
                            max_abs(zero.d_w_value)})});

  const std::size_t m = 6;
  Matrix wraw(m, m);
  for (double& v : wraw.values()) v = rng.uniform(0.1, 1.0);
  const AffinityMatrix w(wraw);
  const Matrix u = random_normal(m, 2, rng);
  rows.push_back({"jw_gradient",
                  block_relative_error(grad_jw(w, u),
                                       central_difference(
                                           [&](const Matrix& v) { return energy_jw(w, v); }, u,
                                           step))});
  Matrix constant(m, 2);
  for (std::size_t i = 0; i < m; ++i) {
    constant(i, 0) = 0.7;
    constant(i, 1) = -1.3;
  }
  rows.push_back({"jw_constant_signal", max_abs(grad_jw(w, constant))});
  return rows;
}

}  // namespace twicing
