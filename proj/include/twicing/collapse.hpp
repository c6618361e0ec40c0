#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "twicing/attention.hpp"
#include "twicing/error.hpp"
#include "twicing/matrix.hpp"
#include "twicing/random.hpp"

namespace twicing {

enum class AttentionMode { standard, twicing };

inline std::string_view to_string(AttentionMode m) {
  return m == AttentionMode::standard ? "standard" : "twicing";
}

/// Pure attention stack: no residual, MLP or normalization between layers.
struct StackConfig {
  std::size_t layers = 12;
  std::size_t tokens = 32;
  std::size_t input_dim = 16;  // D_x, also the value width so layers compose
  std::size_t head_dim = 16;   // D
  AttentionMode mode = AttentionMode::standard;
  std::uint64_t seed = 0;
  double weight_scale = 0.5;  // weights i.i.d. uniform in [-s, s]
};

/// Per-layer average pairwise token cosine similarity.
struct CollapseCurve {
  std::vector<double> values;
};

/// Initial tokens and per-layer weights drawn from a seed. Both modes run on
/// the same draw.
struct StackDraw {
  Matrix tokens;
  std::vector<AttentionParams> layers;
};

/// Mean of cos(xᵢ, xⱼ) over unordered pairs i < j. Rows with norm below
/// 1e-300 are left out.
inline double avg_pairwise_cosine(const Matrix& tokens) {
  std::vector<std::size_t> usable;
  std::vector<double> sq(tokens.rows(), 0.0);
  for (std::size_t i = 0; i < tokens.rows(); ++i) {
    for (double x : tokens.row(i)) sq[i] += x * x;
    if (std::sqrt(sq[i]) >= 1e-300) usable.push_back(i);
  }
  if (usable.size() < 2) {
    throw DomainError("avg_pairwise_cosine: fewer than 2 tokens with nonzero norm");
  }
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < usable.size(); ++a) {
    auto xi = tokens.row(usable[a]);
    for (std::size_t b = a + 1; b < usable.size(); ++b) {
      auto xj = tokens.row(usable[b]);
      double dot = 0.0;
      for (std::size_t k = 0; k < xi.size(); ++k) dot += xi[k] * xj[k];
      const double c = dot / std::sqrt(sq[usable[a]] * sq[usable[b]]);
      total += std::clamp(c, -1.0, 1.0);
      ++pairs;
    }
  }
  return std::clamp(total / static_cast<double>(pairs), -1.0, 1.0);
}

/// Draw order: tokens (row-major, standard normal), then for each layer
/// W_Q, W_K, W_V (row-major, uniform).
inline StackDraw draw_stack(const StackConfig& cfg) {
  if (cfg.tokens < 1 || cfg.input_dim < 1 || cfg.head_dim < 1) {
    throw DomainError("draw_stack: dimensions must be positive");
  }
  if (!(cfg.weight_scale > 0.0)) throw DomainError("draw_stack: weight_scale must be positive");
  SplitMix64 rng(cfg.seed);
  StackDraw d;
  d.tokens = random_normal(cfg.tokens, cfg.input_dim, rng);
  const double s = cfg.weight_scale;
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    AttentionParams p;
    p.w_query = random_uniform(cfg.head_dim, cfg.input_dim, -s, s, rng);
    p.w_key = random_uniform(cfg.head_dim, cfg.input_dim, -s, s, rng);
    p.w_value = random_uniform(cfg.input_dim, cfg.input_dim, -s, s, rng);
    d.layers.push_back(std::move(p));
  }
  return d;
}

inline Matrix attention_layer(const Matrix& tokens, const AttentionParams& p, AttentionMode mode) {
  const TokenBatch x{tokens};
  return mode == AttentionMode::standard ? standard_attention(x, p) : twicing_attention(x, p);
}

inline CollapseCurve run_stack(const StackDraw& draw, AttentionMode mode) {
  CollapseCurve curve;
  Matrix x = draw.tokens;
  for (const auto& p : draw.layers) {
    x = attention_layer(x, p, mode);
    curve.values.push_back(avg_pairwise_cosine(x));
  }
  return curve;
}

inline CollapseCurve run_stack(const StackConfig& cfg) { return run_stack(draw_stack(cfg), cfg.mode); }

/// True when each value is at least the previous one minus `slack`.
inline bool is_nondecreasing(const CollapseCurve& c, double slack = 1e-9) {
  for (std::size_t i = 1; i < c.values.size(); ++i)
    if (c.values[i] < c.values[i - 1] - slack) return false;
  return true;
}

struct SeedComparison {
  std::uint64_t seed = 0;
  CollapseCurve standard;
  CollapseCurve twicing;
};

struct ComparisonSummary {
  std::size_t wins = 0;    // twicing final cosine strictly below standard
  std::size_t ties = 0;
  std::size_t losses = 0;
  double mean_final_gap = 0.0;  // mean of standard - twicing at the last layer
  std::size_t standard_nondecreasing = 0;
  std::vector<SeedComparison> runs;
};

inline SeedComparison compare_seed(const StackDraw& draw, std::uint64_t seed) {
  if (draw.layers.empty()) throw DomainError("compare_seed: need at least one layer");
  return {seed, run_stack(draw, AttentionMode::standard), run_stack(draw, AttentionMode::twicing)};
}

inline void accumulate(ComparisonSummary& s, SeedComparison run) {
  const double st = run.standard.values.back();
  const double tw = run.twicing.values.back();
  if (tw < st) {
    ++s.wins;
  } else if (tw == st) {
    ++s.ties;
  } else {
    ++s.losses;
  }
  if (is_nondecreasing(run.standard)) ++s.standard_nondecreasing;
  const double k = static_cast<double>(s.runs.size());
  s.mean_final_gap += ((st - tw) - s.mean_final_gap) / (k + 1.0);
  s.runs.push_back(std::move(run));
}

/// Runs both modes for seeds base.seed, base.seed + 1, ... with shared weights.
inline ComparisonSummary compare_modes(const StackConfig& base, std::size_t seeds) {
  if (seeds < 1) throw DomainError("compare_modes: need at least one seed");
  if (base.layers < 1) throw DomainError("compare_modes: need at least one layer");
  ComparisonSummary s;
  for (std::size_t k = 0; k < seeds; ++k) {
    StackConfig cfg = base;
    cfg.seed = base.seed + k;
    accumulate(s, compare_seed(draw_stack(cfg), cfg.seed));
  }
  return s;
}

}  // namespace twicing
