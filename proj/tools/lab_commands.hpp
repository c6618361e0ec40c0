#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "twicing/twicing.hpp"

namespace twicing::lab {

/// Ordered key=value echo of the parsed configuration.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

inline std::string header_line(const std::string& command, const ConfigEcho& cfg) {
  std::string line = "# twicing_lab " + command;
  for (const auto& [k, v] : cfg) line += " " + k + "=" + v;
  return line + "\n";
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline std::string join(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ";" : "") + format_double(xs[i]);
  return s;
}

// ---------------------------------------------------------------------------

struct EigencapacityOptions {
  unsigned n_max = 50;
  std::size_t nodes = 256;
  std::string out = "eigencapacity.csv";
};

inline std::string eigencapacity_csv(const EigencapacityOptions& o) {
  if (o.n_max < 1) throw DomainError("eigencapacity: --nmax must be >= 1");
  std::string text = header_line("eigencapacity", {{"nmax", std::to_string(o.n_max)},
                                                   {"nodes", std::to_string(o.nodes)},
                                                   {"out", o.out}});
  text += "n,kappa_identity,kappa_twicing,quadrature_twicing,ratio_identity,ratio_twicing\n";
  for (unsigned n = 1; n <= o.n_max; ++n) {
    const auto r = asymptotic_report(n, o.nodes);
    text += std::to_string(n) + "," + format_double(r.identity.closed_form_value) + "," +
            format_double(r.twicing.closed_form_value) + "," +
            format_double(r.twicing.quadrature_value) + "," + format_double(r.identity.ratio) +
            "," + format_double(r.twicing.ratio) + "\n";
  }
  return text;
}

// ---------------------------------------------------------------------------

enum class DenoiseMode { plain, twicing };

inline DenoiseMode denoise_mode_from_string(const std::string& s) {
  if (s == "plain" || s == "standard") return DenoiseMode::plain;
  if (s == "twicing") return DenoiseMode::twicing;
  throw DomainError("denoise: unknown --mode '" + s + "'");
}

struct DenoiseOptions {
  std::string image;   // PGM input
  std::string signal;  // single-column CSV input, used when image is empty
  double noise_sigma = 20.0;
  unsigned steps = 5;
  DenoiseMode mode = DenoiseMode::twicing;
  double bandwidth = 60.0;
  std::size_t patch_radius = 1;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::string out = "denoise";
};

struct DenoiseRow {
  unsigned step = 0;
  double psnr = 0.0;
  double distance_to_constant = 0.0;
};

struct DenoiseResult {
  std::vector<DenoiseRow> rows;
  std::vector<Matrix> iterates;  // one per step
  Matrix clean;
  Matrix noisy;
  GridShape shape;
  int maxval = 255;
  bool is_image = false;
};

/// Adds seeded gaussian noise, builds the patch-affinity averaging operator
/// from the noisy input, then applies A (plain) or 2A - A² (twicing) once
/// per step.
inline DenoiseResult run_denoise(const DenoiseOptions& o) {
  if (o.steps < 1) throw DomainError("denoise: --steps must be >= 1");
  if (!(o.noise_sigma >= 0.0)) throw DomainError("denoise: --noise-sigma must be >= 0");
  if (o.mode == DenoiseMode::twicing && o.lambda != 0.0) {
    throw DomainError("denoise: --lambda applies to plain mode only");
  }
  DenoiseResult r;
  if (!o.image.empty()) {
    const GrayImage img = read_pgm(o.image);
    r.clean = img.as_signal();
    r.shape = {img.width, img.height};
    r.maxval = img.maxval;
    r.is_image = true;
  } else if (!o.signal.empty()) {
    std::ifstream in(o.signal, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + o.signal + "' for reading");
    std::stringstream ss;
    ss << in.rdbuf();
    const auto values = parse_signal_csv(ss.str());
    if (values.empty()) throw DomainError("denoise: signal file has no samples");
    r.clean = Matrix::column(values);
    r.shape = {values.size(), 1};
  } else {
    throw DomainError("denoise: need --image or --signal");
  }

  SplitMix64 rng(o.seed);
  r.noisy = r.clean;
  for (double& v : r.noisy.values()) v += o.noise_sigma * rng.normal();

  const AffinityMatrix w = build_patch_affinity({r.noisy, {}}, o.patch_radius, o.bandwidth, r.shape);
  const AveragingOperator op = averaging_operator(w);
  const FilterPolynomial twice = FilterPolynomial::twicing();

  Signal u{r.noisy, r.noisy};
  for (unsigned s = 1; s <= o.steps; ++s) {
    if (o.mode == DenoiseMode::plain) {
      u = fixed_point_step(op, u, {o.lambda});
    } else {
      u.values = apply_filter_to_signal(twice, op.a, u.values);
    }
    r.rows.push_back({s, psnr(r.clean, u.values, static_cast<double>(r.maxval)),
                      distance_to_constant(u.values)});
    r.iterates.push_back(u.values);
  }
  return r;
}

inline ConfigEcho denoise_echo(const DenoiseOptions& o) {
  return {{"image", o.image},
          {"signal", o.signal},
          {"noise_sigma", format_double(o.noise_sigma)},
          {"steps", std::to_string(o.steps)},
          {"mode", o.mode == DenoiseMode::plain ? "plain" : "twicing"},
          {"bandwidth", format_double(o.bandwidth)},
          {"patch_radius", std::to_string(o.patch_radius)},
          {"lambda", format_double(o.lambda)},
          {"seed", std::to_string(o.seed)},
          {"out", o.out}};
}

inline std::string denoise_csv(const DenoiseOptions& o, const DenoiseResult& r) {
  std::string text = header_line("denoise", denoise_echo(o));
  text += "step,psnr,distance_to_constant\n";
  for (const auto& row : r.rows) {
    text += std::to_string(row.step) + "," + format_double(row.psnr) + "," +
            format_double(row.distance_to_constant) + "\n";
  }
  return text;
}

/// Writes <out>.csv plus one denoised image (or signal CSV) per step.
inline void write_denoise(const DenoiseOptions& o, const DenoiseResult& r) {
  write_text(o.out + ".csv", denoise_csv(o, r));
  for (std::size_t k = 0; k < r.iterates.size(); ++k) {
    const std::string stem = o.out + "_step" + std::to_string(k + 1);
    if (r.is_image) {
      write_pgm(stem + ".pgm",
                GrayImage::from_signal(r.iterates[k], r.shape.width, r.shape.height, r.maxval));
    } else {
      std::string text = header_line("denoise", denoise_echo(o)) + "value\n";
      for (double v : r.iterates[k].values()) text += format_double(v) + "\n";
      write_text(stem + ".csv", text);
    }
  }
}

// ---------------------------------------------------------------------------

struct CollapseOptions {
  StackConfig stack;
  std::size_t seeds = 100;
  std::string out = "collapse.csv";
};

/// One row per seed and layer; layer 0 is the input tokens. The summary
/// goes in a trailing comment line.
inline std::string collapse_csv(const CollapseOptions& o, ComparisonSummary* summary_out = nullptr) {
  const ComparisonSummary s = compare_modes(o.stack, o.seeds);
  std::string text = header_line(
      "collapse", {{"layers", std::to_string(o.stack.layers)},
                   {"tokens", std::to_string(o.stack.tokens)},
                   {"dim", std::to_string(o.stack.input_dim)},
                   {"head_dim", std::to_string(o.stack.head_dim)},
                   {"weight_scale", format_double(o.stack.weight_scale)},
                   {"seed", std::to_string(o.stack.seed)},
                   {"seeds", std::to_string(o.seeds)},
                   {"out", o.out}});
  text += "layer,cosine_standard,cosine_twicing,seed\n";
  for (const auto& run : s.runs) {
    StackConfig cfg = o.stack;
    cfg.seed = run.seed;
    const double c0 = avg_pairwise_cosine(draw_stack(cfg).tokens);
    text += "0," + format_double(c0) + "," + format_double(c0) + "," + std::to_string(run.seed) + "\n";
    for (std::size_t l = 0; l < run.standard.values.size(); ++l) {
      text += std::to_string(l + 1) + "," + format_double(run.standard.values[l]) + "," +
              format_double(run.twicing.values[l]) + "," + std::to_string(run.seed) + "\n";
    }
  }
  text += "# summary wins=" + std::to_string(s.wins) + " ties=" + std::to_string(s.ties) +
          " losses=" + std::to_string(s.losses) +
          " mean_final_gap=" + format_double(s.mean_final_gap) +
          " standard_nondecreasing=" + std::to_string(s.standard_nondecreasing) + "\n";
  if (summary_out) *summary_out = s;
  return text;
}

// ---------------------------------------------------------------------------

struct NwBiasOptions {
  std::vector<double> bandwidths = default_bias_bandwidths();
  KernelFamily kernel = KernelFamily::gaussian;
  bool linear_target = false;
  double x0 = 0.3;
  std::size_t design_size = 4000;
  std::string out = "nwbias.csv";
};

struct NwBiasResult {
  BiasExperiment plain;
  BiasExperiment twiced;
};

inline NwBiasResult run_nwbias(const NwBiasOptions& o) {
  BiasDesign design;
  design.design_size = o.design_size;
  design.x0 = o.x0;
  if (o.linear_target) design.target = [](double x) { return 2.0 * x - 0.5; };
  return {bias_experiment(design, o.bandwidths, o.kernel, false),
          bias_experiment(design, o.bandwidths, o.kernel, true)};
}

inline std::string nwbias_csv(const NwBiasOptions& o, const NwBiasResult& r) {
  std::string text = header_line("nwbias", {{"h_list", join(o.bandwidths)},
                                            {"kernel", std::string(to_string(o.kernel))},
                                            {"target", o.linear_target ? "linear" : "sin2pix"},
                                            {"x0", format_double(o.x0)},
                                            {"design_size", std::to_string(o.design_size)},
                                            {"out", o.out}});
  text += "h,abs_bias_plain,abs_bias_twiced\n";
  for (std::size_t i = 0; i < o.bandwidths.size(); ++i) {
    text += format_double(o.bandwidths[i]) + "," + format_double(r.plain.abs_bias[i]) + "," +
            format_double(r.twiced.abs_bias[i]) + "\n";
  }
  text += "# slope_plain=" + format_double(r.plain.slope) +
          " slope_twiced=" + format_double(r.twiced.slope) + "\n";
  return text;
}

// ---------------------------------------------------------------------------

struct GradcheckOptions {
  std::uint64_t seed = 0;
  std::string out = "gradcheck.csv";
};

inline constexpr double kGradcheckThreshold = 1e-5;

inline std::string gradcheck_csv(const GradcheckOptions& o, bool* all_pass = nullptr) {
  const auto rows = run_gradcheck(o.seed);
  std::string text =
      header_line("gradcheck", {{"seed", std::to_string(o.seed)}, {"out", o.out}});
  text += "parameter_block,max_relative_error\n";
  bool ok = true;
  for (const auto& r : rows) {
    text += r.block + "," + format_double(r.max_relative_error) + "\n";
    ok = ok && r.max_relative_error < kGradcheckThreshold;
  }
  if (all_pass) *all_pass = ok;
  return text;
}

}  // namespace twicing::lab
