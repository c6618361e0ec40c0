#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "twicing/error.hpp"
#include "twicing/matrix.hpp"

namespace twicing {

enum class KernelFamily { gaussian, box, triangle, tabulated };

inline std::string_view to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::box: return "box";
    case KernelFamily::triangle: return "triangle";
    case KernelFamily::tabulated: return "tabulated";
  }
  return "unknown";
}

inline KernelFamily kernel_family_from_string(std::string_view name) {
  if (name == "gaussian") return KernelFamily::gaussian;
  if (name == "box") return KernelFamily::box;
  if (name == "triangle") return KernelFamily::triangle;
  if (name == "tabulated") return KernelFamily::tabulated;
  throw DomainError("unknown kernel family '" + std::string(name) + "'");
}

/// Grid used for kernel quadrature and grid convolution: step h/200 on ±12h.
struct KernelGrid {
  static constexpr int kStepsPerBandwidth = 200;
  static constexpr int kSupportBandwidths = 12;

  double step;
  int half_count;  // nodes j·step for |j| <= half_count

  static KernelGrid for_bandwidth(double h) {
    return {h / kStepsPerBandwidth, kStepsPerBandwidth * kSupportBandwidths};
  }
  double node(int j) const { return static_cast<double>(j) * step; }
};

/// Symmetric univariate smoothing kernel with bandwidth h, normalized to unit
/// mass. Families:
///   gaussian   φ_h(u) = exp(-u²/2h²) / (h√2π)
///   box        1/h on [-h/2, h/2], half height at the two jumps
///   triangle   (1 - |u|/h)/h on [-h, h]
///   tabulated  linear interpolation of symmetric samples on a uniform grid
class Kernel1D {
 public:
  static Kernel1D gaussian(double h) { return Kernel1D(KernelFamily::gaussian, h); }
  static Kernel1D box(double h) { return Kernel1D(KernelFamily::box, h); }
  static Kernel1D triangle(double h) { return Kernel1D(KernelFamily::triangle, h); }

  /// `values` are samples at (i - (n-1)/2)·step for i = 0..n-1, so n must be odd
  /// and the table centred on zero. Zero outside the table.
  static Kernel1D tabulated(double h, double step, std::vector<double> values) {
    Kernel1D k(KernelFamily::tabulated, h);
    if (!(step > 0.0)) throw DomainError("Kernel1D::tabulated: step must be positive");
    if (values.size() % 2 == 0) throw DomainError("Kernel1D::tabulated: need an odd sample count");
    const std::size_t n = values.size();
    for (std::size_t i = 0; i < n / 2; ++i) {
      if (std::abs(values[i] - values[n - 1 - i]) > 1e-14 * std::abs(values[i])) {
        throw DomainError("Kernel1D::tabulated: samples are not symmetric");
      }
    }
    k.step_ = step;
    k.table_ = std::move(values);
    const double mass = k.mass();
    if (std::abs(mass - 1.0) > 1e-8) {
      throw DomainError("Kernel1D::tabulated: mass " + std::to_string(mass) + " is not 1");
    }
    return k;
  }

  /// Tabulated copy of a gaussian sampled on its own quadrature grid.
  static Kernel1D tabulated_gaussian(double h) {
    const Kernel1D g = gaussian(h);
    const KernelGrid grid = KernelGrid::for_bandwidth(h);
    std::vector<double> values(2 * grid.half_count + 1);
    for (int j = -grid.half_count; j <= grid.half_count; ++j)
      values[static_cast<std::size_t>(j + grid.half_count)] = g(grid.node(j));
    return tabulated(h, grid.step, std::move(values));
  }

  static Kernel1D make(KernelFamily family, double h) {
    switch (family) {
      case KernelFamily::gaussian: return gaussian(h);
      case KernelFamily::box: return box(h);
      case KernelFamily::triangle: return triangle(h);
      case KernelFamily::tabulated: return tabulated_gaussian(h);
    }
    throw DomainError("Kernel1D::make: unknown family");
  }

  KernelFamily family() const noexcept { return family_; }
  double bandwidth() const noexcept { return h_; }

  double operator()(double u) const {
    const double a = std::abs(u);
    switch (family_) {
      case KernelFamily::gaussian: {
        const double z = u / h_;
        return std::exp(-0.5 * z * z) / (h_ * std::sqrt(2.0 * std::numbers::pi));
      }
      case KernelFamily::box: {
        const double edge = 0.5 * h_;
        if (std::abs(a - edge) <= 1e-12 * h_) return 0.5 / h_;
        return a < edge ? 1.0 / h_ : 0.0;
      }
      case KernelFamily::triangle:
        return a < h_ ? (1.0 - a / h_) / h_ : 0.0;
      case KernelFamily::tabulated: {
        const double half = static_cast<double>(table_.size() / 2);
        const double pos = a / step_;
        if (pos >= half) return pos == half ? table_.back() : 0.0;
        const auto i = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(i);
        const std::size_t c = table_.size() / 2;
        return (1.0 - frac) * table_[c + i] + frac * table_[c + i + 1];
      }
    }
    return 0.0;
  }

 private:
  Kernel1D(KernelFamily family, double h) : family_(family), h_(h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("Kernel1D: bandwidth must be positive");
  }

  double mass() const;

  KernelFamily family_;
  double h_;
  double step_ = 0.0;
  std::vector<double> table_;
};

/// Moments ∫uʳk(u)du by the trapezoidal rule on the kernel grid (step h/200,
/// support ±12h). Odd moments are accumulated from paired nodes ±u, so they
/// vanish exactly for symmetric evaluators.
struct MomentReport {
  double mu0 = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double mu3 = 0.0;
  double mu4 = 0.0;
  double step = 0.0;
  double support = 0.0;
};

template <typename F>
MomentReport kernel_moments(F&& k, double h) {
  if (!(h > 0.0)) throw DomainError("kernel_moments: bandwidth must be positive");
  const KernelGrid grid = KernelGrid::for_bandwidth(h);
  MomentReport r;
  r.step = grid.step;
  r.support = grid.node(grid.half_count);
  r.mu0 = k(0.0);
  for (int j = 1; j <= grid.half_count; ++j) {
    const double u = grid.node(j);
    const double kp = k(u);
    const double km = k(-u);
    const double even = kp + km;
    const double odd = kp - km;
    const double u2 = u * u;
    r.mu0 += even;
    r.mu1 += u * odd;
    r.mu2 += u2 * even;
    r.mu3 += u2 * u * odd;
    r.mu4 += u2 * u2 * even;
  }
  r.mu0 *= grid.step;
  r.mu1 *= grid.step;
  r.mu2 *= grid.step;
  r.mu3 *= grid.step;
  r.mu4 *= grid.step;
  return r;
}

inline double Kernel1D::mass() const {
  return kernel_moments([this](double u) { return (*this)(u); }, h_).mu0;
}

/// K̂(u) = 2K(u) - (K∗K)(u). The gaussian base uses the closed form
/// K∗K = φ_{h√2}; every other base convolves on the kernel grid and
/// interpolates linearly between nodes.
class TwicedKernel {
 public:
  explicit TwicedKernel(Kernel1D base) : base_(std::move(base)) {
    if (base_.family() == KernelFamily::gaussian) return;
    const KernelGrid grid = KernelGrid::for_bandwidth(base_.bandwidth());
    step_ = grid.step;
    const int half = grid.half_count;
    std::vector<double> k(2 * half + 1);
    for (int j = -half; j <= half; ++j) k[static_cast<std::size_t>(j + half)] = base_(grid.node(j));
    int first = 0;
    while (first < 2 * half && k[static_cast<std::size_t>(first)] == 0.0) ++first;
    int last = 2 * half;
    while (last > first && k[static_cast<std::size_t>(last)] == 0.0) --last;

    conv_.assign(2 * half + 1, 0.0);
    for (int m = 0; m <= half; ++m) {
      // c_m = step · Σ_j k_j k_{m-j}, indices offset by `half`.
      double s = 0.0;
      for (int a = first; a <= last; ++a) {
        const int b = m + 2 * half - a;
        if (b < 0 || b > 2 * half) continue;
        s += k[static_cast<std::size_t>(a)] * k[static_cast<std::size_t>(b)];
      }
      conv_[static_cast<std::size_t>(half + m)] = conv_[static_cast<std::size_t>(half - m)] =
          s * step_;
    }
  }

  const Kernel1D& base() const noexcept { return base_; }

  double self_convolution(double u) const {
    if (base_.family() == KernelFamily::gaussian) {
      return Kernel1D::gaussian(base_.bandwidth() * std::numbers::sqrt2)(u);
    }
    const std::size_t half = conv_.size() / 2;
    const double pos = std::abs(u) / step_;
    if (pos >= static_cast<double>(half)) return pos == static_cast<double>(half) ? conv_.back() : 0.0;
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return (1.0 - frac) * conv_[half + i] + frac * conv_[half + i + 1];
  }

  double operator()(double u) const { return 2.0 * base_(u) - self_convolution(u); }

 private:
  Kernel1D base_;
  double step_ = 0.0;
  std::vector<double> conv_;
};

inline TwicedKernel kernel_self_convolve(const Kernel1D& k) { return TwicedKernel(k); }

/// Scalar regression sample: values v(j) observed at keys k(j).
struct RegressionData {
  std::vector<double> keys;
  std::vector<double> values;

  void validate() const {
    if (keys.size() != values.size()) throw DomainError("RegressionData: length mismatch");
    if (keys.empty()) throw DomainError("RegressionData: empty");
  }
};

/// Normalized Nadaraya-Watson weights at q. Twiced kernels may produce
/// negative weights; they still sum to one.
template <typename K>
std::vector<double> nw_weights(const RegressionData& data, K&& kernel, double q) {
  data.validate();
  std::vector<double> w(data.keys.size());
  double den = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    w[j] = kernel(q - data.keys[j]);
    den += w[j];
  }
  if (!(std::abs(den) > 1e-300)) {
    throw NumericError("nw_estimate: kernel weights vanish at q = " + std::to_string(q));
  }
  for (double& x : w) x /= den;
  return w;
}

/// f̂(q) = Σⱼ vⱼ K(q - kⱼ) / Σⱼ K(q - kⱼ).
template <typename K>
double nw_estimate(const RegressionData& data, K&& kernel, double q) {
  data.validate();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < data.keys.size(); ++j) {
    const double w = kernel(q - data.keys[j]);
    num += w * data.values[j];
    den += w;
  }
  if (!(std::abs(den) > 1e-300)) {
    throw NumericError("nw_estimate: kernel weights vanish at q = " + std::to_string(q));
  }
  return num / den;
}

/// Least-squares slope of y against x.
inline double fit_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_slope: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw DomainError("fit_slope: x values are all equal");
  return sxy / sxx;
}

struct BiasExperiment {
  std::vector<double> bandwidths;
  std::vector<double> abs_bias;
  double slope = std::numeric_limits<double>::quiet_NaN();  // NaN when some bias is exactly 0
};

struct BiasDesign {
  std::function<double(double)> target = [](double x) {
    return std::sin(2.0 * std::numbers::pi * x);
  };
  std::size_t design_size = 4000;  // uniform grid on [0, 1], endpoints included
  double x0 = 0.3;
};

/// Evaluation point must sit this many bandwidths inside [0, 1].
inline constexpr double kBiasBoundaryBandwidths = 3.5;

inline std::vector<double> default_bias_bandwidths() {
  return {0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08};
}

/// Noiseless NW bias |f̂(x0) - m(x0)| per bandwidth and the log-log slope.
inline BiasExperiment bias_experiment(const BiasDesign& design, std::span<const double> bandwidths,
                                      KernelFamily family, bool twiced) {
  if (bandwidths.size() < 3) throw DomainError("bias_experiment: need at least 3 bandwidths");
  if (design.design_size < 2) throw DomainError("bias_experiment: design needs >= 2 points");
  const double hmax = *std::max_element(bandwidths.begin(), bandwidths.end());
  const double margin = std::min(design.x0, 1.0 - design.x0);
  if (margin < kBiasBoundaryBandwidths * hmax) {
    throw DomainError("bias_experiment: x0 = " + std::to_string(design.x0) + " lies within " +
                      std::to_string(kBiasBoundaryBandwidths) + " bandwidths of the boundary");
  }

  RegressionData data;
  data.keys.resize(design.design_size);
  data.values.resize(design.design_size);
  const double last = static_cast<double>(design.design_size - 1);
  for (std::size_t i = 0; i < design.design_size; ++i) {
    data.keys[i] = static_cast<double>(i) / last;
    data.values[i] = design.target(data.keys[i]);
  }
  const double truth = design.target(design.x0);

  BiasExperiment out;
  out.bandwidths.assign(bandwidths.begin(), bandwidths.end());
  bool all_positive = true;
  for (double h : bandwidths) {
    const Kernel1D base = Kernel1D::make(family, h);
    double estimate = 0.0;
    if (twiced) {
      const TwicedKernel k = kernel_self_convolve(base);
      estimate = nw_estimate(data, k, design.x0);
    } else {
      estimate = nw_estimate(data, base, design.x0);
    }
    out.abs_bias.push_back(std::abs(estimate - truth));
    all_positive = all_positive && out.abs_bias.back() > 0.0;
  }
  if (all_positive) {
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t i = 0; i < out.bandwidths.size(); ++i) {
      lx.push_back(std::log(out.bandwidths[i]));
      ly.push_back(std::log(out.abs_bias[i]));
    }
    out.slope = fit_slope(lx, ly);
  }
  return out;
}

struct EquivalenceReport {
  double max_discrepancy = 0.0;
  bool norms_equal = false;  // precondition for exact agreement
};

/// Compares the isotropic-gaussian NW estimator (bandwidth σ) with softmax
/// attention at temperature σ². They agree exactly only when every key has
/// the same Euclidean norm; otherwise the discrepancy is still reported.
inline EquivalenceReport attention_nw_equivalence(const Matrix& keys, const Matrix& values,
                                                  const Matrix& queries, double sigma) {
  if (keys.rows() == 0 || keys.rows() != values.rows() || keys.cols() != queries.cols()) {
    throw DomainError("attention_nw_equivalence: keys " + shape_string(keys) + ", values " +
                      shape_string(values) + ", queries " + shape_string(queries));
  }
  if (!(sigma > 0.0)) throw DomainError("attention_nw_equivalence: sigma must be positive");
  const std::size_t n = keys.rows();
  const double s2 = sigma * sigma;

  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (double x : keys.row(j)) s += x * x;
    norms[j] = std::sqrt(s);
  }
  const double nmax = *std::max_element(norms.begin(), norms.end());
  const double nmin = *std::min_element(norms.begin(), norms.end());

  EquivalenceReport report;
  report.norms_equal = nmax - nmin <= 1e-12 * std::max(1.0, nmax);

  const Matrix attention = matmul(row_softmax(matmul_transposed(queries, keys), s2), values);

  Matrix logw(queries.rows(), n);
  for (std::size_t i = 0; i < queries.rows(); ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < keys.cols(); ++c) {
        const double d = queries(i, c) - keys(j, c);
        d2 += d * d;
      }
      logw(i, j) = -d2 / 2.0;
    }
  }
  const Matrix nw = matmul(row_softmax(logw, s2), values);
  report.max_discrepancy = max_abs_diff(attention, nw);
  return report;
}

/// Max entry difference between A² and the circulant of the periodic
/// self-convolution of A's generator.
inline double convolution_square_equivalence(const CirculantSpec& spec) {
  double total = 0.0;
  for (double g : spec.generator) {
    if (g < 0.0) throw DomainError("convolution_square_equivalence: negative generator entry");
    total += g;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError("convolution_square_equivalence: generator sums to " +
                      std::to_string(total) + ", not 1");
  }
  const Matrix a = build_circulant(spec);
  const Matrix a2 = matmul(a, a);
  const Matrix conv = build_circulant({spec.size, periodic_self_convolution(spec.generator)});
  return max_abs_diff(a2, conv);
}

}  // namespace twicing
