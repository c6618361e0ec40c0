#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "oracles.hpp"
#include "twicing/npr.hpp"
#include "twicing/random.hpp"

using namespace twicing;

namespace {

// Composite Simpson on [-L, L], an integrator independent of kernel_moments.
template <typename F>
double simpson(F&& f, double lim, int panels) {
  const double dx = 2.0 * lim / panels;
  double s = f(-lim) + f(lim);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(-lim + i * dx);
  return s * dx / 3.0;
}

Matrix equal_norm_rows(std::size_t n, std::size_t d, double radius, SplitMix64& rng) {
  Matrix m = random_normal(n, d, rng);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (double x : m.row(i)) s += x * x;
    for (double& x : m.row(i)) x *= radius / std::sqrt(s);
  }
  return m;
}

}  // namespace

TEST(Kernel1D, Shapes) {
  EXPECT_NEAR(Kernel1D::gaussian(1.0)(0.0), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15);
  EXPECT_DOUBLE_EQ(Kernel1D::box(2.0)(0.9), 0.5);
  EXPECT_DOUBLE_EQ(Kernel1D::box(2.0)(1.0), 0.25);
  EXPECT_DOUBLE_EQ(Kernel1D::box(2.0)(1.1), 0.0);
  EXPECT_DOUBLE_EQ(Kernel1D::triangle(2.0)(1.0), 0.25);
  EXPECT_DOUBLE_EQ(Kernel1D::triangle(2.0)(-2.5), 0.0);
  const Kernel1D tab = Kernel1D::tabulated_gaussian(0.5);
  EXPECT_NEAR(tab(0.123), Kernel1D::gaussian(0.5)(0.123), 1e-5);
  EXPECT_EQ(tab(100.0), 0.0);
}

TEST(Kernel1D, Errors) {
  EXPECT_THROW(Kernel1D::gaussian(0.0), DomainError);
  EXPECT_THROW(Kernel1D::box(-1.0), DomainError);
  EXPECT_THROW(Kernel1D::tabulated(1.0, 0.5, {1, 1}), DomainError);
  EXPECT_THROW(Kernel1D::tabulated(1.0, 0.5, {0.1, 1, 0.2}), DomainError);
  EXPECT_THROW(Kernel1D::tabulated(1.0, 0.5, {0.5, 5, 0.5}), DomainError);
  EXPECT_THROW(kernel_family_from_string("epanechnikov"), DomainError);
  EXPECT_EQ(kernel_family_from_string("box"), KernelFamily::box);
}

TEST(Kernel1D, MassAndSecondMomentAgreeWithSimpson) {
  const double h = 0.7;
  const Kernel1D g = Kernel1D::gaussian(h);
  const auto m = kernel_moments(g, h);
  EXPECT_NEAR(m.mu0, simpson(g, 12 * h, 20000), 1e-10);
  EXPECT_NEAR(m.mu2, h * h, 1e-10);
  EXPECT_NEAR(m.mu4, 3 * h * h * h * h, 1e-9);
  EXPECT_EQ(m.mu1, 0.0);
  const auto tri = kernel_moments(Kernel1D::triangle(h), h);
  EXPECT_NEAR(tri.mu0, 1.0, 1e-10);
  EXPECT_NEAR(tri.mu2, h * h / 6.0, 1e-4 * h * h);
  const auto box = kernel_moments(Kernel1D::box(h), h);
  EXPECT_NEAR(box.mu0, 1.0, 1e-12);
  EXPECT_NEAR(box.mu2, h * h / 12.0, 1e-5 * h * h);
}

TEST(TwicedKernel, MomentsVanishForEveryBase) {
  for (double h : {0.05, 1.0}) {
    for (KernelFamily f : {KernelFamily::gaussian, KernelFamily::box, KernelFamily::triangle,
                           KernelFamily::tabulated}) {
      const TwicedKernel k(Kernel1D::make(f, h));
      const auto m = kernel_moments(k, h);
      EXPECT_LT(std::abs(m.mu0 - 1.0), 1e-8) << to_string(f) << " h=" << h;
      EXPECT_LT(std::abs(m.mu1), 1e-10) << to_string(f);
      EXPECT_LT(std::abs(m.mu2), 1e-6 * h * h) << to_string(f);
    }
  }
}

TEST(TwicedKernel, GaussianClosedForm) {
  const double h = 0.3;
  const TwicedKernel k(Kernel1D::gaussian(h));
  for (double u : {0.0, 0.1, 0.45, -1.2}) {
    const double conv = simpson([&](double t) { return Kernel1D::gaussian(h)(t) * Kernel1D::gaussian(h)(u - t); },
                                14 * h, 40000);
    EXPECT_NEAR(k.self_convolution(u), conv, 1e-10);
    EXPECT_NEAR(k(u), 2 * Kernel1D::gaussian(h)(u) - conv, 1e-10);
  }
  // Fourth moment of 2φ_h - φ_{h√2}: 6h⁴ - 12h⁴.
  EXPECT_NEAR(kernel_moments(k, h).mu4, -6 * std::pow(h, 4), 1e-10);
}

TEST(TwicedKernel, TriangleSelfConvolutionMatchesExactIntegral) {
  const double h = 1.0;
  const Kernel1D tri = Kernel1D::triangle(h);
  const TwicedKernel k(tri);
  // (T∗T)(0) = ∫T² = 2/(3h).
  EXPECT_NEAR(k.self_convolution(0.0), 2.0 / 3.0, 1e-4);
  for (double u : {0.3, 1.0, 1.7}) {
    const double exact = simpson([&](double t) { return tri(t) * tri(u - t); }, 3 * h, 60000);
    EXPECT_NEAR(k.self_convolution(u), exact, 1e-4) << u;
  }
  EXPECT_EQ(k.self_convolution(2.5), 0.0);
}

TEST(NadarayaWatson, WeightsSumToOneEvenWhenNegative) {
  SplitMix64 rng(3);
  RegressionData d;
  for (int i = 0; i < 40; ++i) {
    d.keys.push_back(rng.uniform());
    d.values.push_back(rng.normal());
  }
  const TwicedKernel k(Kernel1D::gaussian(0.1));
  const auto w = nw_weights(d, k, 0.5);
  EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-12);
  EXPECT_TRUE(std::any_of(w.begin(), w.end(), [](double x) { return x < 0.0; }));
  double est = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) est += w[j] * d.values[j];
  EXPECT_NEAR(est, nw_estimate(d, k, 0.5), 1e-12);
}

TEST(NadarayaWatson, ReproducesConstantsAndErrors) {
  RegressionData d{{0.0, 0.5, 1.0}, {3.0, 3.0, 3.0}};
  EXPECT_NEAR(nw_estimate(d, Kernel1D::gaussian(0.4), 0.2), 3.0, 1e-15);
  EXPECT_THROW(nw_estimate(d, Kernel1D::box(0.1), 0.25), NumericError);
  EXPECT_THROW(nw_estimate(RegressionData{{0.0}, {}}, Kernel1D::box(0.1), 0.0), DomainError);
  EXPECT_THROW(nw_estimate(RegressionData{}, Kernel1D::box(0.1), 0.0), DomainError);
}

TEST(FitSlope, ExactLine) {
  const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  EXPECT_NEAR(fit_slope(x, y), 2.0, 1e-15);
  const std::vector<double> same{1, 1};
  EXPECT_THROW(fit_slope(same, same), DomainError);
}

TEST(BiasExperiment, SlopesShowSecondAndFourthOrder) {
  const auto bw = default_bias_bandwidths();
  const auto plain = bias_experiment({}, bw, KernelFamily::gaussian, false);
  const auto twiced = bias_experiment({}, bw, KernelFamily::gaussian, true);
  EXPECT_NEAR(plain.slope, 2.0, 0.3);
  EXPECT_NEAR(twiced.slope, 4.0, 0.5);
  for (std::size_t i = 0; i < bw.size(); ++i) EXPECT_LT(twiced.abs_bias[i], plain.abs_bias[i]);
}

TEST(BiasExperiment, LinearTargetHasNoSlope) {
  BiasDesign d;
  d.target = [](double x) { return 2 * x - 0.5; };
  d.design_size = 401;
  d.x0 = 0.5;
  const auto r = bias_experiment(d, default_bias_bandwidths(), KernelFamily::gaussian, false);
  for (double b : r.abs_bias) EXPECT_LT(b, 1e-12);
}

TEST(BiasExperiment, Preconditions) {
  const std::vector<double> two{0.02, 0.03};
  EXPECT_THROW(bias_experiment({}, two, KernelFamily::gaussian, false), DomainError);
  BiasDesign edge;
  edge.x0 = 0.1;
  EXPECT_THROW(bias_experiment(edge, default_bias_bandwidths(), KernelFamily::gaussian, false),
               DomainError);
}

TEST(AttentionNw, EqualNormsAgree) {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix k = equal_norm_rows(10, 4, rng.uniform(0.5, 2.0), rng);
    const Matrix v = random_normal(10, 3, rng);
    const Matrix q = random_normal(6, 4, rng);
    const auto r = attention_nw_equivalence(k, v, q, rng.uniform(0.5, 2.0));
    EXPECT_TRUE(r.norms_equal);
    EXPECT_LT(r.max_discrepancy, 1e-12);
  }
}

TEST(AttentionNw, UnequalNormsDisagree) {
  SplitMix64 rng(6);
  Matrix k = equal_norm_rows(8, 3, 1.0, rng);
  for (double& x : k.row(0)) x *= 3.0;
  const auto r = attention_nw_equivalence(k, random_normal(8, 2, rng), random_normal(4, 3, rng), 1.0);
  EXPECT_FALSE(r.norms_equal);
  EXPECT_GT(r.max_discrepancy, 1e-6);
  EXPECT_THROW(attention_nw_equivalence(k, Matrix(7, 2), Matrix(1, 3), 1.0), DomainError);
  EXPECT_THROW(attention_nw_equivalence(k, Matrix(8, 2), Matrix(1, 3), 0.0), DomainError);
}

TEST(ConvolutionSquare, CirculantGeneratorsAreExact) {
  const std::size_t n = 32;
  std::vector<double> delta(n, 0.0);
  delta[0] = 1.0;
  const std::vector<double> uniform(n, 1.0 / n);
  for (const auto& g : {delta, uniform, oracle::gaussian_generator(n, 2.0)}) {
    EXPECT_LT(convolution_square_equivalence({n, g}), 1e-14);
  }
}

TEST(ConvolutionSquare, SelfConvolutionOracle) {
  const std::vector<double> g{0.5, 0.25, 0.0, 0.25};
  const auto c = periodic_self_convolution(g);
  // Row 0 of A² for the 4-cycle generator.
  EXPECT_NEAR(c[0], 0.375, 1e-16);
  EXPECT_NEAR(c[1], 0.25, 1e-16);
  EXPECT_NEAR(c[2], 0.125, 1e-16);
  EXPECT_NEAR(c[3], 0.25, 1e-16);
  EXPECT_THROW(convolution_square_equivalence({2, {0.7, 0.7}}), DomainError);
  EXPECT_THROW(convolution_square_equivalence({2, {1.5, -0.5}}), DomainError);
}

TEST(NprExamples, NadarayaWatsonSmallCases) {
  const RegressionData one{{0.3}, {4.5}};
  EXPECT_EQ(nw_estimate(one, Kernel1D::gaussian(0.1), 0.9), 4.5);
  const RegressionData two{{0.0, 1.0}, {2.0, 6.0}};
  EXPECT_NEAR(nw_estimate(two, Kernel1D::gaussian(1.0), 0.5), 4.0, 1e-15);
}

TEST(NprExamples, AttentionNwSmallCases) {
  const Matrix keys = Matrix::from_rows({{1, 0}, {0, 1}});
  const Matrix values = Matrix::column(std::vector<double>{1, 0});
  const Matrix query = Matrix::from_rows({{1, 0}});
  const auto r = attention_nw_equivalence(keys, values, query, 1.0);
  EXPECT_TRUE(r.norms_equal);
  EXPECT_LT(r.max_discrepancy, 1e-15);
  const double e = std::exp(1.0);
  EXPECT_NEAR(matmul(row_softmax(matmul_transposed(query, keys), 1.0), values)(0, 0), e / (e + 1), 1e-15);

  const auto single = attention_nw_equivalence(Matrix::from_rows({{0.3, -2}}), Matrix::from_rows({{7}}),
                                               Matrix::from_rows({{1, 1}, {-4, 0}}), 0.5);
  EXPECT_EQ(single.max_discrepancy, 0.0);

  const auto unequal = attention_nw_equivalence(Matrix::from_rows({{1, 0}, {0, 2}}), values, query, 1.0);
  EXPECT_FALSE(unequal.norms_equal);
  EXPECT_GT(unequal.max_discrepancy, 0.0);
}
