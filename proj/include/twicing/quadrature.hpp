#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "twicing/error.hpp"

namespace twicing {

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule. Roots of P_n by Newton iteration from the
/// Chebyshev-like initial guess cos(π(i - 1/4)/(n + 1/2)).
inline GaussLegendreRule gauss_legendre(std::size_t n) {
  if (n == 0) throw DomainError("gauss_legendre: need at least one node");
  GaussLegendreRule rule{std::vector<double>(n), std::vector<double>(n)};
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (std::size_t k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        const double kd = static_cast<double>(k);
        p0 = ((2.0 * kd - 1.0) * z * p1 - (kd - 1.0) * p2) / kd;
      }
      dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

/// Composite rule: `rule` applied on each of `panels` equal subintervals of [a, b].
template <typename F>
double integrate_composite(F&& f, double a, double b, std::size_t panels,
                           const GaussLegendreRule& rule) {
  if (panels == 0) throw DomainError("integrate_composite: need at least one panel");
  const double width = (b - a) / static_cast<double>(panels);
  double total = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + width * static_cast<double>(p);
    const double mid = lo + 0.5 * width;
    double s = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k)
      s += rule.weights[k] * f(mid + 0.5 * width * rule.nodes[k]);
    total += 0.5 * width * s;
  }
  return total;
}

}  // namespace twicing
