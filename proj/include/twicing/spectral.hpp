#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "twicing/error.hpp"
#include "twicing/matrix.hpp"
#include "twicing/quadrature.hpp"

namespace twicing {

/// Low-degree polynomial acting on operator spectra. Coefficients are stored
/// constant term first.
class FilterPolynomial {
 public:
  static constexpr std::size_t kMaxDegree = 4;

  explicit FilterPolynomial(std::vector<double> coefficients)
      : coefficients_(std::move(coefficients)) {
    if (coefficients_.empty()) throw DomainError("FilterPolynomial: no coefficients");
    if (coefficients_.size() > kMaxDegree + 1) {
      throw DomainError("FilterPolynomial: degree " + std::to_string(coefficients_.size() - 1) +
                        " exceeds " + std::to_string(kMaxDegree));
    }
    if (coefficients_.front() != 0.0) {
      throw DomainError("FilterPolynomial: filters require p(0) = 0");
    }
  }

  /// p(λ) = λ, plain smoothing.
  static FilterPolynomial identity() { return FilterPolynomial({0.0, 1.0}); }
  /// p̂(λ) = 2λ - λ².
  static FilterPolynomial twicing() { return FilterPolynomial({0.0, 2.0, -1.0}); }
  /// aλ + (1 - a)λ², the quadratics with p(0) = 0 and p(1) = 1.
  static FilterPolynomial quadratic_family(double a) { return FilterPolynomial({0.0, a, 1.0 - a}); }

  const std::vector<double>& coefficients() const noexcept { return coefficients_; }
  std::size_t degree() const noexcept { return coefficients_.size() - 1; }

  double operator()(double x) const {
    double r = 0.0;
    for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) r = r * x + *it;
    return r;
  }

 private:
  std::vector<double> coefficients_;
};

/// p(x)ⁿ for x in [0, 1].
inline double poly_power_eval(const FilterPolynomial& p, double x, unsigned n) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("poly_power_eval: x = " + std::to_string(x) + " outside [0, 1]");
  }
  const double px = p(x);
  double r = 1.0;
  for (unsigned k = 0; k < n; ++k) r *= px;
  return r;
}

/// p(A) by Horner's scheme in the matrix argument.
inline Matrix apply_matrix_filter(const FilterPolynomial& p, const Matrix& a) {
  if (!a.is_square()) throw DomainError("apply_matrix_filter: matrix is " + shape_string(a));
  const auto& c = p.coefficients();
  const std::size_t n = a.rows();
  Matrix r = Matrix::identity(n) * c.back();
  for (std::size_t k = c.size() - 1; k-- > 0;) {
    r = matmul(r, a);
    for (std::size_t i = 0; i < n; ++i) r(i, i) += c[k];
  }
  return r;
}

/// p(A) u by Horner's scheme on the signal, without forming p(A).
inline Matrix apply_filter_to_signal(const FilterPolynomial& p, const Matrix& a, const Matrix& u) {
  if (!a.is_square() || a.cols() != u.rows()) {
    throw DomainError("apply_filter_to_signal: operator " + shape_string(a) + " vs signal " +
                      shape_string(u));
  }
  const auto& c = p.coefficients();
  Matrix r = u * c.back();
  for (std::size_t k = c.size() - 1; k-- > 0;) {
    r = matmul(a, r);
    if (c[k] != 0.0) r += u * c[k];
  }
  return r;
}

/// κₙ(p) = ∫₀¹ p(x)ⁿ dx by composite 8-point Gauss-Legendre. The panel count
/// is the larger of nodes/8 and ⌈n/8⌉ + 4, since p(x)ⁿ concentrates near
/// x = 1 as n grows.
inline double eigencapacity_quadrature(const FilterPolynomial& p, unsigned n,
                                       std::size_t nodes = 256) {
  if (n < 1) throw DomainError("eigencapacity_quadrature: n must be >= 1");
  if (nodes < 32) throw DomainError("eigencapacity_quadrature: need at least 32 nodes");
  static const GaussLegendreRule rule = gauss_legendre(8);
  const std::size_t panels = std::max<std::size_t>(nodes / 8, (n + 7) / 8 + 4);
  return integrate_composite([&](double x) { return std::pow(p(x), static_cast<double>(n)); },
                             0.0, 1.0, panels, rule);
}

/// κₙ(λ ↦ λ) = 1/(n + 1).
inline double eigencapacity_closed_identity(unsigned n) {
  if (n < 1) throw DomainError("eigencapacity_closed_identity: n must be >= 1");
  return 1.0 / (static_cast<double>(n) + 1.0);
}

/// κₙ(2λ - λ²) = 4ⁿ (n!)² / (2n + 1)! = 4ⁿ B(n+1, n+1), in log space.
inline double eigencapacity_closed_twicing(unsigned n) {
  if (n < 1) throw DomainError("eigencapacity_closed_twicing: n must be >= 1");
  const double nd = static_cast<double>(n);
  return std::exp(nd * std::log(4.0) + 2.0 * std::lgamma(nd + 1.0) - std::lgamma(2.0 * nd + 2.0));
}

struct EigencapacityReport {
  unsigned n = 0;
  double quadrature_value = 0.0;
  double closed_form_value = 0.0;
  double asymptote = 0.0;  // 1/n or √π / (2√n)
  double ratio = 0.0;      // closed_form_value / asymptote
};

struct AsymptoticReports {
  EigencapacityReport identity;
  EigencapacityReport twicing;
};

inline AsymptoticReports asymptotic_report(unsigned n, std::size_t nodes = 256) {
  if (n < 1) throw DomainError("asymptotic_report: n must be >= 1");
  const double nd = static_cast<double>(n);
  AsymptoticReports r;
  r.identity.n = n;
  r.identity.quadrature_value = eigencapacity_quadrature(FilterPolynomial::identity(), n, nodes);
  r.identity.closed_form_value = eigencapacity_closed_identity(n);
  r.identity.asymptote = 1.0 / nd;
  r.identity.ratio = r.identity.closed_form_value / r.identity.asymptote;

  r.twicing.n = n;
  r.twicing.quadrature_value = eigencapacity_quadrature(FilterPolynomial::twicing(), n, nodes);
  r.twicing.closed_form_value = eigencapacity_closed_twicing(n);
  r.twicing.asymptote = std::sqrt(std::numbers::pi) / (2.0 * std::sqrt(nd));
  r.twicing.ratio = r.twicing.closed_form_value / r.twicing.asymptote;
  return r;
}

struct QuadraticVerdict {
  bool enhancement_ok = false;  // p̂_a(λ) >= λ on [0, 1]
  bool bounded_ok = false;      // p̂_a([0, 1]) ⊂ [0, 1]
  bool dominant = false;        // a = 2, the pointwise-largest feasible member

  bool feasible() const noexcept { return enhancement_ok && bounded_ok; }
};

/// Checks p̂_a(λ) = aλ + (1 - a)λ² against the enhancement and 0-1
/// boundedness conditions. p̂_a - λ = (a - 1)λ(1 - λ), so enhancement holds
/// iff a >= 1. The extremes over [0, 1] sit at the endpoints (values 0 and 1)
/// or at the vertex λ_a = a / (2(a - 1)) with value a² / (4(a - 1)).
inline QuadraticVerdict optimal_quadratic_check(double a) {
  if (!std::isfinite(a)) throw DomainError("optimal_quadratic_check: a must be finite");
  constexpr double kTol = 1e-12;
  QuadraticVerdict v;
  v.enhancement_ok = a >= 1.0 - kTol;

  double lo = 0.0;
  double hi = 1.0;
  if (a != 1.0) {
    const double vertex = a / (2.0 * (a - 1.0));
    if (vertex > 0.0 && vertex < 1.0) {
      const double value = a * a / (4.0 * (a - 1.0));
      lo = std::min(lo, value);
      hi = std::max(hi, value);
    }
  }
  v.bounded_ok = lo >= -kTol && hi <= 1.0 + kTol;
  v.dominant = std::abs(a - 2.0) <= kTol;
  return v;
}

}  // namespace twicing
