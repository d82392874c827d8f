#pragma once

#include <cstddef>
#include <vector>

namespace ehrlab {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;

// Quantiles are saturated at +-kQuantileCap when a probability is exactly 0
// or 1. Phi(-37.5) is still a normal double, so the pair (value, quantile)
// stays invertible.
inline constexpr double kQuantileCap = 37.5;

double normal_pdf(double x) noexcept;

// Standard normal CDF. Throws DomainError for NaN or infinite input.
double normal_cdf(double x);

// 1 - Phi(x), accurate in the upper tail.
double normal_ccdf(double x);

// Inverse of normal_cdf on (0,1). Throws DomainError outside (0,1).
double normal_quantile(double p);

// Like normal_quantile, but maps p <= 0 / p >= 1 to -+kQuantileCap and
// clamps the result to [-kQuantileCap, kQuantileCap].
double normal_quantile_saturating(double p) noexcept;

// Quantile from the pair (p, 1-p), using whichever side is accurate.
double normal_quantile_pair(double p, double complement) noexcept;

// Gaussian isoperimetric profile phi(Phi^{-1}(x)); 0 at x = 0 and x = 1.
double gauss_iso(double x);

enum class QuadKind { gauss_hermite_probabilist, trapezoid };

// Gauss-Hermite rule for the weight exp(-x^2/2)/sqrt(2 pi): sum_i w_i f(x_i)
// approximates E f(N(0,1)). Nodes ascending, weights sum to one.
struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  QuadKind kind = QuadKind::gauss_hermite_probabilist;
  int order = 0;

  template <class F>
  double expect(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
    return s;
  }
};

inline constexpr int kDefaultQuadOrder = 64;
inline constexpr int kMaxQuadOrder = 512;

// Throws ConfigError unless 1 <= order <= 512. Very high orders have outer
// weights that underflow to zero.
QuadRule hermite_rule(int order = kDefaultQuadOrder);

// Equally spaced rule on [-half_width, half_width] for the same weight,
// renormalised to sum to one. Slower than Gauss-Hermite but it converges on
// kinked or narrow profiles, where Gauss-Hermite nodes alias the features.
// order is the node count (odd keeps 0 as a node).
QuadRule trapezoid_rule(int nodes = 2001, double half_width = 10.0);

}  // namespace ehrlab
