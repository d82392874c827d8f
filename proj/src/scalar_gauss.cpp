#include "ehrlab/scalar_gauss.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "ehrlab/errors.hpp"

namespace ehrlab {

namespace {

constexpr double kInvSqrt2 = 0.707106781186547524400844362105;

// Wichura's AS241 (PPND16) for the lower tail, p in (0, 0.5].
double as241_lower(double p) {
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r +
                 67265.770927008700853) * r + 45921.953931549871457) * r +
               13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((r * 5226.495278852545925 + 28729.085735721942674) * r +
                 39307.89580009271061) * r + 21213.794301586595867) * r +
               5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  double r = std::sqrt(-std::log(p));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r +
                0.24178072517745061177) * r + 1.27045825245236838258) * r +
              3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r +
                0.0151986665636164571966) * r + 0.14810397642748007459) * r +
              0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r +
                0.0012426609473880784386) * r + 0.026532189526576123093) * r +
              0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
              0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
  }
  return -val;
}

// Solves Phi(x) = p for p in (0, 0.5]; two Newton steps polish the
// rational guess to full precision.
double quantile_lower(double p) {
  double x = as241_lower(p);
  for (int it = 0; it < 2; ++it) {
    const double d = normal_pdf(x);
    if (d <= 0.0) break;
    x -= (0.5 * std::erfc(-x * kInvSqrt2) - p) / d;
  }
  return x;
}

}  // namespace

double normal_pdf(double x) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) {
  if (!std::isfinite(x)) throw DomainError("normal_cdf: non-finite argument");
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

double normal_ccdf(double x) {
  if (!std::isfinite(x)) throw DomainError("normal_ccdf: non-finite argument");
  return 0.5 * std::erfc(x * kInvSqrt2);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0,1)");
  if (p <= 0.5) return quantile_lower(p);
  // 1 - p is exact for p >= 1/2.
  return -quantile_lower(1.0 - p);
}

double normal_quantile_saturating(double p) noexcept {
  if (!(p > 0.0)) return -kQuantileCap;
  if (!(p < 1.0)) return kQuantileCap;
  const double q = p <= 0.5 ? quantile_lower(p) : -quantile_lower(1.0 - p);
  return std::clamp(q, -kQuantileCap, kQuantileCap);
}

double normal_quantile_pair(double p, double complement) noexcept {
  if (p <= complement) return normal_quantile_saturating(p);
  return -normal_quantile_saturating(complement);
}

double gauss_iso(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("gauss_iso: argument must lie in [0,1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return normal_pdf(normal_quantile(x));
}

QuadRule hermite_rule(int order) {
  if (order < 1 || order > kMaxQuadOrder)
    throw ConfigError("hermite_rule: order must be in [1, 512]");
  const int n = order;
  const double pim4 = 0.7511255444649425;  // pi^{-1/4}

  // Starting nodes from the Jacobi matrix of the physicists' Hermite
  // recurrence; asymptotic guesses lose track of the roots past order ~200.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(std::max(n - 1, 0));
  for (int j = 1; j < n; ++j) sub[j - 1] = std::sqrt(0.5 * j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  if (n > 1) {
    eig.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw PrecisionError("hermite_rule: eigen solve failed");
  }

  // The recurrence is run on p_j(z) exp(-z^2/2), which stays O(1) where
  // the unscaled orthonormal polynomials overflow.
  auto eval = [&](double zz, double& p_n, double& p_nm1) {
    double p1 = pim4 * std::exp(-0.5 * zz * zz), p2 = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = zz * std::sqrt(2.0 / j) * p2 - std::sqrt(static_cast<double>(j - 1) / j) * p3;
    }
    p_n = p1;
    p_nm1 = p2;
  };

  QuadRule rule;
  rule.order = n;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // i-th largest root; symmetric partner filled alongside
    double z = n > 1 ? std::fabs(eig.eigenvalues()[n - 1 - i]) : 0.0;
    if (2 * i + 1 == n) {
      z = 0.0;
    } else {
      double pn = 0.0, pnm1 = 0.0;
      for (int it = 0; it < 3; ++it) {
        eval(z, pn, pnm1);
        if (pnm1 == 0.0) break;
        z -= pn / (std::sqrt(2.0 * n) * pnm1);
      }
    }
    double pn = 0.0, pnm1 = 0.0;
    eval(z, pn, pnm1);
    const double pp = std::sqrt(2.0 * n) * pnm1;
    const double w = pp != 0.0 ? 2.0 * std::exp(-z * z) / (pp * pp) * inv_sqrt_pi : 0.0;
    rule.nodes[n - 1 - i] = std::numbers::sqrt2 * z;
    rule.nodes[i] = -std::numbers::sqrt2 * z;
    rule.weights[n - 1 - i] = w;
    rule.weights[i] = w;
  }
  return rule;
}

QuadRule trapezoid_rule(int nodes, double half_width) {
  if (nodes < 3) throw ConfigError("trapezoid_rule: need at least 3 nodes");
  if (!(half_width > 0.0 && std::isfinite(half_width)))
    throw ConfigError("trapezoid_rule: half_width must be > 0");
  QuadRule rule;
  rule.kind = QuadKind::trapezoid;
  rule.order = nodes;
  rule.nodes.resize(nodes);
  rule.weights.resize(nodes);
  const double h = 2.0 * half_width / (nodes - 1);
  double total = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double z = -half_width + i * h;
    rule.nodes[i] = z;
    rule.weights[i] = (i == 0 || i == nodes - 1 ? 0.5 : 1.0) * std::exp(-0.5 * z * z);
    total += rule.weights[i];
  }
  for (double& w : rule.weights) w /= total;
  return rule;
}

}  // namespace ehrlab
