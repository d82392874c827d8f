#include "ehrlab/semigroup.hpp"

#include <algorithm>
#include <cmath>

#include "ehrlab/errors.hpp"

namespace ehrlab {

namespace {

void check_limit(double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw DomainError("GridFunction: limits must lie in [0,1]");
}

void check_grid(double lo, double hi, std::size_t n) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
    throw DomainError("GridFunction: need finite lo < hi");
  if (n < 3) throw ShapeError("GridFunction: need at least 3 grid points");
}

}  // namespace

GridFunction GridFunction::from_values(double lo, double hi, std::vector<double> values,
                                       double limit_neg, double limit_pos) {
  check_grid(lo, hi, values.size());
  check_limit(limit_neg);
  check_limit(limit_pos);
  std::vector<double> q(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("GridFunction: values must lie in [0,1]");
    q[i] = normal_quantile_saturating(v);
  }
  return from_quantiles(lo, hi, std::move(q), limit_neg, limit_pos);
}

GridFunction GridFunction::from_quantiles(double lo, double hi, std::vector<double> quantiles,
                                          double limit_neg, double limit_pos) {
  check_grid(lo, hi, quantiles.size());
  check_limit(limit_neg);
  check_limit(limit_pos);
  GridFunction f;
  f.lo_ = lo;
  f.hi_ = hi;
  f.dx_ = (hi - lo) / static_cast<double>(quantiles.size() - 1);
  for (double& q : quantiles) {
    if (std::isnan(q)) throw DomainError("GridFunction: NaN quantile");
    q = std::clamp(q, -kQuantileCap, kQuantileCap);
  }
  f.q_ = std::move(quantiles);
  f.lim_neg_ = limit_neg;
  f.lim_pos_ = limit_pos;
  f.finish();
  return f;
}

void GridFunction::finish() {
  const std::size_t n = q_.size();
  p_.resize(n);
  c_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    p_[i] = 0.5 * std::erfc(-q_[i] * 0.70710678118654752440);
    c_[i] = 0.5 * std::erfc(q_[i] * 0.70710678118654752440);
  }
  // natural cubic spline: M_0 = M_{n-1} = 0, Thomas algorithm for the rest
  m2_.assign(n, 0.0);
  if (n < 3) return;
  const std::size_t k = n - 2;
  std::vector<double> cp(k), dp(k);
  const double s = 6.0 / (dx_ * dx_);
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t i = j + 1;
    const double rhs = s * (q_[i + 1] - 2.0 * q_[i] + q_[i - 1]);
    if (j == 0) {
      cp[j] = 1.0 / 4.0;
      dp[j] = rhs / 4.0;
    } else {
      const double den = 4.0 - cp[j - 1];
      cp[j] = 1.0 / den;
      dp[j] = (rhs - dp[j - 1]) / den;
    }
  }
  m2_[k] = dp[k - 1];
  for (std::size_t j = k - 1; j-- > 0;) m2_[j + 1] = dp[j] - cp[j] * m2_[j + 2];
}

double GridFunction::spline_q(std::size_t i, double t) const noexcept {
  const double a = 1.0 - t, b = t;
  return a * q_[i] + b * q_[i + 1] +
         ((a * a * a - a) * m2_[i] + (b * b * b - b) * m2_[i + 1]) * (dx_ * dx_) / 6.0;
}

double GridFunction::spline_dq(std::size_t i, double t) const noexcept {
  const double a = 1.0 - t, b = t;
  return (q_[i + 1] - q_[i]) / dx_ - (3.0 * a * a - 1.0) / 6.0 * dx_ * m2_[i] +
         (3.0 * b * b - 1.0) / 6.0 * dx_ * m2_[i + 1];
}

void GridFunction::blend(double x, double& p, double& c, double& slope) const noexcept {
  const double w = blend_width();
  double end_p, end_c, lim, frac;
  if (x < lo_) {
    end_p = p_.front();
    end_c = c_.front();
    lim = lim_neg_;
    frac = (lo_ - x) / w;
    slope = -(lim - end_p) / w;
  } else {
    end_p = p_.back();
    end_c = c_.back();
    lim = lim_pos_;
    frac = (x - hi_) / w;
    slope = (lim - end_p) / w;
  }
  if (frac >= 1.0) {
    p = lim;
    c = 1.0 - lim;
    slope = 0.0;
    return;
  }
  p = end_p + (lim - end_p) * frac;
  c = end_c + ((1.0 - lim) - end_c) * frac;
}

void GridFunction::value_pair(double x, double& p, double& c) const noexcept {
  if (x < lo_ || x > hi_) {
    double slope;
    blend(x, p, c, slope);
    return;
  }
  const double q = quantile(x);
  p = 0.5 * std::erfc(-q * 0.70710678118654752440);
  c = 0.5 * std::erfc(q * 0.70710678118654752440);
}

double GridFunction::value(double x) const noexcept {
  double p, c;
  value_pair(x, p, c);
  return p;
}

double GridFunction::quantile(double x) const noexcept {
  if (x < lo_ || x > hi_) {
    double p, c, slope;
    blend(x, p, c, slope);
    return normal_quantile_pair(p, c);
  }
  const double u = (x - lo_) / dx_;
  std::size_t i = static_cast<std::size_t>(u);
  if (i >= q_.size() - 1) i = q_.size() - 2;
  return spline_q(i, u - static_cast<double>(i));
}

double GridFunction::quantile_slope(double x) const noexcept {
  if (x < lo_ || x > hi_) {
    double p, c, slope;
    blend(x, p, c, slope);
    const double q = normal_quantile_pair(p, c);
    const double d = normal_pdf(q);
    return d > 0.0 ? slope / d : 0.0;
  }
  const double u = (x - lo_) / dx_;
  std::size_t i = static_cast<std::size_t>(u);
  if (i >= q_.size() - 1) i = q_.size() - 2;
  return spline_dq(i, u - static_cast<double>(i));
}

double GridFunction::derivative(double x) const noexcept {
  if (x < lo_ || x > hi_) {
    double p, c, slope;
    blend(x, p, c, slope);
    return slope;
  }
  return normal_pdf(quantile(x)) * quantile_slope(x);
}

GridFunction ou_apply(const GridFunction& f, double t, double sigma2, const QuadRule& rule) {
  if (!(std::isfinite(t) && t >= 0.0)) throw DomainError("ou_apply: t must be finite and >= 0");
  if (!(sigma2 > 0.0 && std::isfinite(sigma2))) throw DomainError("ou_apply: sigma2 must be > 0");
  if (t == 0.0) return f;
  const double decay = std::exp(-t);
  const double spread = std::sqrt(-std::expm1(-2.0 * t) * sigma2);
  const std::size_t n = f.n();
  const std::size_t m = rule.nodes.size();
  std::vector<double> q(n);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const double base = decay * f.node(i);
    double p = 0.0, c = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      double pk, ck;
      f.value_pair(base + spread * rule.nodes[k], pk, ck);
      p += rule.weights[k] * pk;
      c += rule.weights[k] * ck;
    }
    q[i] = normal_quantile_pair(p, c);
  }
  return GridFunction::from_quantiles(f.lo(), f.hi(), std::move(q), f.limit_neg(), f.limit_pos());
}

double ou_halfline(double a, double t, double sigma2, double x) {
  return normal_cdf(ou_halfline_quantile(HalfLine{a, true}, t, sigma2, x));
}

double ou_halfline_quantile(const HalfLine& h, double t, double sigma2, double x) {
  if (!(t > 0.0)) throw DomainError("ou_halfline: closed form needs t > 0");
  if (!(sigma2 > 0.0)) throw DomainError("ou_halfline: sigma2 must be > 0");
  const double scale = std::sqrt(-std::expm1(-2.0 * t) * sigma2);
  if (std::isinf(t)) return (h.lower ? h.threshold : -h.threshold) / std::sqrt(sigma2);
  const double z = (h.threshold - std::exp(-t) * x) / scale;
  return h.lower ? z : -z;
}

double ou_halfline_quantile_slope(const HalfLine& h, double t, double sigma2) {
  if (!(t > 0.0)) throw DomainError("ou_halfline: closed form needs t > 0");
  if (std::isinf(t)) return 0.0;
  const double d = -std::exp(-t) / std::sqrt(-std::expm1(-2.0 * t) * sigma2);
  return h.lower ? d : -d;
}

GridFunction ou_halfline_grid(const HalfLine& h, double t, double sigma2, double lo, double hi,
                              std::size_t n) {
  return GridFunction::sample_quantile(
      [&](double x) { return ou_halfline_quantile(h, t, sigma2, x); }, h.lower ? 1.0 : 0.0,
      h.lower ? 0.0 : 1.0, lo, hi, n);
}

GridFunction ou_profile(const Profile& f, double t, double sigma2, const QuadRule& rule) {
  if (const auto* g = std::get_if<GridFunction>(&f)) return ou_apply(*g, t, sigma2, rule);
  return ou_halfline_grid(std::get<HalfLine>(f), t, sigma2);
}

double semigroup_composition_error(const HalfLine& f, double s, double t, double sigma2,
                                   const QuadRule& rule) {
  const GridFunction ft = ou_halfline_grid(f, t, sigma2);
  const GridFunction fst = ou_apply(ft, s, sigma2, rule);
  double err = 0.0;
  for (std::size_t i = 0; i < fst.n(); ++i) {
    const double exact = normal_cdf(ou_halfline_quantile(f, s + t, sigma2, fst.node(i)));
    err = std::max(err, std::fabs(fst.values()[i] - exact));
  }
  return err;
}

double semigroup_composition_error(const GridFunction& f, double s, double t, double sigma2,
                                   const QuadRule& rule) {
  const GridFunction a = ou_apply(ou_apply(f, t, sigma2, rule), s, sigma2, rule);
  const GridFunction b = ou_apply(f, s + t, sigma2, rule);
  double err = 0.0;
  for (std::size_t i = 0; i < a.n(); ++i)
    if (a.is_interior_node(i)) err = std::max(err, std::fabs(a.values()[i] - b.values()[i]));
  return err;
}

ClampedTriple clamp_triple(const GridFunction& f, const GridFunction& g, const GridFunction& h,
                           double delta) {
  if (!(delta > 0.0 && std::isfinite(delta))) throw DomainError("clamp_triple: delta must be > 0");
  const double lo_fg = -1.0 / delta, hi_fg = 1.0 / (3.0 * delta);
  const double lo_h = -1.0 / (3.0 * delta), hi_h = 1.0 / delta;
  auto clamp_fg = [&](const GridFunction& u) {
    std::vector<double> q = u.quantiles();
    for (double& v : q) v = std::clamp(v, lo_fg, hi_fg);
    auto lim = [&](double p) { return normal_cdf(std::clamp(normal_quantile_saturating(p), lo_fg, hi_fg)); };
    return GridFunction::from_quantiles(u.lo(), u.hi(), std::move(q), lim(u.limit_neg()),
                                        lim(u.limit_pos()));
  };
  std::vector<double> qh = h.quantiles();
  for (double& v : qh) v = std::clamp(v + delta, lo_h, hi_h);
  auto lim_h = [&](double p) {
    return normal_cdf(std::clamp(normal_quantile_saturating(p) + delta, lo_h, hi_h));
  };
  ClampedTriple out{clamp_fg(f), clamp_fg(g),
                    GridFunction::from_quantiles(h.lo(), h.hi(), std::move(qh), lim_h(h.limit_neg()),
                                                 lim_h(h.limit_pos()))};
  return out;
}

BlReport bl_gradient_check(const Profile& f, double t, double sigma2, const QuadRule& rule) {
  if (!(t > 0.0 && std::isfinite(t))) throw DomainError("bl_gradient_check: t must be > 0");
  const GridFunction ft = ou_profile(f, t, sigma2, rule);
  const double factor = std::sqrt(sigma2) * std::sqrt(std::expm1(2.0 * t));
  BlReport rep;
  const auto& q = ft.quantiles();
  for (std::size_t i = 1; i + 1 < ft.n(); ++i) {
    if (!ft.is_interior_node(i)) continue;
    if (std::fabs(q[i]) >= kQuantileCap || std::fabs(q[i - 1]) >= kQuantileCap ||
        std::fabs(q[i + 1]) >= kQuantileCap)
      throw PreconditionError("bl_gradient_check: smoothed function reaches 0 or 1",
                              {ft.node(i), ft.values()[i]});
    const double ratio = factor * std::fabs(q[i + 1] - q[i - 1]) / (2.0 * ft.dx());
    ++rep.nodes_checked;
    if (ratio > rep.max_ratio) {
      rep.max_ratio = ratio;
      rep.argmax = ft.node(i);
    }
  }
  return rep;
}

}  // namespace ehrlab
