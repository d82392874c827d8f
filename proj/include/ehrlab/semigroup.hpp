#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "ehrlab/scalar_gauss.hpp"

namespace ehrlab {

// A [0,1]-valued function sampled on a uniform grid over [lo, hi].
//
// The samples are held as normal quantiles q_i = Phi^{-1}(f(x_i)) and
// interpolated with a natural cubic spline in quantile space, so both tails
// keep full relative precision and functions of the form Phi(affine) are
// reproduced exactly. Outside [lo, hi] the value blends linearly (in
// probability) to the declared limit over a zone of width (hi - lo) / 10.
class GridFunction {
 public:
  static constexpr double kDefaultLo = -8.0;
  static constexpr double kDefaultHi = 8.0;
  static constexpr std::size_t kDefaultN = 2049;

  GridFunction() = default;

  static GridFunction from_values(double lo, double hi, std::vector<double> values,
                                  double limit_neg, double limit_pos);
  static GridFunction from_quantiles(double lo, double hi, std::vector<double> quantiles,
                                     double limit_neg, double limit_pos);

  template <class F>
  static GridFunction sample(F&& f, double limit_neg, double limit_pos, double lo = kDefaultLo,
                             double hi = kDefaultHi, std::size_t n = kDefaultN) {
    std::vector<double> v(n);
    const double dx = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) v[i] = f(lo + dx * static_cast<double>(i));
    return from_values(lo, hi, std::move(v), limit_neg, limit_pos);
  }

  template <class F>
  static GridFunction sample_quantile(F&& q, double limit_neg, double limit_pos,
                                      double lo = kDefaultLo, double hi = kDefaultHi,
                                      std::size_t n = kDefaultN) {
    std::vector<double> v(n);
    const double dx = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) v[i] = q(lo + dx * static_cast<double>(i));
    return from_quantiles(lo, hi, std::move(v), limit_neg, limit_pos);
  }

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  std::size_t n() const noexcept { return q_.size(); }
  double dx() const noexcept { return dx_; }
  double node(std::size_t i) const noexcept { return lo_ + dx_ * static_cast<double>(i); }
  double blend_width() const noexcept { return (hi_ - lo_) / 10.0; }
  double limit_neg() const noexcept { return lim_neg_; }
  double limit_pos() const noexcept { return lim_pos_; }
  const std::vector<double>& values() const noexcept { return p_; }
  const std::vector<double>& complements() const noexcept { return c_; }
  const std::vector<double>& quantiles() const noexcept { return q_; }
  bool same_grid(const GridFunction& o) const noexcept {
    return lo_ == o.lo_ && hi_ == o.hi_ && q_.size() == o.q_.size();
  }
  // Nodes at least one blend width away from both ends.
  bool is_interior_node(std::size_t i) const noexcept {
    const double x = node(i);
    return x >= lo_ + blend_width() && x <= hi_ - blend_width();
  }

  double value(double x) const noexcept;
  // (f(x), 1 - f(x)), each accurate to full relative precision.
  void value_pair(double x, double& p, double& c) const noexcept;
  double quantile(double x) const noexcept;
  // d/dx of quantile(x).
  double quantile_slope(double x) const noexcept;
  double derivative(double x) const noexcept;

 private:
  double spline_q(std::size_t i, double t) const noexcept;
  double spline_dq(std::size_t i, double t) const noexcept;
  void blend(double x, double& p, double& c, double& slope) const noexcept;
  void finish();

  double lo_ = 0.0, hi_ = 1.0, dx_ = 1.0;
  std::vector<double> q_, m2_, p_, c_;
  double lim_neg_ = 0.0, lim_pos_ = 0.0;
};

// Indicator of (-inf, threshold] (lower) or [threshold, inf) (upper).
struct HalfLine {
  double threshold = 0.0;
  bool lower = true;
};

// A profile is either sampled or a half-line with closed-form smoothing.
using Profile = std::variant<GridFunction, HalfLine>;

// (P_t f)(x) = E f(e^{-t} x + sqrt(1 - e^{-2t}) sigma xi), xi ~ N(0,1),
// evaluated at every grid node by quadrature. P_0 is the identity.
GridFunction ou_apply(const GridFunction& f, double t, double sigma2, const QuadRule& rule);

// Closed forms for half-lines, t > 0.
double ou_halfline(double a, double t, double sigma2, double x);
double ou_halfline_quantile(const HalfLine& h, double t, double sigma2, double x);
double ou_halfline_quantile_slope(const HalfLine& h, double t, double sigma2);
GridFunction ou_halfline_grid(const HalfLine& h, double t, double sigma2,
                              double lo = GridFunction::kDefaultLo,
                              double hi = GridFunction::kDefaultHi,
                              std::size_t n = GridFunction::kDefaultN);
// Smoothing of any profile at time t; half-lines need t > 0.
GridFunction ou_profile(const Profile& f, double t, double sigma2, const QuadRule& rule);

// max over grid nodes of |P_s (P_t f) - P_{s+t} f|; P_t f of a half-line is
// the sampled closed form and P_{s+t} is evaluated in closed form.
double semigroup_composition_error(const HalfLine& f, double s, double t, double sigma2,
                                   const QuadRule& rule);
double semigroup_composition_error(const GridFunction& f, double s, double t, double sigma2,
                                   const QuadRule& rule);

struct ClampedTriple {
  GridFunction f, g, h;
};

// f_d = Phi(-1/d) v f ^ Phi(1/(3d)), g_d likewise,
// h_d = Phi(-1/(3d) v (Phi^{-1}(h) + d) ^ 1/d).
ClampedTriple clamp_triple(const GridFunction& f, const GridFunction& g, const GridFunction& h,
                           double delta);

struct BlReport {
  double max_ratio = 0.0;
  double argmax = 0.0;
  std::size_t nodes_checked = 0;
};

// sigma |f_t'| sqrt(e^{2t} - 1) / I(f_t), maximised over interior nodes.
BlReport bl_gradient_check(const Profile& f, double t, double sigma2, const QuadRule& rule);

}  // namespace ehrlab
