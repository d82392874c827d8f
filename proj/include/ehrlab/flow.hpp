#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ehrlab/jfunc.hpp"
#include "ehrlab/model.hpp"
#include "ehrlab/semigroup.hpp"

namespace ehrlab {

struct Triple {
  Profile f, g, h;
  CorrelationModel model;
};

// A profile after OU smoothing, evaluated in quantile coordinates.
class SmoothedProfile {
 public:
  // Half-lines are kept in closed form (t must be > 0); grid functions are
  // smoothed by quadrature.
  static SmoothedProfile make(const Profile& p, double t, double sigma2, const QuadRule& rule);
  static SmoothedProfile from_grid(GridFunction g);

  double quantile(double x) const;
  double quantile_slope(double x) const;
  const GridFunction* grid() const noexcept { return closed_ ? nullptr : &grid_; }

 private:
  bool closed_ = false;
  HalfLine half_;
  double decay_ = 1.0, scale_ = 1.0;
  GridFunction grid_;
};

enum class TraceMode { static_R, time_varying };
const char* to_string(TraceMode m) noexcept;

struct TraceResult {
  std::vector<double> s_grid;
  std::vector<double> values;
  TraceMode mode = TraceMode::static_R;
  bool nonincreasing = true;
  std::optional<std::size_t> violation_index;  // first i with values[i+1] > values[i] + tolerance
  double tolerance = 0.0;                      // max(1e-6 * range, 1e-14)
  double t = 0.0;
  double x0 = 0.0, y0 = 0.0;
  double max_order_gap = 0.0;  // largest |G(order) - G(3/4 order)| seen
};

// Recomputes the verdict fields of r from r.values.
void trace_verdict(TraceResult& r);

// s in [0, t - eps]: 0 followed by points - 1 geometric times from 0.01.
std::vector<double> default_s_grid(double t, double eps, int points = 17);

// One value of G_{s,t} at (x0, y0). Static kind: P_{t-s} J_R(P_s f, P_s g,
// P^{sigma^2}_s h); time-varying kind: P_{t-s-eps} J(P_{s+eps} f, ..., s).
double g_value(const Triple& tr, const JSpec& spec, double x0, double y0, double s, double t,
               const QuadRule& rule);

// Same quantity, but with the three smoothed profiles supplied.
double g_value_smoothed(const SmoothedProfile& f, const SmoothedProfile& g,
                        const SmoothedProfile& h, const JSpec& spec, double x0, double y0,
                        double s, double t, const QuadRule& rule);

// The trace over s_grid. For the time-varying kind with grid profiles the
// eps-smoothed triple must have slack <= -eps (PreconditionError otherwise),
// and eps = 0 is rejected. Throws PrecisionError when the given rule and a
// rule of 3/4 its order disagree by more than 1e-6.
TraceResult g_trace(const Triple& tr, const JSpec& spec, double x0, double y0,
                    std::span<const double> s_grid, double t, const QuadRule& rule);

// dG/ds from the commutation identity:
//   -P[ r phi(r Xi) q'(D - r^2 Xi B) q ] (+ P[dJ/ds] for the time-varying kind),
// with q' the x-derivatives of the smoothed quantiles.
double g_derivative_formula(const Triple& tr, const JSpec& spec, double x0, double y0, double s,
                            double t, const QuadRule& rule);

double counterexample_closed_form(double a, double b, double c, double lambda, double R, double s);
// Same half-lines under J(., s) with r(s) = R sqrt(1 - e^{-2s}); constant in s.
double counterexample_time_varying(double a, double b, double c, double lambda, double R, double s);

// Largest value of lambda q_f(x_i) + (1-lambda) q_g(x_j) - sigma q_h(lambda x_i + (1-lambda) x_j)
// over grid pairs, with the pair where it is attained.
struct SlackReport {
  double slack = 0.0;
  double x = 0.0, y = 0.0;
};
SlackReport triple_slack(const GridFunction& f, const GridFunction& g, const GridFunction& h,
                         const CorrelationModel& m);

// S(z_k) = sup over x with y = (z_k - lambda x)/(1 - lambda) in [lo, hi] of
// lambda a(x) + (1 - lambda) b(y), at every node z_k of the grid of f.
// a and b are the quantiles (Ehrhard) or logs (pl) of f and g.
enum class SupScore { quantile, log_value };
std::vector<double> sup_convolution(const GridFunction& f, const GridFunction& g, double lambda,
                                    SupScore score);

struct HullResult {
  GridFunction h;
  double slack = 0.0;         // triple_slack of (f, g, h)
  // sup-convolution minus spline, maximised over four points per cell, in Xi
  // units. An estimate of the slack bound, tight to about 1%.
  double interp_error = 0.0;
};

HullResult ehrhard_hull(const GridFunction& f, const GridFunction& g, const CorrelationModel& m);

// h = min(1, (1 + margin) sup f^lambda g^(1-lambda)). The margin absorbs the
// spline error between nodes where the sup-convolution has kinks.
GridFunction pl_hull(const GridFunction& f, const GridFunction& g, double lambda,
                     double margin = 1e-4);

// E of a profile under N(0, variance); pair form keeps both tails accurate.
void profile_expectation(const Profile& p, double variance, const QuadRule& rule, double& mean,
                         double& complement);

struct EndpointReport {
  double ef = 0.0, eg = 0.0, eh = 0.0;
  double lhs = 0.0;     // sigma Phi^{-1}(E h)
  double rhs = 0.0;     // lambda Phi^{-1}(E f) + (1 - lambda) Phi^{-1}(E g)
  double margin = 0.0;  // lhs - rhs
};

EndpointReport ehrhard_endpoint(const Triple& tr, const QuadRule& rule);

struct PlReport {
  double ef = 0.0, eg = 0.0;
  double lhs = 0.0;  // (E h^{1/alpha}(Z))^alpha, Z ~ N(0, sigma^2)
  double rhs = 0.0;  // (E f)^lambda (E g)^(1-lambda)
};

// Verifies h(lambda x_i + (1-lambda) x_j) >= f(x_i)^lambda g(x_j)^(1-lambda)
// on all grid pairs (PreconditionError with the pair otherwise).
PlReport pl_endpoint(const GridFunction& f, const GridFunction& g, const GridFunction& h,
                     const CorrelationModel& m, double alpha, const QuadRule& rule);

using Fn1 = std::function<double(double)>;

struct JensenReport {
  double lhs = 0.0;  // E J(f1(X), f2(Y), f3(Z))
  double rhs = 0.0;  // J(E f1(X), E f2(Y), E f3(Z))
  bool holds = false;
};

// With restrict_below set, J(f(X)) < restrict_below is verified at every
// quadrature point (PreconditionError otherwise).
JensenReport jensen_check(const std::function<double(double, double, double)>& J, const Fn1& f1,
                          const Fn1& f2, const Fn1& f3, const CorrelationModel& m,
                          const QuadRule& rule, std::optional<double> restrict_below = {});

}  // namespace ehrlab
