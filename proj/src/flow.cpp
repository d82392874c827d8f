#include "ehrlab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>

#include "ehrlab/errors.hpp"

namespace ehrlab {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

double phi_cdf(double x) noexcept { return 0.5 * std::erfc(-x * kInvSqrt2); }

bool is_half(const Profile& p) { return std::holds_alternative<HalfLine>(p); }

}  // namespace

const char* to_string(TraceMode m) noexcept {
  return m == TraceMode::static_R ? "static_R" : "time_varying";
}

SmoothedProfile SmoothedProfile::make(const Profile& p, double t, double sigma2,
                                      const QuadRule& rule) {
  if (const auto* h = std::get_if<HalfLine>(&p)) {
    if (!(t > 0.0)) throw DomainError("SmoothedProfile: a half-line needs smoothing time t > 0");
    SmoothedProfile s;
    s.closed_ = true;
    s.half_ = *h;
    s.decay_ = std::exp(-t);
    s.scale_ = std::sqrt(-std::expm1(-2.0 * t) * sigma2);
    return s;
  }
  return from_grid(ou_apply(std::get<GridFunction>(p), t, sigma2, rule));
}

SmoothedProfile SmoothedProfile::from_grid(GridFunction g) {
  SmoothedProfile s;
  s.grid_ = std::move(g);
  return s;
}

double SmoothedProfile::quantile(double x) const {
  if (closed_) {
    const double z = (half_.threshold - decay_ * x) / scale_;
    return half_.lower ? z : -z;
  }
  return grid_.quantile(x);
}

double SmoothedProfile::quantile_slope(double x) const {
  if (closed_) return (half_.lower ? -decay_ : decay_) / scale_;
  return grid_.quantile_slope(x);
}

void trace_verdict(TraceResult& r) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : r.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double range = r.values.empty() ? 0.0 : hi - lo;
  r.tolerance = std::max(1e-6 * range, 1e-14);
  r.nonincreasing = true;
  r.violation_index.reset();
  for (std::size_t i = 0; i + 1 < r.values.size(); ++i) {
    if (r.values[i + 1] > r.values[i] + r.tolerance) {
      r.nonincreasing = false;
      r.violation_index = i;
      break;
    }
  }
}

std::vector<double> default_s_grid(double t, double eps, int points) {
  const double end = t - eps;
  if (!(end > 0.01)) throw ConfigError("default_s_grid: need t - eps > 0.01");
  if (points < 2) throw ConfigError("default_s_grid: need at least 2 points");
  std::vector<double> s{0.0};
  for (int k = 0; k < points - 1; ++k) {
    const double f = points == 2 ? 1.0 : static_cast<double>(k) / (points - 2);
    s.push_back(0.01 * std::pow(end / 0.01, f));
  }
  s.back() = end;
  return s;
}

namespace {

// E over (X, Y) ~ N(0, [[1, rho], [rho, 1]]) of fn(x', y', z') with
// x' = e^{-tau} x0 + sqrt(1 - e^{-2tau}) X and z' = lambda x' + (1-lambda) y'.
template <class Fn>
double outer_expect(const CorrelationModel& m, double tau, double x0, double y0,
                    const QuadRule& rule, Fn&& fn) {
  const double lam = m.lambda, mu = 1.0 - lam;
  if (tau == 0.0) return fn(x0, y0, lam * x0 + mu * y0);
  const double decay = std::exp(-tau);
  const double sp = std::sqrt(-std::expm1(-2.0 * tau));
  const double sr = std::sqrt(1.0 - m.rho * m.rho);
  const std::size_t n = rule.nodes.size();
  double acc = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    const double X = rule.nodes[a];
    const double xp = decay * x0 + sp * X;
    double row = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      const double Y = m.rho * X + sr * rule.nodes[b];
      const double yp = decay * y0 + sp * Y;
      row += rule.weights[b] * fn(xp, yp, lam * xp + mu * yp);
    }
    acc += rule.weights[a] * row;
  }
  return acc;
}

struct TraceSetup {
  bool tv = false;
  double eps = 0.0;
  std::optional<Profile> base_f, base_g, base_h;  // eps-smoothed grid profiles
};

TraceSetup prepare(const Triple& tr, const JSpec& spec, const QuadRule& rule, bool check_slack) {
  if (!spec.is_ehrhard()) throw ConfigError("G traces need an Ehrhard kind");
  TraceSetup st;
  st.tv = spec.kind == JKind::ehrhard_time_varying;
  st.eps = st.tv ? spec.eps : 0.0;
  const bool all_half = is_half(tr.f) && is_half(tr.g) && is_half(tr.h);
  if (st.tv && st.eps == 0.0 && !all_half)
    throw ConfigError("g_trace: eps = 0 is only allowed for closed-form half-line triples");
  if (st.tv && st.eps > 0.0) {
    const double s2 = tr.model.sigma2;
    auto smooth = [&](const Profile& p, double var) -> std::optional<Profile> {
      if (is_half(p)) return std::nullopt;
      return Profile(ou_apply(std::get<GridFunction>(p), st.eps, var, rule));
    };
    st.base_f = smooth(tr.f, 1.0);
    st.base_g = smooth(tr.g, 1.0);
    st.base_h = smooth(tr.h, s2);
    if (check_slack && st.base_f && st.base_g && st.base_h) {
      const SlackReport sl = triple_slack(std::get<GridFunction>(*st.base_f),
                                          std::get<GridFunction>(*st.base_g),
                                          std::get<GridFunction>(*st.base_h), tr.model);
      if (sl.slack > -st.eps + 1e-12)
        throw PreconditionError("g_trace: eps-smoothed triple has slack above -eps",
                                {sl.x, sl.y, sl.slack});
    }
  }
  return st;
}

SmoothedProfile smoothed_at(const Profile& p, const std::optional<Profile>& base, double s,
                            const TraceSetup& st, double var, const QuadRule& rule) {
  if (is_half(p)) return SmoothedProfile::make(p, s + st.eps, var, rule);
  if (st.tv) return SmoothedProfile::make(*base, s, var, rule);
  return SmoothedProfile::make(p, s, var, rule);
}

double outer_time(const TraceSetup& st, double s, double t) {
  const double tau = t - s - st.eps;
  if (tau < -1e-12) throw DomainError("g_trace: s exceeds the available time t - eps");
  return std::max(0.0, tau);
}

}  // namespace

double g_value_smoothed(const SmoothedProfile& f, const SmoothedProfile& g,
                        const SmoothedProfile& h, const JSpec& spec, double x0, double y0,
                        double s, double t, const QuadRule& rule) {
  const bool tv = spec.kind == JKind::ehrhard_time_varying;
  const double eps = tv ? spec.eps : 0.0;
  const double tau = t - s - eps;
  if (tau < -1e-12) throw DomainError("g_value: s exceeds the available time t - eps");
  const double r = spec.r_at(s);
  const CorrelationModel& m = spec.model;
  return outer_expect(m, std::max(0.0, tau), x0, y0, rule, [&](double x, double y, double z) {
    return phi_cdf(r * m.xi_q(f.quantile(x), g.quantile(y), h.quantile(z)));
  });
}

double g_value(const Triple& tr, const JSpec& spec, double x0, double y0, double s, double t,
               const QuadRule& rule) {
  const TraceSetup st = prepare(tr, spec, rule, false);
  const double s2 = tr.model.sigma2;
  const SmoothedProfile F = smoothed_at(tr.f, st.base_f, s, st, 1.0, rule);
  const SmoothedProfile G = smoothed_at(tr.g, st.base_g, s, st, 1.0, rule);
  const SmoothedProfile H = smoothed_at(tr.h, st.base_h, s, st, s2, rule);
  return g_value_smoothed(F, G, H, spec, x0, y0, s, t, rule);
}

TraceResult g_trace(const Triple& tr, const JSpec& spec, double x0, double y0,
                    std::span<const double> s_grid, double t, const QuadRule& rule) {
  if (!(t > 0.0 && std::isfinite(t))) throw DomainError("g_trace: t must be positive and finite");
  if (s_grid.empty()) throw ConfigError("g_trace: empty s grid");
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    if (!(s_grid[i] >= 0.0)) throw DomainError("g_trace: s values must be >= 0");
    if (i > 0 && !(s_grid[i] > s_grid[i - 1])) throw DomainError("g_trace: s grid must increase");
  }
  const TraceSetup st = prepare(tr, spec, rule, true);
  const QuadRule check_rule = hermite_rule(std::max(1, rule.order * 3 / 4));
  const double s2 = tr.model.sigma2;
  TraceResult res;
  res.mode = st.tv ? TraceMode::time_varying : TraceMode::static_R;
  res.t = t;
  res.x0 = x0;
  res.y0 = y0;
  for (double s : s_grid) {
    outer_time(st, s, t);
    const SmoothedProfile F = smoothed_at(tr.f, st.base_f, s, st, 1.0, rule);
    const SmoothedProfile G = smoothed_at(tr.g, st.base_g, s, st, 1.0, rule);
    const SmoothedProfile H = smoothed_at(tr.h, st.base_h, s, st, s2, rule);
    const double v = g_value_smoothed(F, G, H, spec, x0, y0, s, t, rule);
    const double v2 = g_value_smoothed(F, G, H, spec, x0, y0, s, t, check_rule);
    const double gap = std::fabs(v - v2);
    res.max_order_gap = std::max(res.max_order_gap, gap);
    if (gap > 1e-6)
      throw PrecisionError("g_trace: quadrature orders disagree by more than 1e-6 at s = " +
                           std::to_string(s) + "; raise the quadrature order");
    res.s_grid.push_back(s);
    res.values.push_back(v);
  }
  trace_verdict(res);
  return res;
}

double g_derivative_formula(const Triple& tr, const JSpec& spec, double x0, double y0, double s,
                            double t, const QuadRule& rule) {
  const TraceSetup st = prepare(tr, spec, rule, false);
  const double s2 = tr.model.sigma2;
  const SmoothedProfile F = smoothed_at(tr.f, st.base_f, s, st, 1.0, rule);
  const SmoothedProfile G = smoothed_at(tr.g, st.base_g, s, st, 1.0, rule);
  const SmoothedProfile H = smoothed_at(tr.h, st.base_h, s, st, s2, rule);
  const CorrelationModel& m = tr.model;
  const double tau = outer_time(st, s, t);
  const double r = spec.r_at(s);
  const double dr = st.tv ? r / std::expm1(2.0 * s + st.eps) : 0.0;
  const Sym3& B = m.B3;
  return outer_expect(m, tau, x0, y0, rule, [&](double x, double y, double z) {
    const double u = F.quantile(x), v = G.quantile(y), w = H.quantile(z);
    const double du = F.quantile_slope(x), dv = G.quantile_slope(y), dw = H.quantile_slope(z);
    const double xi = m.xi_q(u, v, w);
    const double c = r * r * xi;
    const double quad = (m.lambda * u - c * B.a00) * du * du +
                        ((1.0 - m.lambda) * v - c * B.a11) * dv * dv +
                        (-m.sigma * m.sigma2 * w - c * B.a22) * dw * dw -
                        2.0 * c * (B.a01 * du * dv + B.a02 * du * dw + B.a12 * dv * dw);
    const double pdf = normal_pdf(r * xi);
    return -r * pdf * quad + dr * xi * pdf;
  });
}

double counterexample_closed_form(double a, double b, double c, double lambda, double R, double s) {
  if (!(s > 0.0)) throw DomainError("counterexample_closed_form: s must be > 0");
  return normal_cdf(R * (lambda * a + (1.0 - lambda) * b - c) / std::sqrt(-std::expm1(-2.0 * s)));
}

double counterexample_time_varying(double a, double b, double c, double lambda, double R,
                                   double s) {
  if (!(s > 0.0)) throw DomainError("counterexample_time_varying: s must be > 0");
  const double scale = std::sqrt(-std::expm1(-2.0 * s));
  const double r = R * scale;
  return normal_cdf(r * (lambda * a + (1.0 - lambda) * b - c) / scale);
}

SlackReport triple_slack(const GridFunction& f, const GridFunction& g, const GridFunction& h,
                         const CorrelationModel& m) {
  if (!f.same_grid(g)) throw ShapeError("triple_slack: f and g must share a grid");
  const std::size_t n = f.n();
  const double lam = m.lambda, mu = 1.0 - lam, sig = m.sigma;
  const auto& qf = f.quantiles();
  const auto& qg = g.quantiles();
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_idx = std::numeric_limits<std::size_t>::max();
#pragma omp parallel
  {
    double lb = -std::numeric_limits<double>::infinity();
    std::size_t li = std::numeric_limits<std::size_t>::max();
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = f.node(i);
      for (std::size_t j = 0; j < n; ++j) {
        const double v = lam * qf[i] + mu * qg[j] - sig * h.quantile(lam * xi + mu * g.node(j));
        const std::size_t idx = i * n + j;
        if (v > lb || (v == lb && idx < li)) {
          lb = v;
          li = idx;
        }
      }
    }
#pragma omp critical
    if (lb > best || (lb == best && li < best_idx)) {
      best = lb;
      best_idx = li;
    }
  }
  SlackReport r;
  r.slack = best;
  r.x = f.node(best_idx / n);
  r.y = g.node(best_idx % n);
  return r;
}

namespace {

struct SupKernel {
  const GridFunction& f;
  const GridFunction& g;
  double lam;
  SupScore score;

  double a(double x) const {
    const double q = f.quantile(x);
    return score == SupScore::quantile ? q : std::log(phi_cdf(q));
  }
  double b(double y) const {
    const double q = g.quantile(y);
    return score == SupScore::quantile ? q : std::log(phi_cdf(q));
  }

  double at(double z) const {
    const double mu = 1.0 - lam;
    const double lo = f.lo(), hi = f.hi(), dx = f.dx();
    const double xlo = std::max(lo, (z - mu * hi) / lam);
    const double xhi = std::min(hi, (z - mu * lo) / lam);
    auto obj = [&](double x) {
      const double y = std::clamp((z - lam * x) / mu, lo, hi);
      return lam * a(x) + mu * b(y);
    };
    if (!(xhi > xlo)) return obj(std::clamp(xlo, lo, hi));
    double best_x = xlo, best = obj(xlo);
    const double vhi = obj(xhi);
    if (vhi > best) {
      best = vhi;
      best_x = xhi;
    }
    const long i0 = static_cast<long>(std::ceil((xlo - lo) / dx));
    const long i1 = static_cast<long>(std::floor((xhi - lo) / dx));
    for (long i = i0; i <= i1; ++i) {
      const double x = lo + dx * static_cast<double>(i);
      if (x < xlo || x > xhi) continue;
      const double v = obj(x);
      if (v > best) {
        best = v;
        best_x = x;
      }
    }
    const double l = std::max(xlo, best_x - dx), r = std::min(xhi, best_x + dx);
    if (r > l) {
      std::uintmax_t iters = 100;
      const auto res = boost::math::tools::brent_find_minima(
          [&](double x) { return -obj(x); }, l, r, 40, iters);
      best = std::max(best, -res.second);
    }
    return best;
  }
};

}  // namespace

std::vector<double> sup_convolution(const GridFunction& f, const GridFunction& g, double lambda,
                                    SupScore score) {
  if (!f.same_grid(g)) throw ShapeError("sup_convolution: f and g must share a grid");
  if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("sup_convolution: lambda in (0,1)");
  const SupKernel k{f, g, lambda, score};
  const std::size_t n = f.n();
  std::vector<double> out(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t i = 0; i < n; ++i) out[i] = k.at(f.node(i));
  return out;
}

constexpr int kHullProbes = 4;

HullResult ehrhard_hull(const GridFunction& f, const GridFunction& g, const CorrelationModel& m) {
  if (!f.same_grid(g)) throw ShapeError("ehrhard_hull: f and g must share a grid");
  for (const GridFunction* u : {&f, &g}) {
    for (std::size_t i = 0; i < u->n(); ++i) {
      if (std::fabs(u->quantiles()[i]) >= kQuantileCap)
        throw PreconditionError("ehrhard_hull: f and g must stay inside (0,1)",
                                {u->node(i), u->values()[i]});
    }
  }
  std::vector<double> s = sup_convolution(f, g, m.lambda, SupScore::quantile);
  for (double& v : s) v /= m.sigma;
  const double lim_neg = phi_cdf(s.front()), lim_pos = phi_cdf(s.back());
  HullResult res;
  res.h = GridFunction::from_quantiles(f.lo(), f.hi(), std::move(s), lim_neg, lim_pos);
  res.slack = triple_slack(f, g, res.h, m).slack;
  const SupKernel k{f, g, m.lambda, SupScore::quantile};
  const std::size_t n = f.n();
  double err = 0.0;
#pragma omp parallel for reduction(max : err) schedule(dynamic, 16)
  for (std::size_t i = 0; i < n - 1; ++i) {
    // four interior points per cell; the spline overshoot near a kink of the
    // sup-convolution is off-centre
    for (int j = 1; j <= kHullProbes; ++j) {
      const double z = f.node(i) + f.dx() * j / (kHullProbes + 1.0);
      err = std::max(err, k.at(z) - m.sigma * res.h.quantile(z));
    }
  }
  res.interp_error = err;
  return res;
}

GridFunction pl_hull(const GridFunction& f, const GridFunction& g, double lambda, double margin) {
  std::vector<double> s = sup_convolution(f, g, lambda, SupScore::log_value);
  std::vector<double> q(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    q[i] = normal_quantile_saturating(std::min(1.0, std::exp(s[i]) * (1.0 + margin)));
  const double lim_neg = phi_cdf(q.front()), lim_pos = phi_cdf(q.back());
  return GridFunction::from_quantiles(f.lo(), f.hi(), std::move(q), lim_neg, lim_pos);
}

void profile_expectation(const Profile& p, double variance, const QuadRule& rule, double& mean,
                         double& complement) {
  const double sd = std::sqrt(variance);
  if (const auto* h = std::get_if<HalfLine>(&p)) {
    const double z = (h->lower ? h->threshold : -h->threshold) / sd;
    mean = phi_cdf(z);
    complement = phi_cdf(-z);
    return;
  }
  const GridFunction& g = std::get<GridFunction>(p);
  mean = 0.0;
  complement = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    double pk, ck;
    g.value_pair(sd * rule.nodes[k], pk, ck);
    mean += rule.weights[k] * pk;
    complement += rule.weights[k] * ck;
  }
}

EndpointReport ehrhard_endpoint(const Triple& tr, const QuadRule& rule) {
  const CorrelationModel& m = tr.model;
  double ef, cf, eg, cg, eh, ch;
  profile_expectation(tr.f, 1.0, rule, ef, cf);
  profile_expectation(tr.g, 1.0, rule, eg, cg);
  profile_expectation(tr.h, m.sigma2, rule, eh, ch);
  for (double v : {ef, cf, eg, cg, eh, ch})
    if (!(v > 0.0)) throw DegenerateInputError("ehrhard_endpoint: an expectation is 0 or 1");
  EndpointReport r;
  r.ef = ef;
  r.eg = eg;
  r.eh = eh;
  r.lhs = m.sigma * normal_quantile_pair(eh, ch);
  r.rhs = m.lambda * normal_quantile_pair(ef, cf) + (1.0 - m.lambda) * normal_quantile_pair(eg, cg);
  r.margin = r.lhs - r.rhs;
  return r;
}

PlReport pl_endpoint(const GridFunction& f, const GridFunction& g, const GridFunction& h,
                     const CorrelationModel& m, double alpha, const QuadRule& rule) {
  if (!f.same_grid(g)) throw ShapeError("pl_endpoint: f and g must share a grid");
  if (!(alpha > 0.0)) throw DomainError("pl_endpoint: alpha must be > 0");
  const double lam = m.lambda, mu = 1.0 - lam;
  const std::size_t n = f.n();
  std::vector<double> lf(n), lg(n);
  for (std::size_t i = 0; i < n; ++i) {
    lf[i] = std::log(f.values()[i]);
    lg[i] = std::log(g.values()[i]);
  }
  std::size_t bad = std::numeric_limits<std::size_t>::max();
#pragma omp parallel for reduction(min : bad) schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double need = lam * lf[i] + mu * lg[j];
      const double have = std::log(h.value(lam * f.node(i) + mu * g.node(j)));
      if (have < need - 1e-12) bad = std::min(bad, i * n + j);
    }
  }
  if (bad != std::numeric_limits<std::size_t>::max())
    throw PreconditionError("pl_endpoint: h(lambda x + (1-lambda) y) < f(x)^lambda g(y)^(1-lambda)",
                            {f.node(bad / n), g.node(bad % n)});
  PlReport r;
  double eha = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double x = rule.nodes[k];
    r.ef += rule.weights[k] * f.value(x);
    r.eg += rule.weights[k] * g.value(x);
    eha += rule.weights[k] * std::pow(h.value(m.sigma * x), 1.0 / alpha);
  }
  r.lhs = std::pow(eha, alpha);
  r.rhs = std::pow(r.ef, lam) * std::pow(r.eg, mu);
  return r;
}

JensenReport jensen_check(const std::function<double(double, double, double)>& J, const Fn1& f1,
                          const Fn1& f2, const Fn1& f3, const CorrelationModel& m,
                          const QuadRule& rule, std::optional<double> restrict_below) {
  JensenReport r;
  r.lhs = outer_expect(m, std::numeric_limits<double>::infinity(), 0.0, 0.0, rule,
                       [&](double x, double y, double z) {
                         const double v = J(f1(x), f2(y), f3(z));
                         if (restrict_below && !(v < *restrict_below))
                           throw PreconditionError("jensen_check: J(f) is not below the threshold",
                                                   {x, y, z, v});
                         return v;
                       });
  double e1 = 0.0, e2 = 0.0, e3 = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double x = rule.nodes[k];
    e1 += rule.weights[k] * f1(x);
    e2 += rule.weights[k] * f2(x);
    e3 += rule.weights[k] * f3(m.sigma * x);
  }
  r.rhs = J(e1, e2, e3);
  r.holds = r.lhs >= r.rhs - 1e-7;
  return r;
}

}  // namespace ehrlab
