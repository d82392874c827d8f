// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ehrlab/certify.hpp"
#include "ehrlab/checks.hpp"
#include "ehrlab/corpus.hpp"
#include "ehrlab/errors.hpp"
#include "ehrlab/flow.hpp"
#include "ehrlab/parallel.hpp"

using namespace ehrlab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %2d %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// Runs a criterion; an exception counts as a failure with its message.
void criterion(int id, const char* name, const std::function<std::pair<bool, std::string>()>& fn) {
  try {
    const auto [ok, detail] = fn();
    report(id, name, ok, detail);
  } catch (const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what());
  }
}

const double kRhos[] = {0.3, 0.5, 0.7};
const double kLambdas[] = {0.3, 0.5};
const double kEpss[] = {0.1, 0.2};

// R_min per (rho, lambda) at eps = 0.1, filled by criterion 6 and reused by 7.
double r_min_eps01[3][2] = {};

std::pair<bool, std::string> hessians() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (JKind k : {JKind::pl, JKind::ehrhard_static, JKind::ehrhard_time_varying})
    worst = std::max(worst, checks::hessian_campaign(k, 200, 101).max_fd_error);
  const double el = seconds_since(t0);
  return {worst <= 1e-6 && el < 10.0,
          fmt("max relative error %.3g over 3 x 200 points, %.2f s", worst, el)};
}

std::pair<bool, std::string> hadamard_factor() {
  double worst = 0.0;
  for (JKind k : {JKind::pl, JKind::ehrhard_static, JKind::ehrhard_time_varying})
    worst = std::max(worst, checks::hessian_campaign(k, 200, 202).max_hadamard_error);
  return {worst <= 1e-9, fmt("max relative error %.3g over 3 x 200 points", worst)};
}

std::pair<bool, std::string> kernels() {
  Rng rng(303);
  double a_err = 0, b_err = 0, e_err = 0, d_err = 0;
  for (int k = 0; k < 1000; ++k) {
    const CorrelationModel m = build_model(uniform(rng, -0.99, 0.99), uniform(rng, 0.01, 0.99));
    const std::vector<double> ka{m.lambda, 1.0 - m.lambda, -1.0};
    const std::vector<double> kb{1.0, 1.0, 1.0 / m.sigma};
    for (double v : m.A.apply(ka)) a_err = std::max(a_err, std::fabs(v));
    for (double v : m.B.apply(kb)) b_err = std::max(b_err, std::fabs(v));
    e_err = std::max(e_err, std::fabs(m.E.quad_form(kb) - 1.0));
    for (int p = 0; p < 100; ++p) {
      const double u = uniform(rng, -5, 5), v = uniform(rng, -5, 5), w = uniform(rng, -5, 5);
      const double form = d_matrix(m, u, v, w).quad_form(kb);
      d_err = std::max(d_err, std::fabs(form - m.xi_q(u, v, w)));
    }
  }
  const bool ok = a_err <= 1e-12 && b_err <= 1e-12 && e_err <= 1e-10 && d_err <= 1e-10;
  return {ok, fmt("|A k_A| %.2g, |B k_B| %.2g, |k'Ek - 1| %.2g, |k'Dk - Xi| %.2g", a_err, b_err,
                  e_err, d_err)};
}

// Random A >= 0 with spectrum >= delta off its kernel and B >= delta on the
// kernel, in a random orthonormal basis.
std::pair<bool, std::string> perturbation() {
  Rng rng(404);
  double worst = std::numeric_limits<double>::infinity();
  for (int inst = 0; inst < 100; ++inst) {
    const int n = 3 + static_cast<int>(rng() % 4);
    const int ker = 1 + static_cast<int>(rng() % (n - 1));
    const double delta = uniform(rng, 0.05, 1.0);
    // orthonormal basis by Gram-Schmidt
    std::vector<std::vector<double>> q(n, std::vector<double>(n));
    std::normal_distribution<double> nd;
    for (int i = 0; i < n; ++i) {
      for (double& x : q[i]) x = nd(rng);
      for (int j = 0; j < i; ++j) {
        double d = 0;
        for (int r = 0; r < n; ++r) d += q[i][r] * q[j][r];
        for (int r = 0; r < n; ++r) q[i][r] -= d * q[j][r];
      }
      double nn = 0;
      for (double x : q[i]) nn += x * x;
      for (double& x : q[i]) x /= std::sqrt(nn);
    }
    SymMatrix A(n), P(n);
    for (int i = ker; i < n; ++i) A = A + SymMatrix::outer(q[i]) * uniform(rng, delta, delta + 3.0);
    for (int i = 0; i < ker; ++i) P = P + SymMatrix::outer(q[i]);
    SymMatrix B(n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) B.set(i, j, uniform(rng, -2.0, 2.0));
    // lift B on ker A until its restriction is >= delta
    SymMatrix Bk(ker);
    for (int i = 0; i < ker; ++i)
      for (int j = i; j < ker; ++j) {
        const std::vector<double> bj = B.apply(q[j]);
        double s = 0;
        for (int r = 0; r < n; ++r) s += q[i][r] * bj[r];
        Bk.set(i, j, s);
      }
    const double lift = std::max(0.0, delta - min_eig(Bk).min_eigenvalue) + 0.01;
    B = B + P * lift;
    const double bound = psd_perturbation_bound(A, B, delta);
    for (int k = 0; k < 50; ++k) {
      const double e = bound * k / 49.0;
      worst = std::min(worst, min_eig(A + B * e).min_eigenvalue);
    }
  }
  return {worst >= -1e-10, fmt("smallest eigenvalue of A + eps B over 100 x 50 cases: %.3g", worst)};
}

std::pair<bool, std::string> counterexample() {
  const auto t0 = Clock::now();
  const CorrelationModel m = build_model(0.5, 0.5);
  const QuadRule rule = hermite_rule(64);
  const Triple tr{HalfLine{0.0, true}, HalfLine{0.0, true}, HalfLine{1.0, true}, m};
  std::vector<double> s;
  for (int i = 1; i <= 20; ++i) s.push_back(0.1 * i);
  const TraceResult quad = g_trace(tr, JSpec::ehrhard_static(m, 1.0), 0.0, 0.0, s, 12.0, rule);
  double dev = 0.0, tv_lo = 1.0, tv_hi = 0.0;
  bool up = true;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double target = normal_cdf(-1.0 / std::sqrt(-std::expm1(-2.0 * s[i])));
    dev = std::max(dev, std::fabs(quad.values[i] - target));
    if (i > 0 && !(quad.values[i] > quad.values[i - 1])) up = false;
    const double tv = counterexample_time_varying(0, 0, 1, 0.5, 1.0, s[i]);
    tv_lo = std::min(tv_lo, tv);
    tv_hi = std::max(tv_hi, tv);
  }
  const double el = seconds_since(t0);
  return {dev <= 1e-6 && up && tv_hi - tv_lo <= 1e-9 && el < 30.0,
          fmt("max deviation %.3g, strictly increasing %g, time-varying range %.3g, %.2f s", dev,
              up ? 1.0 : 0.0, tv_hi - tv_lo, el)};
}

std::pair<bool, std::string> campaign() {
  const auto t0 = Clock::now();
  bool ok = true;
  double worst_ratio = 0.0;
  std::string bad;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j)
      for (double eps : kEpss) {
        const CorrelationModel m = build_model(kRhos[i], kLambdas[j]);
        const JSpec spec = JSpec::ehrhard_time_varying(m, 1.0, eps);
        const ScanDomain dom = ScanDomain::standard(eps, 33, 17);
        const MinRResult r = min_r(spec, dom);
        const ScanReport at = psd_scan(spec.with_R(r.R_min), dom);
        const ScanReport below = psd_scan(spec.with_R(0.998 * r.R_min), dom);
        const bool this_ok = std::isfinite(r.R_min) && at.passed && !below.passed &&
                             r.R_min <= r.analytic_bound;
        if (!this_ok) {
          ok = false;
          bad += fmt(" (rho %.1f lambda %.1f eps %.1f)", kRhos[i], kLambdas[j], eps);
        }
        worst_ratio = std::max(worst_ratio, r.R_min / r.analytic_bound);
        if (eps == 0.1) r_min_eps01[i][j] = r.R_min;
      }
  const double el = seconds_since(t0);
  ok = ok && el < 300.0;
  return {ok, fmt("12 combinations, max R_min / analytic bound %.3g, %.1f s", worst_ratio, el) + bad};
}

// E over (X, Y) of J(f_e(X), g_e(Y), h_e(lambda X + (1-lambda) Y), 0) with the
// eps-smoothed profiles, by its own tensor quadrature.
double expect_j0(const Triple& tr, const JSpec& spec, const QuadRule& rule) {
  const CorrelationModel& m = tr.model;
  const GridFunction fe = ou_apply(std::get<GridFunction>(tr.f), spec.eps, 1.0, rule);
  const GridFunction ge = ou_apply(std::get<GridFunction>(tr.g), spec.eps, 1.0, rule);
  const GridFunction he = ou_apply(std::get<GridFunction>(tr.h), spec.eps, m.sigma2, rule);
  const double sr = std::sqrt(1.0 - m.rho * m.rho);
  double acc = 0.0;
  for (std::size_t a = 0; a < rule.nodes.size(); ++a)
    for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
      const double x = rule.nodes[a], y = m.rho * x + sr * rule.nodes[b];
      const double z = m.lambda * x + (1.0 - m.lambda) * y;
      acc += rule.weights[a] * rule.weights[b] *
             j_eval_q(spec, fe.quantile(x), ge.quantile(y), he.quantile(z), 0.0);
    }
  return acc;
}

std::pair<bool, std::string> monotonicity() {
  const auto t0 = Clock::now();
  const QuadRule rule = hermite_rule(64);
  const double eps = 0.1, t = 12.0;
  const std::vector<double> s_grid = default_s_grid(t, eps, 17);
  int traces = 0, violated = 0;
  double end0 = 0.0, end1 = 0.0, max_range = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) {
      const CorrelationModel m = build_model(kRhos[i], kLambdas[j]);
      double R = r_min_eps01[i][j];
      if (!(R > 0.0)) R = min_r(JSpec::ehrhard_time_varying(m, 1.0, eps), ScanDomain::standard(eps)).R_min;
      const JSpec spec = JSpec::ehrhard_time_varying(m, R, eps);
      Rng rng(700 + 10 * i + j);
      for (int k = 0; k < 20; ++k) {
        const HullTriple ht = make_hull_triple(rng, m, 0.2, eps, rule);
        const TraceResult tr = g_trace(ht.triple, spec, 0.0, 0.0, s_grid, t, rule);
        ++traces;
        if (!tr.nonincreasing) ++violated;
        max_range = std::max(max_range, tr.values.front() - tr.values.back());
        end0 = std::max(end0, std::fabs(tr.values.front() - expect_j0(ht.triple, spec, rule)));
        double ef, cf, eg, cg, eh, ch;
        profile_expectation(ht.triple.f, 1.0, rule, ef, cf);
        profile_expectation(ht.triple.g, 1.0, rule, eg, cg);
        profile_expectation(ht.triple.h, m.sigma2, rule, eh, ch);
        end1 = std::max(end1, std::fabs(tr.values.back() - j_eval(spec, ef, eg, eh, t - eps)));
      }
    }
  const double el = seconds_since(t0);
  const bool ok = violated == 0 && end0 <= 1e-6 && end1 <= 1e-6;
  return {ok, fmt("%g traces, %g violations, endpoint errors %.2g / %.2g", traces, violated, end0,
                  end1) +
                  fmt(", largest G drop %.3g, %.1f s", max_range, el)};
}

std::pair<bool, std::string> endpoints() {
  const CorrelationModel m = build_model(0.5, 0.5);
  const QuadRule rule = hermite_rule(64);
  const auto half = checks::halfline_endpoint_campaign(m, 20, 801, rule);
  const auto hull = checks::hull_endpoint_campaign(m, 50, 802, rule);
  const auto pl = checks::pl_endpoint_campaign(m, 0.45, 30, 803, rule);
  const bool ok = half.max_abs_margin <= 1e-8 && hull.min_margin >= -1e-6 && pl.min_gap >= -1e-8;
  return {ok, fmt("half-line |margin| %.2g, hull min margin %.3g, PL min gap %.3g",
                  half.max_abs_margin, hull.min_margin, pl.min_gap)};
}

std::pair<bool, std::string> bakry_ledoux() {
  // Gauss-Hermite aliases the clamp kinks (ratios up to 1.02 at order 64);
  // the equally spaced rule is accurate to ~1e-4 here.
  const auto c = checks::bl_campaign(50, 901, trapezoid_rule());
  const bool ok = c.max_ratio <= 1.0 + 1e-6 && std::fabs(c.halfline_ratio - 1.0) <= 1e-6 &&
                  std::fabs(c.halfline_min_ratio - 1.0) <= 1e-6;
  return {ok, fmt("corpus max ratio %.6f, half-line ratio in [%.9f, %.9f]", c.max_ratio,
                  c.halfline_min_ratio, c.halfline_ratio)};
}

std::pair<bool, std::string> necessity() {
  const auto c = checks::probe_campaign(build_model(0.5, 0.5), 1.0, 10, 1001, hermite_rule(64));
  return {c.all_negative && c.max_rel_error <= 0.05,
          fmt("10 points, all estimates negative %g, max relative error %.3g",
              c.all_negative ? 1.0 : 0.0, c.max_rel_error)};
}

}  // namespace

int main() {
  apply_thread_env();
  const auto t0 = Clock::now();
  criterion(1, "Hessian certification", hessians);
  criterion(2, "A o H_J factorization", hadamard_factor);
  criterion(3, "Kernel identities", kernels);
  criterion(4, "Perturbation bound soundness", perturbation);
  criterion(5, "Half-line counterexample", counterexample);
  criterion(6, "Certification campaign", campaign);
  criterion(7, "Monotonicity of G", monotonicity);
  criterion(8, "Endpoint inequalities", endpoints);
  criterion(9, "Bakry-Ledoux bound", bakry_ledoux);
  criterion(10, "Necessity probe", necessity);
  std::printf("%d of 10 criteria passed in %.1f s\n", 10 - failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
