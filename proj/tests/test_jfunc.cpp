#include <doctest.h>

#include <cmath>
#include <random>

#include "ehrlab/checks.hpp"
#include "ehrlab/errors.hpp"
#include "ehrlab/jfunc.hpp"

using namespace ehrlab;

namespace {

// A point with Xi = 0 and the given u, v.
std::array<double, 3> xi_zero_point(const CorrelationModel& m, double u, double v) {
  const double w = (m.lambda * u + (1.0 - m.lambda) * v) / m.sigma;
  return {normal_cdf(u), normal_cdf(v), normal_cdf(w)};
}

}  // namespace

TEST_CASE("kind names round trip") {
  for (JKind k : {JKind::pl, JKind::ehrhard_static, JKind::ehrhard_time_varying})
    CHECK(jkind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(jkind_from_string("nope"), ConfigError);
}

TEST_CASE("j_eval examples") {
  const CorrelationModel m = build_model(0.2, 0.4);
  const auto p = xi_zero_point(m, 0.7, -0.3);
  CHECK(j_eval(JSpec::ehrhard_static(m, 3.0), p[0], p[1], p[2]) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(j_eval(JSpec::ehrhard_time_varying(m, 3.0, 0.1), p[0], p[1], p[2], 0.4) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(j_eval(JSpec::pl(m, 2.0, 0.3), 1.0, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(j_eval(JSpec::pl(m, 2.0, 0.3), 0.5, 0.5, 0.0), DomainError);
  CHECK_THROWS_AS(j_eval(JSpec::ehrhard_static(m, 1.0), 0.5, 1.0, 0.5), DomainError);
}

TEST_CASE("time-varying scale") {
  const CorrelationModel m = build_model(0.0, 0.5);
  const JSpec s = JSpec::ehrhard_time_varying(m, 2.0, 0.1);
  CHECK(s.r_at(0.0) == doctest::Approx(2.0 * std::sqrt(1.0 - std::exp(-0.1))).epsilon(1e-14));
  CHECK(s.r_at(INFINITY) == 2.0);
  double prev = 0.0;
  for (double t = 0.0; t < 20.0; t += 0.05) {
    const double r = s.r_at(t);
    // r rounds to R once e^{-2t} drops below an ulp
    if (t < 8.0) CHECK(r > prev);
    CHECK(r >= prev);
    CHECK(r <= 2.0);
    prev = r;
  }
  CHECK(JSpec::ehrhard_static(m, 2.0).r_at(0.3) == 2.0);
}

TEST_CASE("prefactor_ratio and delta_eps") {
  const double eps = 0.3;
  CHECK(prefactor_ratio(eps, 0.0) == doctest::Approx(std::exp(eps) + 1.0).epsilon(1e-14));
  CHECK(prefactor_ratio(eps, INFINITY) == doctest::Approx(std::exp(eps)).epsilon(1e-15));
  CHECK(prefactor_ratio(eps, 30.0) == doctest::Approx(std::exp(eps)).epsilon(1e-14));
  double prev = INFINITY;
  std::vector<double> grid;
  for (double t = 0.0; t < 10.0; t += 0.1) {
    const double r = prefactor_ratio(eps, t);
    CHECK(r < prev);
    CHECK(r > std::exp(eps) - 1e-15);
    prev = r;
    grid.push_back(t);
  }
  const double d = delta_eps(eps, grid);
  CHECK(d > 0.0);
  CHECK(d <= std::expm1(eps));
  CHECK_THROWS_AS(prefactor_ratio(0.0, 1.0), ConfigError);
}

TEST_CASE("j_time_deriv") {
  const CorrelationModel m = build_model(-0.3, 0.6);
  const JSpec s = JSpec::ehrhard_time_varying(m, 1.7, 0.2);
  const auto p = xi_zero_point(m, 0.4, 1.1);
  CHECK(std::fabs(j_time_deriv(s, p[0], p[1], p[2], 0.5)) < 1e-15);  // Xi is 0 up to rounding
  CHECK(j_time_deriv(s, 0.3, 0.4, 0.8, 0.5) < 0.0);  // Xi < 0 there

  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.1, 0.9), ut(0.05, 3.0);
  for (int k = 0; k < 50; ++k) {
    const double x = u(rng), y = u(rng), z = u(rng), t = ut(rng);
    const double h = 1e-5;
    const double fd = (j_eval(s, x, y, z, t + h) - j_eval(s, x, y, z, t - h)) / (2 * h);
    const double an = j_time_deriv(s, x, y, z, t);
    CHECK(std::fabs(fd - an) <= 1e-7 * std::fabs(an) + 1e-12);
  }
  const JSpec s0 = JSpec::ehrhard_time_varying(m, 1.0, 0.0);
  CHECK_THROWS_AS(j_time_deriv(s0, 0.3, 0.4, 0.5, 0.0), DomainError);
  CHECK_THROWS_AS(j_time_deriv(JSpec::ehrhard_static(m, 1.0), 0.3, 0.4, 0.5, 0.1), ConfigError);
}

TEST_CASE("hessian_closed examples") {
  const CorrelationModel m = build_model(0.1, 0.5);
  const JSpec s = JSpec::ehrhard_static(m, 2.0);
  CHECK(hessian_closed(s, 0.5, 0.5, 0.5).max_abs() == 0.0);

  // At Xi = 0 only the R-linear diagonal part survives.
  const auto p = xi_zero_point(m, 0.8, -0.2);
  const SymMatrix h1 = hessian_closed(s, p[0], p[1], p[2]);
  const SymMatrix h2 = hessian_closed(s.with_R(4.0), p[0], p[1], p[2]);
  for (int i = 0; i < 3; ++i) CHECK(h2(i, i) == doctest::Approx(2.0 * h1(i, i)).epsilon(1e-12));
}

TEST_CASE("hessian_closed against finite differences (property)") {
  for (JKind kind : {JKind::pl, JKind::ehrhard_static, JKind::ehrhard_time_varying}) {
    const checks::HessianReport r = checks::hessian_campaign(kind, 60, 41);
    INFO(to_string(kind));
    CHECK(r.max_fd_error <= 1e-6);
    CHECK(r.max_hadamard_error <= 1e-10);
  }
}

TEST_CASE("a_hadamard_hess") {
  const CorrelationModel m = build_model(0.4, 0.3);
  const JSpec s = JSpec::ehrhard_static(m, 1.5);
  CHECK(a_hadamard_hess(s, 0.5, 0.5, 0.5).full.max_abs() == 0.0);

  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  const auto kb = m.b_kernel();
  const std::vector<double> vb(kb.begin(), kb.end());
  for (int k = 0; k < 100; ++k) {
    const double x = u(rng), y = u(rng), z = u(rng);
    const HadamardHessian hh = a_hadamard_hess(s, x, y, z);
    const SymMatrix direct = hadamard(m.A, hessian_closed(s, x, y, z));
    CHECK((direct - hh.full).max_abs() <= 1e-10 * std::max(1.0, direct.max_abs()));

    // B annihilates (1, 1, 1/sigma), so the core acts there like D, and
    // k' D k = Xi.
    const double uq = normal_quantile(x), vq = normal_quantile(y), wq = normal_quantile(z);
    const SymMatrix D = d_matrix(m, uq, vq, wq);
    const double scale = s.R * normal_pdf(s.R * m.xi_q(uq, vq, wq));
    const auto core_k = hh.core.apply(vb);
    const auto d_k = D.apply(vb);
    for (int i = 0; i < 3; ++i) CHECK(core_k[i] == doctest::Approx(scale * d_k[i]).epsilon(1e-10).scale(1e-12));
    CHECK(D.quad_form(vb) == doctest::Approx(m.xi_q(uq, vq, wq)).epsilon(1e-10).scale(1e-12));
  }
}

TEST_CASE("condition matrices") {
  const CorrelationModel m = build_model(0.5, 0.5);
  const double eps = 0.1;
  CHECK_THROWS_AS(condition_matrix(JSpec::ehrhard_time_varying(m, 1.0, 0.0), 0.3, 0.3, 0.6, 0.0),
                  ConfigError);

  // Xi = -eps at t = 0 with a small R can be indefinite.
  const JSpec small = JSpec::ehrhard_time_varying(m, 0.05, eps);
  const double u = 6.0, v = -6.0;
  const double w = (m.xi_q(u, v, 0.0) + eps) / m.sigma;
  const ConditionMatrix cm = condition_matrix_q(small, u, v, w, 0.0);
  CHECK(m.xi_q(u, v, w) == doctest::Approx(-eps).epsilon(1e-12));
  CHECK(min_eig(cm.normalized).min_eigenvalue < 0.0);
  CHECK((cm.M - cm.scale * cm.normalized).max_abs() <= 1e-12 * std::max(1.0, cm.M.max_abs()));

  // hot path agrees with the full construction
  const Sym3 fast = condition_core_q(small, u, v, w, 0.0);
  CHECK((from_sym3(fast) - cm.normalized).max_abs() <= 1e-12 * std::max(1.0, cm.normalized.max_abs()));

  // pl: B_alpha - D_alpha / R, independent of the point
  const JSpec pl = JSpec::pl(m, 3.0, 0.45);
  const SymMatrix want = pl_b_alpha(m, 0.45) - pl_d_alpha(m, 0.45) * (1.0 / 3.0);
  CHECK((condition_matrix(pl, 0.2, 0.3, 0.4, 0.0).normalized - want).max_abs() <= 1e-14);
  CHECK((condition_matrix(pl, 0.7, 0.1, 0.9, 0.0).normalized - want).max_abs() <= 1e-14);
}
