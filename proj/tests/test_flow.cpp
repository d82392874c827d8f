#include <doctest.h>

#include <cmath>
#include <random>

#include "ehrlab/certify.hpp"
#include "ehrlab/checks.hpp"
#include "ehrlab/corpus.hpp"
#include "ehrlab/errors.hpp"
#include "ehrlab/flow.hpp"

using namespace ehrlab;

TEST_CASE("counterexample closed form") {
  for (double s : {0.1, 1.0, 5.0})
    CHECK(counterexample_closed_form(0.4, -1.0, 0.3 * 0.4 - 0.7, 0.3, 2.0, s) ==
          doctest::Approx(0.5).epsilon(1e-15));
  // sqrt(1 - e^{-2s}) = 1/2 gives Phi(-2)
  const double s = -0.5 * std::log(0.75);
  CHECK(counterexample_closed_form(0.0, 0.0, 1.0, 0.5, 1.0, s) ==
        doctest::Approx(0.0227501319481792072).epsilon(1e-12));
  double prev = 0.0;
  for (double t = 0.05; t < 6.0; t += 0.05) {
    const double v = counterexample_closed_form(0.0, 0.0, 1.0, 0.5, 1.0, t);
    CHECK(v > prev);
    prev = v;
  }
  CHECK_THROWS_AS(counterexample_closed_form(0.0, 0.0, 1.0, 0.5, 1.0, 0.0), DomainError);
  for (double t : {0.05, 0.5, 3.0})
    CHECK(counterexample_time_varying(0.0, 0.0, 1.0, 0.5, 1.0, t) ==
          doctest::Approx(normal_cdf(-1.0)).epsilon(1e-15));
}

TEST_CASE("static half-line trace increases along the closed form") {
  const CorrelationModel m = build_model(-0.3, 0.3);
  const JSpec spec = JSpec::ehrhard_static(m, 1.5);
  const double a = 0.2, b = -0.4, c = 0.5;
  const Triple tr{HalfLine{a, true}, HalfLine{b, true}, HalfLine{c, true}, m};
  std::vector<double> sg;
  for (int k = 1; k <= 12; ++k) sg.push_back(0.15 * k);
  const TraceResult r = g_trace(tr, spec, 0.0, 0.0, sg, 12.0, hermite_rule());
  for (std::size_t i = 0; i < sg.size(); ++i)
    CHECK(r.values[i] == doctest::Approx(counterexample_closed_form(a, b, c, m.lambda, 1.5, sg[i]))
                             .epsilon(1e-7));
  CHECK_FALSE(r.nonincreasing);
  REQUIRE(r.violation_index.has_value());
  CHECK(*r.violation_index == 0);
}

TEST_CASE("time-varying half-line trace is constant") {
  const CorrelationModel m = build_model(0.5, 0.5);
  const JSpec spec = JSpec::ehrhard_time_varying(m, 1.0, 0.0);
  const Triple tr{HalfLine{0.0, true}, HalfLine{0.0, true}, HalfLine{1.0, true}, m};
  const std::vector<double> sg{0.1, 0.3, 0.6, 1.0, 2.0};
  const TraceResult r = g_trace(tr, spec, 0.0, 0.0, sg, 12.0, hermite_rule());
  for (double v : r.values) CHECK(v == doctest::Approx(r.values.front()).epsilon(1e-9));
  CHECK(r.nonincreasing);
}

TEST_CASE("trace verdict") {
  TraceResult r;
  r.values = {1.0, 0.9, 0.9, 0.5};
  trace_verdict(r);
  CHECK(r.nonincreasing);
  CHECK(r.tolerance == doctest::Approx(0.5e-6));
  r.values = {1.0, 0.9, 0.95, 0.5};
  trace_verdict(r);
  CHECK_FALSE(r.nonincreasing);
  CHECK(*r.violation_index == 1);
  r.values = {0.3, 0.3};
  trace_verdict(r);
  CHECK(r.tolerance == 1e-14);
  CHECK(r.nonincreasing);
}

TEST_CASE("default s grid") {
  const std::vector<double> g = default_s_grid(12.0, 0.1, 17);
  REQUIRE(g.size() == 17);
  CHECK(g.front() == 0.0);
  CHECK(g[1] == doctest::Approx(0.01));
  CHECK(g.back() == doctest::Approx(11.9));
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
}

TEST_CASE("derivative formula matches finite differences of G") {
  const QuadRule rule = hermite_rule();
  SUBCASE("static half-lines") {
    const CorrelationModel m = build_model(0.2, 0.6);
    const JSpec spec = JSpec::ehrhard_static(m, 1.2);
    const Triple tr{HalfLine{0.3, true}, HalfLine{-0.2, true}, HalfLine{0.6, true}, m};
    for (double s : {0.3, 0.8, 1.5}) {
      const double h = 1e-4;
      const double fd = (g_value(tr, spec, 0.1, -0.2, s + h, 4.0, rule) -
                         g_value(tr, spec, 0.1, -0.2, s - h, 4.0, rule)) / (2 * h);
      CHECK(g_derivative_formula(tr, spec, 0.1, -0.2, s, 4.0, rule) ==
            doctest::Approx(fd).epsilon(1e-6).scale(1e-10));
    }
  }
  SUBCASE("time-varying smooth triple") {
    const CorrelationModel m = build_model(0.5, 0.5);
    Rng rng(61);
    const HullTriple ht = make_bump_triple(rng, m, 0.2, 0.3, rule);
    const JSpec spec = JSpec::ehrhard_time_varying(m, 2.0, 0.3);
    for (double s : {0.2, 0.7}) {
      const double h = 1e-4;
      const double fd = (g_value(ht.triple, spec, 0.0, 0.0, s + h, 3.0, rule) -
                         g_value(ht.triple, spec, 0.0, 0.0, s - h, 3.0, rule)) / (2 * h);
      CHECK(g_derivative_formula(ht.triple, spec, 0.0, 0.0, s, 3.0, rule) ==
            doctest::Approx(fd).epsilon(1e-5).scale(1e-10));
    }
  }
}

TEST_CASE("time-varying trace rejects inadmissible input") {
  const CorrelationModel m = build_model(0.5, 0.5);
  const GridFunction f = GridFunction::sample([](double) { return 0.6; }, 0.6, 0.6);
  const Triple tr{f, f, f, m};  // Xi = (1 - sigma) q > 0
  const std::vector<double> sg{0.0, 0.5};
  CHECK_THROWS_AS(g_trace(tr, JSpec::ehrhard_time_varying(m, 1.0, 0.1), 0.0, 0.0, sg, 3.0, hermite_rule()),
                  PreconditionError);
  CHECK_THROWS_AS(g_trace(tr, JSpec::ehrhard_time_varying(m, 1.0, 0.0), 0.0, 0.0, sg, 3.0, hermite_rule()),
                  ConfigError);
}

TEST_CASE("ehrhard_hull of constants") {
  const CorrelationModel m = build_model(0.1, 0.4);
  const double c0 = 0.3;
  const GridFunction f = GridFunction::sample([&](double) { return c0; }, c0, c0);
  const HullResult hr = ehrhard_hull(f, f, m);
  for (double q : hr.h.quantiles()) CHECK(q == doctest::Approx(normal_quantile(c0) / m.sigma).epsilon(1e-12));
  CHECK(std::fabs(hr.slack) < 1e-12);

  const GridFunction one = GridFunction::sample([](double) { return 1.0; }, 1.0, 1.0);
  CHECK_THROWS_AS(ehrhard_hull(one, f, m), PreconditionError);
}

TEST_CASE("ehrhard_hull of smoothed half-lines is a smoothed half-line") {
  const CorrelationModel m = build_model(0.3, 0.35);
  const double a = 0.4, b = -0.6, t = 0.5;
  const GridFunction f = ou_halfline_grid(HalfLine{a, true}, t, 1.0);
  const GridFunction g = ou_halfline_grid(HalfLine{b, true}, t, 1.0);
  const HullResult hr = ehrhard_hull(f, g, m);
  const HalfLine c{m.lambda * a + (1.0 - m.lambda) * b, true};
  for (std::size_t i = 0; i < hr.h.n(); ++i) {
    if (!hr.h.is_interior_node(i)) continue;
    CHECK(hr.h.quantiles()[i] ==
          doctest::Approx(ou_halfline_quantile(c, t, m.sigma2, hr.h.node(i))).epsilon(1e-9));
  }
}

TEST_CASE("hull slack is bounded by the reported interpolation error (property)") {
  // Hulls of non-concave pairs have kinks where the spline dips below the
  // sup-convolution; on the default grid the slack reaches ~2e-3.
  Rng rng(62);
  std::uniform_real_distribution<double> ur(-0.8, 0.8), ul(0.2, 0.8);
  for (int k = 0; k < 20; ++k) {
    const CorrelationModel m = build_model(ur(rng), ul(rng));
    const GridFunction f = smooth_bump_profile(rng), g = smooth_bump_profile(rng);
    const HullResult hr = ehrhard_hull(f, g, m);
    CHECK(hr.slack <= 1.05 * hr.interp_error + 1e-9);
    CHECK(hr.slack <= 2.5e-3);
  }
  for (int k = 0; k < 10; ++k) {
    const CorrelationModel m = build_model(ur(rng), ul(rng));
    const GridFunction f = concave_profile(rng), g = concave_profile(rng);
    const HullResult hr = ehrhard_hull(f, g, m);
    CHECK(hr.slack <= 1.05 * hr.interp_error + 1e-9);
  }
}

TEST_CASE("Ehrhard endpoint") {
  const QuadRule rule = hermite_rule();
  const checks::EndpointCampaign half = checks::halfline_endpoint_campaign(build_model(0.2, 0.3), 10, 63, rule);
  CHECK(half.max_abs_margin <= 1e-8);
  const checks::EndpointCampaign hull = checks::hull_endpoint_campaign(build_model(0.5, 0.5), 10, 64, rule);
  CHECK(hull.min_margin >= -1e-6);

  const CorrelationModel m = build_model(0.2, 0.3);
  // Phi(-40) underflows
  const Triple bad{HalfLine{-40.0, true}, HalfLine{0.0, true}, HalfLine{0.0, true}, m};
  CHECK_THROWS_AS(ehrhard_endpoint(bad, rule), DegenerateInputError);
}

TEST_CASE("Ehrhard endpoint for intervals as rho tends to one") {
  // Smoothed interval indicators; h uses the Minkowski combination of the
  // intervals at scale sigma.
  const CorrelationModel m = build_model(0.999, 0.5);
  const double t = 0.05, decay = std::exp(-t), spread = std::sqrt(-std::expm1(-2.0 * t));
  auto interval = [&](double lo, double hi, double scale) {
    return GridFunction::sample(
        [=](double x) {
          return normal_cdf((hi - decay * x) / (scale * spread)) -
                 normal_cdf((lo - decay * x) / (scale * spread));
        },
        0.0, 0.0);
  };
  const double a1 = -1.0, b1 = 0.5, a2 = 0.2, b2 = 2.0;
  const GridFunction f = interval(a1, b1, 1.0), g = interval(a2, b2, 1.0);
  const GridFunction h = interval(0.5 * (a1 + a2), 0.5 * (b1 + b2), m.sigma);
  const EndpointReport r = ehrhard_endpoint(Triple{f, g, h, m}, trapezoid_rule());
  CHECK(r.margin >= -1e-5);
  CHECK(r.ef == doctest::Approx(normal_cdf(b1) - normal_cdf(a1)).epsilon(1e-6));
}

TEST_CASE("PL endpoint") {
  const QuadRule rule = hermite_rule();
  const CorrelationModel m = build_model(0.0, 0.5);
  const GridFunction c = GridFunction::sample([](double) { return 0.4; }, 0.4, 0.4);
  const PlReport eq = pl_endpoint(c, c, c, m, 0.45, rule);
  CHECK(eq.lhs == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(eq.rhs == doctest::Approx(0.4).epsilon(1e-12));

  const checks::PlCampaign camp = checks::pl_endpoint_campaign(m, 0.45, 5, 65, rule);
  CHECK(camp.min_gap > 0.0);

  // h below the geometric mean at some pair
  const GridFunction low = GridFunction::sample([](double) { return 0.1; }, 0.1, 0.1);
  CHECK_THROWS_AS(pl_endpoint(c, c, low, m, 0.45, rule), PreconditionError);
}

TEST_CASE("PL gap shrinks toward the equality regime") {
  // Same f, g; as rho -> 1 and alpha -> sigma^2 the gap closes.
  const QuadRule rule = hermite_rule();
  Rng rng(66);
  const PlTriple pt = make_pl_triple(rng, 0.5);
  double prev = INFINITY;
  for (double rho : {0.0, 0.5, 0.9, 0.99}) {
    const CorrelationModel m = build_model(rho, 0.5);
    const PlReport r = pl_endpoint(pt.f, pt.g, pt.h, m, 0.999 * m.sigma2, rule);
    const double gap = r.lhs - r.rhs;
    CHECK(gap >= -1e-8);
    CHECK(gap < prev);
    prev = gap;
  }
}

TEST_CASE("Jensen check") {
  const QuadRule rule = hermite_rule();
  const CorrelationModel m = build_model(0.5, 0.5);
  const auto J = [&](double x, double y, double z) { return j_eval(JSpec::ehrhard_static(m, 1.0), x, y, z); };
  const Fn1 k1 = [](double) { return 0.3; }, k2 = [](double) { return 0.6; }, k3 = [](double) { return 0.2; };
  const JensenReport eq = jensen_check(J, k1, k2, k3, m, rule);
  CHECK(eq.lhs == doctest::Approx(eq.rhs).epsilon(1e-14));
  CHECK(eq.holds);

  // along a negative direction at a Xi > 0 point the inequality fails
  const std::array<double, 3> y{0.7, 0.7, 0.4};
  const HadamardHessian hh = a_hadamard_hess(JSpec::ehrhard_static(m, 1.0), y[0], y[1], y[2]);
  const PsdVerdict v = min_eig(hh.full);
  REQUIRE(v.min_eigenvalue < 0.0);
  auto dir = [&](int i, double scale) {
    return Fn1([=](double x) { return y[i] + 0.05 * v.witness_vector[i] * std::clamp(x / scale, -3.0, 3.0); });
  };
  const JensenReport bad = jensen_check(J, dir(0, 1.0), dir(1, 1.0), dir(2, m.sigma), m, rule);
  CHECK_FALSE(bad.holds);
  CHECK_THROWS_AS(jensen_check(J, dir(0, 1.0), dir(1, 1.0), dir(2, m.sigma), m, rule, 0.5),
                  PreconditionError);
}

TEST_CASE("Jensen holds for the certified PL functional") {
  const QuadRule rule = hermite_rule();
  const CorrelationModel m = build_model(0.0, 0.5);
  const double alpha = 0.45;
  ScanDomain d = ScanDomain::standard(0.1, 17, 5);
  const MinRResult mr = min_r(JSpec::pl(m, 1.0, alpha), d);
  const JSpec spec = JSpec::pl(m, mr.R_min, alpha);
  const auto J = [&](double x, double y, double z) { return j_eval(spec, x, y, z); };
  Rng rng(67);
  for (int k = 0; k < 30; ++k) {
    const PlTriple pt = make_pl_triple(rng, m.lambda);
    // the profiles vanish past the blend zone; J needs positive arguments
    auto pos = [](const GridFunction& u) {
      return Fn1([&u](double x) { return std::max(u.value(x), 1e-300); });
    };
    const JensenReport r = jensen_check(J, pos(pt.f), pos(pt.g), pos(pt.h), m, rule);
    CHECK(r.holds);
  }
}
