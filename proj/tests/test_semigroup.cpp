#include <doctest.h>

#include <cmath>
#include <random>

#include "ehrlab/corpus.hpp"
#include "ehrlab/errors.hpp"
#include "ehrlab/flow.hpp"
#include "ehrlab/semigroup.hpp"

using namespace ehrlab;

TEST_CASE("GridFunction reproduces Phi of an affine function") {
  const GridFunction f = GridFunction::sample_quantile([](double x) { return 0.3 - 0.7 * x; }, 1.0, 0.0);
  for (double x : {-7.3, -1.234, 0.0, 0.5, 3.3, 7.9}) {
    CHECK(f.quantile(x) == doctest::Approx(0.3 - 0.7 * x).epsilon(1e-12));
    CHECK(f.quantile_slope(x) == doctest::Approx(-0.7).epsilon(1e-10));
    double p = 0.0, c = 0.0;
    f.value_pair(x, p, c);
    CHECK(p == doctest::Approx(normal_cdf(0.3 - 0.7 * x)).epsilon(1e-12));
    CHECK(c == doctest::Approx(normal_ccdf(0.3 - 0.7 * x)).epsilon(1e-12));
  }
}

TEST_CASE("GridFunction limits outside the grid") {
  const GridFunction f = GridFunction::sample([](double) { return 0.4; }, 0.1, 0.9);
  CHECK(f.value(100.0) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(f.value(-100.0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(f.value(f.hi() + f.blend_width() + 1e-9) == doctest::Approx(0.9).epsilon(1e-15));
  // inside the blend zone the value lies between the edge and the limit
  const double mid = f.value(f.hi() + 0.5 * f.blend_width());
  CHECK(mid > 0.4);
  CHECK(mid < 0.9);
  for (double v : f.values()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("ou_apply preserves constants") {
  const GridFunction c = GridFunction::sample([](double) { return 0.37; }, 0.37, 0.37);
  for (double t : {0.01, 0.5, 3.0}) {
    const GridFunction ct = ou_apply(c, t, 0.7, hermite_rule());
    for (double v : ct.values()) CHECK(v == doctest::Approx(0.37).epsilon(1e-14));
  }
  CHECK_THROWS_AS(ou_apply(c, INFINITY, 1.0, hermite_rule()), DomainError);
  CHECK_THROWS_AS(ou_apply(c, -1.0, 1.0, hermite_rule()), DomainError);
}

TEST_CASE("ou_apply maps an affine function to its OU mean") {
  // wide grid so the quadrature never reaches the blend zone from |x| <= 8
  const GridFunction f =
      GridFunction::sample([](double x) { return 0.5 + 0.01 * x; }, 0.1, 0.9, -40.0, 40.0, 4097);
  for (double t : {0.2, 0.7}) {
    const GridFunction ft = ou_apply(f, t, 1.0, hermite_rule());
    for (std::size_t i = 0; i < ft.n(); ++i) {
      const double x = ft.node(i);
      if (std::fabs(x) > 8.0) continue;
      CHECK(ft.values()[i] == doctest::Approx(0.5 + 0.01 * std::exp(-t) * x).epsilon(1e-8));
    }
  }
}

TEST_CASE("ou_halfline closed form") {
  CHECK(ou_halfline(0.0, 0.4, 2.0, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(ou_halfline(0.8, 40.0, 2.0, 1.5) == doctest::Approx(normal_cdf(0.8 / std::sqrt(2.0))).epsilon(1e-14));
  // e^{-t} x = 1/4 and 1 - e^{-2t} = 3/4, so the value is Phi(0.75 / sqrt(0.75)) (mpmath).
  CHECK(ou_halfline(1.0, std::log(2.0), 1.0, 0.5) ==
        doctest::Approx(0.80676188461438366753).epsilon(1e-14));
  CHECK_THROWS_AS(ou_halfline(1.0, 0.0, 1.0, 0.5), DomainError);

  // against brute-force quadrature of the indicator
  const double t = std::log(2.0), spread = std::sqrt(1.0 - 0.25);
  const QuadRule tr = trapezoid_rule(200001, 12.0);
  const double brute = tr.expect([&](double z) { return 0.5 * 0.5 + spread * z <= 1.0 ? 1.0 : 0.0; });
  CHECK(brute == doctest::Approx(ou_halfline(1.0, t, 1.0, 0.5)).epsilon(1e-4));
}

TEST_CASE("half-line slope of the smoothed quantile") {
  const HalfLine h{0.4, true};
  const double t = 0.6, s2 = 1.3;
  const double d = 1e-5;
  const double fd =
      (ou_halfline_quantile(h, t, s2, 0.2 + d) - ou_halfline_quantile(h, t, s2, 0.2 - d)) / (2 * d);
  CHECK(ou_halfline_quantile_slope(h, t, s2) == doctest::Approx(fd).epsilon(1e-8));
}

TEST_CASE("semigroup composition") {
  const QuadRule rule = hermite_rule(64);
  CHECK(semigroup_composition_error(HalfLine{0.3, true}, 0.3, 0.3, 1.0, rule) <= 1e-7);
  CHECK(semigroup_composition_error(HalfLine{-1.0, false}, 0.5, 0.2, 0.5, rule) <= 1e-7);

  const GridFunction c = GridFunction::sample([](double) { return 0.2; }, 0.2, 0.2);
  CHECK(semigroup_composition_error(c, 0.4, 0.7, 1.0, rule) <= 1e-12);

  const GridFunction bump = GridFunction::sample_quantile(
      [](double x) { return -0.5 + 1.5 * std::exp(-x * x / 2.0); }, normal_cdf(-0.5), normal_cdf(-0.5));
  CHECK(semigroup_composition_error(bump, 0.3, 0.4, 1.0, rule) <= 1e-8);
}

TEST_CASE("clamp_triple") {
  const GridFunction half = GridFunction::sample([](double) { return 0.5; }, 0.5, 0.5);
  const ClampedTriple ct = clamp_triple(half, half, half, 0.1);
  for (std::size_t i = 0; i < half.n(); ++i) {
    CHECK(ct.f.values()[i] == 0.5);
    CHECK(ct.g.values()[i] == 0.5);
    CHECK(ct.h.values()[i] == doctest::Approx(normal_cdf(0.1)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(clamp_triple(half, half, half, 0.0), DomainError);

  // values land inside [Phi(-1/d), Phi(1/d)]
  Rng rng(21);
  const GridFunction wild = random_clamped_function(rng, 0.01);
  const ClampedTriple cw = clamp_triple(wild, wild, wild, 0.2);
  for (const GridFunction* g : {&cw.f, &cw.g, &cw.h})
    for (double q : g->quantiles()) {
      CHECK(q >= -5.0 - 1e-12);
      CHECK(q <= 5.0 + 1e-12);
    }
}

TEST_CASE("clamping a hull triple shifts the slack by -sigma delta") {
  Rng rng(22);
  const CorrelationModel m = build_model(0.3, 0.4);
  for (int k = 0; k < 5; ++k) {
    const Triple raw = make_raw_hull_triple(rng, m);
    const GridFunction& f = std::get<GridFunction>(raw.f);
    const GridFunction& g = std::get<GridFunction>(raw.g);
    const GridFunction& h = std::get<GridFunction>(raw.h);
    const double before = triple_slack(f, g, h, m).slack;
    CHECK(before <= 1e-3);
    const ClampedTriple ct = clamp_triple(f, g, h, 0.05);
    const double after = triple_slack(ct.f, ct.g, ct.h, m).slack;
    // Off-grid points next to a clamp kink lose a few percent of the shift to
    // spline error.
    INFO("before ", before, " after ", after);
    CHECK(after <= before - 0.9 * m.sigma * 0.05);
  }
}

TEST_CASE("Bakry-Ledoux ratio") {
  const QuadRule rule = trapezoid_rule();
  const GridFunction c = GridFunction::sample([](double) { return 0.3; }, 0.3, 0.3);
  CHECK(bl_gradient_check(c, 0.5, 1.0, rule).max_ratio <= 1e-12);

  for (double t : {0.1, 0.5, 2.0}) {
    const BlReport r = bl_gradient_check(HalfLine{0.3, true}, t, 1.0, rule);
    CHECK(std::fabs(r.max_ratio - 1.0) <= 1e-6);
    CHECK(r.nodes_checked > 0);
  }

  const GridFunction bump = GridFunction::sample_quantile(
      [](double x) { return -0.5 + 1.5 * std::exp(-x * x / 2.0); }, normal_cdf(-0.5), normal_cdf(-0.5));
  CHECK(bl_gradient_check(bump, 0.4, 1.0, rule).max_ratio < 1.0);
  CHECK_THROWS_AS(bl_gradient_check(bump, 0.0, 1.0, rule), DomainError);
}

TEST_CASE("Bakry-Ledoux ratio stays below one on random clamped functions (property)") {
  Rng rng(23);
  const QuadRule rule = trapezoid_rule();
  for (int k = 0; k < 8; ++k) {
    const GridFunction f = random_clamped_function(rng, 0.25);
    const double t = std::uniform_real_distribution<double>(0.1, 2.0)(rng);
    CHECK(bl_gradient_check(f, t, 1.0, rule).max_ratio <= 1.0 + 1e-6);
  }
}
