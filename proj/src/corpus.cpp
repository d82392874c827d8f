#include "ehrlab/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ehrlab/errors.hpp"

namespace ehrlab {

namespace {

double uniform(Rng& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

}  // namespace

GridFunction concave_profile(Rng& rng) {
  const double a = uniform(rng, -0.5, 1.2);
  const double b = uniform(rng, 0.08, 0.4);  // keeps |q| < 37 on [-8, 8]
  const double c = uniform(rng, -1.5, 1.5);
  return GridFunction::sample_quantile([&](double x) { return a - b * (x - c) * (x - c); }, 0.0,
                                       0.0);
}

GridFunction random_clamped_function(Rng& rng, double delta) {
  const double base = uniform(rng, -2.0, 0.0);
  double amp[3], mid[3], wid[3];
  for (int k = 0; k < 3; ++k) {
    amp[k] = uniform(rng, -2.0, 3.0);
    mid[k] = uniform(rng, -3.0, 3.0);
    wid[k] = uniform(rng, 0.3, 1.5);
  }
  const double lo = -1.0 / delta, hi = 1.0 / (3.0 * delta);
  auto q = [&](double x) {
    double v = base;
    for (int k = 0; k < 3; ++k) v += amp[k] * std::exp(-0.5 * (x - mid[k]) * (x - mid[k]) / (wid[k] * wid[k]));
    return std::clamp(v, lo, hi);
  };
  const double lim = normal_cdf(std::clamp(base, lo, hi));
  return GridFunction::sample_quantile(q, lim, lim);
}

Triple make_raw_hull_triple(Rng& rng, const CorrelationModel& m) {
  GridFunction f = concave_profile(rng);
  GridFunction g = concave_profile(rng);
  HullResult hr = ehrhard_hull(f, g, m);
  return Triple{std::move(f), std::move(g), std::move(hr.h), m};
}

namespace {

template <class Draw>
HullTriple admissible_triple(Rng& rng, const CorrelationModel& m, double delta, double eps,
                             const QuadRule& rule, Draw&& draw, const char* who) {
  for (int attempt = 1; attempt <= 50; ++attempt) {
    const GridFunction f = draw(rng);
    const GridFunction g = draw(rng);
    const HullResult hr = ehrhard_hull(f, g, m);
    const ClampedTriple ct = clamp_triple(f, g, hr.h, delta);
    const GridFunction fe = ou_apply(ct.f, eps, 1.0, rule);
    const GridFunction ge = ou_apply(ct.g, eps, 1.0, rule);
    const GridFunction he = ou_apply(ct.h, eps, m.sigma2, rule);
    const SlackReport sl = triple_slack(fe, ge, he, m);
    if (sl.slack <= -eps) return HullTriple{Triple{ct.f, ct.g, ct.h, m}, hr.slack, sl.slack, attempt};
  }
  throw SearchError(std::string(who) + ": no admissible triple in 50 draws");
}

}  // namespace

HullTriple make_hull_triple(Rng& rng, const CorrelationModel& m, double delta, double eps,
                            const QuadRule& rule) {
  return admissible_triple(rng, m, delta, eps, rule, concave_profile, "make_hull_triple");
}

GridFunction smooth_bump_profile(Rng& rng) {
  const double base = uniform(rng, -2.0, 0.0);
  double amp[3], mid[3], wid[3];
  for (int k = 0; k < 3; ++k) {
    amp[k] = uniform(rng, -2.0, 3.0);
    mid[k] = uniform(rng, -3.0, 3.0);
    wid[k] = uniform(rng, 0.5, 1.5);
  }
  auto q = [&](double x) {
    double v = base;
    for (int k = 0; k < 3; ++k) v += amp[k] * std::exp(-0.5 * (x - mid[k]) * (x - mid[k]) / (wid[k] * wid[k]));
    return v;
  };
  const double lim = normal_cdf(base);
  return GridFunction::sample_quantile(q, lim, lim);
}

HullTriple make_bump_triple(Rng& rng, const CorrelationModel& m, double delta, double eps,
                            const QuadRule& rule) {
  for (int attempt = 1; attempt <= 50; ++attempt) {
    const GridFunction f = smooth_bump_profile(rng);
    const GridFunction g = smooth_bump_profile(rng);
    const auto& qf = f.quantiles();
    const auto& qg = g.quantiles();
    const double top = m.lambda * *std::max_element(qf.begin(), qf.end()) +
                       (1.0 - m.lambda) * *std::max_element(qg.begin(), qg.end());
    const double level = top / m.sigma + delta;
    const GridFunction h = GridFunction::sample_quantile([level](double) { return level; },
                                                        normal_cdf(level), normal_cdf(level));
    const GridFunction fe = ou_apply(f, eps, 1.0, rule);
    const GridFunction ge = ou_apply(g, eps, 1.0, rule);
    const GridFunction he = ou_apply(h, eps, m.sigma2, rule);
    const SlackReport sl = triple_slack(fe, ge, he, m);
    if (sl.slack <= -eps) return HullTriple{Triple{f, g, h, m}, -m.sigma * delta, sl.slack, attempt};
  }
  throw SearchError("make_bump_triple: no admissible triple in 50 draws");
}

PlTriple make_pl_triple(Rng& rng, double lambda) {
  auto bump = [&]() {
    const double amp = uniform(rng, 0.3, 1.0);
    const double mid = uniform(rng, -1.5, 1.5);
    const double wid = uniform(rng, 0.5, 2.0);
    return GridFunction::sample(
        [&](double x) { return amp * std::exp(-0.5 * (x - mid) * (x - mid) / (wid * wid)); }, 0.0,
        0.0);
  };
  GridFunction f = bump();
  GridFunction g = bump();
  GridFunction h = pl_hull(f, g, lambda);
  return PlTriple{std::move(f), std::move(g), std::move(h)};
}

}  // namespace ehrlab
