#include "ehrlab/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ehrlab/errors.hpp"
#include "ehrlab/scalar_gauss.hpp"

namespace ehrlab::checks {

namespace {

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

SymMatrix fd_once(const JSpec& s, const std::array<double, 3>& p, double t, double h) {
  auto f = [&](int i, double di, int j, double dj) {
    std::array<double, 3> q = p;
    q[i] += di;
    q[j] += dj;
    return j_eval(s, q[0], q[1], q[2], t);
  };
  const double f0 = j_eval(s, p[0], p[1], p[2], t);
  SymMatrix H(3);
  for (int i = 0; i < 3; ++i) {
    H.set(i, i, (f(i, h, i, 0.0) - 2.0 * f0 + f(i, -h, i, 0.0)) / (h * h));
    for (int j = i + 1; j < 3; ++j) {
      const double v = f(i, h, j, h) - f(i, h, j, -h) - f(i, -h, j, h) + f(i, -h, j, -h);
      H.set(i, j, v / (4.0 * h * h));
    }
  }
  return H;
}

double max_abs_diff(const SymMatrix& a, const SymMatrix& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) d = std::max(d, std::fabs(a(i, j) - b(i, j)));
  return d;
}

}  // namespace

SymMatrix fd_hessian(const JSpec& s, double x, double y, double z, double t, double h) {
  const std::array<double, 3> p{x, y, z};
  const SymMatrix coarse = fd_once(s, p, t, h);
  const SymMatrix fine = fd_once(s, p, t, 0.5 * h);
  return (4.0 * fine - coarse) * (1.0 / 3.0);
}

JSpec random_spec(Rng& rng, JKind kind) {
  const CorrelationModel m = build_model(uniform(rng, -0.8, 0.8), uniform(rng, 0.2, 0.8));
  switch (kind) {
    case JKind::pl:
      return JSpec::pl(m, uniform(rng, 0.5, 3.0), uniform(rng, 0.1, 0.9));
    case JKind::ehrhard_static:
      return JSpec::ehrhard_static(m, uniform(rng, 0.5, 2.0));
    case JKind::ehrhard_time_varying:
      return JSpec::ehrhard_time_varying(m, uniform(rng, 0.5, 2.0), uniform(rng, 0.05, 0.5));
  }
  throw ConfigError("random_spec: unknown kind");
}

HessianReport hessian_campaign(JKind kind, int count, std::uint64_t seed) {
  if (count < 1) throw ConfigError("hessian_campaign: count must be >= 1");
  Rng rng(seed);
  HessianReport rep;
  rep.kind = kind;
  rep.count = count;
  for (int k = 0; k < count; ++k) {
    HessianCase c;
    c.spec = random_spec(rng, kind);
    const double x = uniform(rng, 0.1, 0.9), y = uniform(rng, 0.1, 0.9), z = uniform(rng, 0.1, 0.9);
    const double t = kind == JKind::ehrhard_time_varying ? uniform(rng, 0.0, 3.0) : 0.0;
    c.point = {x, y, z, t};

    const SymMatrix H = hessian_closed(c.spec, x, y, z, t);
    const SymMatrix F = fd_hessian(c.spec, x, y, z, t);
    c.fd_error = max_abs_diff(H, F) / std::max(H.max_abs(), 1e-300);

    // Rebuild C^-1 core C^-1 from the factorisation and compare with A o H.
    const HadamardHessian hh = a_hadamard_hess(c.spec, x, y, z, t);
    const SymMatrix direct = hadamard(c.spec.model.A, H);
    SymMatrix conj(3);
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) conj.set(i, j, hh.core(i, j) / (hh.conj[i] * hh.conj[j]));
    c.hadamard_error = max_abs_diff(direct, conj) / std::max(direct.max_abs(), 1e-300);

    if (k == 0 || c.fd_error > rep.max_fd_error) {
      rep.max_fd_error = c.fd_error;
      rep.worst_fd = c;
    }
    if (k == 0 || c.hadamard_error > rep.max_hadamard_error) {
      rep.max_hadamard_error = c.hadamard_error;
      rep.worst_hadamard = c;
    }
  }
  return rep;
}

namespace {

void add_endpoint(EndpointCampaign& c, const EndpointReport& r) {
  if (c.cases.empty() || r.margin < c.min_margin) c.min_margin = r.margin;
  c.max_abs_margin = std::max(c.max_abs_margin, std::fabs(r.margin));
  c.cases.push_back(r);
  c.count = static_cast<int>(c.cases.size());
}

}  // namespace

EndpointCampaign halfline_endpoint_campaign(const CorrelationModel& m, int count,
                                            std::uint64_t seed, const QuadRule& rule) {
  Rng rng(seed);
  EndpointCampaign c;
  for (int k = 0; k < count; ++k) {
    const double a = uniform(rng, -2.0, 2.0), b = uniform(rng, -2.0, 2.0);
    const double cc = m.lambda * a + (1.0 - m.lambda) * b;
    const Triple tr{HalfLine{a, true}, HalfLine{b, true}, HalfLine{cc, true}, m};
    add_endpoint(c, ehrhard_endpoint(tr, rule));
  }
  return c;
}

EndpointCampaign hull_endpoint_campaign(const CorrelationModel& m, int count, std::uint64_t seed,
                                        const QuadRule& rule) {
  Rng rng(seed);
  EndpointCampaign c;
  for (int k = 0; k < count; ++k) add_endpoint(c, ehrhard_endpoint(make_raw_hull_triple(rng, m), rule));
  return c;
}

PlCampaign pl_endpoint_campaign(const CorrelationModel& m, double alpha, int count,
                                std::uint64_t seed, const QuadRule& rule) {
  Rng rng(seed);
  PlCampaign c;
  for (int k = 0; k < count; ++k) {
    const PlTriple pt = make_pl_triple(rng, m.lambda);
    const PlReport r = pl_endpoint(pt.f, pt.g, pt.h, m, alpha, rule);
    const double gap = r.lhs - r.rhs;
    if (c.cases.empty() || gap < c.min_gap) c.min_gap = gap;
    c.cases.push_back(r);
  }
  c.count = static_cast<int>(c.cases.size());
  return c;
}

BlCampaign bl_campaign(int count, std::uint64_t seed, const QuadRule& rule) {
  Rng rng(seed);
  BlCampaign c;
  c.count = count;
  for (int k = 0; k < count; ++k) {
    const GridFunction f = random_clamped_function(rng, 0.25);
    const double t = uniform(rng, 0.1, 2.0);
    c.max_ratio = std::max(c.max_ratio, bl_gradient_check(f, t, 1.0, rule).max_ratio);
  }
  // Half-lines attain the bound at every point.
  const BlReport half = bl_gradient_check(HalfLine{0.3, true}, 0.5, 1.0, rule);
  c.halfline_ratio = half.max_ratio;
  const GridFunction hs = ou_halfline_grid(HalfLine{0.3, true}, 0.5, 1.0);
  double lo = std::numeric_limits<double>::infinity();
  const double factor = std::sqrt(std::expm1(1.0));
  for (std::size_t i = 1; i + 1 < hs.n(); ++i) {
    if (!hs.is_interior_node(i)) continue;
    const auto& q = hs.quantiles();
    lo = std::min(lo, factor * std::fabs(q[i + 1] - q[i - 1]) / (2.0 * hs.dx()));
  }
  c.halfline_min_ratio = lo;
  return c;
}

ProbeCampaign probe_campaign(const CorrelationModel& m, double R, int count, std::uint64_t seed,
                             const QuadRule& rule) {
  Rng rng(seed);
  const JSpec spec = JSpec::ehrhard_static(m, R);
  const Evaluator3 J = [&](double x, double y, double z) { return j_eval(spec, x, y, z); };
  ProbeCampaign c;
  int guard = 0;
  while (static_cast<int>(c.cases.size()) < count) {
    if (++guard > 1000 * count) throw SearchError("probe_campaign: no points with Xi > 0 found");
    ProbeCase pc;
    pc.point = {uniform(rng, 0.2, 0.8), uniform(rng, 0.2, 0.8), uniform(rng, 0.2, 0.8)};
    pc.xi = xi(m, pc.point[0], pc.point[1], pc.point[2]);
    if (pc.xi <= 0.1) continue;
    const HadamardHessian hh = a_hadamard_hess(spec, pc.point[0], pc.point[1], pc.point[2]);
    const PsdVerdict v = min_eig(hh.full);
    if (!(v.min_eigenvalue < 0.0)) continue;
    for (int i = 0; i < 3; ++i) pc.direction[i] = v.witness_vector[i];
    pc.quadratic_form = hh.full.quad_form(pc.direction);
    double window = 1.0;
    for (double p : pc.point) window = std::min({window, p, 1.0 - p});
    pc.probe = necessity_probe(J, m, pc.point, pc.direction, 0.5 * window, rule);
    pc.rel_error = std::fabs(pc.probe.quadratic_estimate - pc.quadratic_form) /
                   std::fabs(pc.quadratic_form);
    if (!(pc.probe.quadratic_estimate < 0.0)) c.all_negative = false;
    c.max_rel_error = std::max(c.max_rel_error, pc.rel_error);
    c.cases.push_back(pc);
  }
  c.count = count;
  return c;
}

}  // namespace ehrlab::checks
