#include "ehrlab/certify.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "ehrlab/errors.hpp"
#include "ehrlab/parallel.hpp"

namespace ehrlab {

const char* to_string(ScanRegion r) noexcept {
  switch (r) {
    case ScanRegion::xi_nonpositive: return "xi_nonpositive";
    case ScanRegion::xi_positive: return "xi_positive";
    case ScanRegion::all: return "all";
  }
  return "?";
}

ScanRegion scan_region_from_string(const char* s) {
  if (std::strcmp(s, "xi_nonpositive") == 0 || std::strcmp(s, "neg") == 0)
    return ScanRegion::xi_nonpositive;
  if (std::strcmp(s, "xi_positive") == 0 || std::strcmp(s, "pos") == 0)
    return ScanRegion::xi_positive;
  if (std::strcmp(s, "all") == 0) return ScanRegion::all;
  throw ConfigError(std::string("unknown scan region: ") + s);
}

ScanDomain ScanDomain::standard(double eps, int grid_per_axis, int t_points) {
  if (!(eps > 0.0)) throw ConfigError("ScanDomain: eps must be > 0");
  if (grid_per_axis < 2) throw ConfigError("ScanDomain: need at least 2 points per axis");
  if (t_points < 2) throw ConfigError("ScanDomain: need at least 2 time points");
  ScanDomain d;
  d.eps = eps;
  d.grid_per_axis = grid_per_axis;
  d.t_grid.push_back(0.0);
  const int mid = t_points - 2;
  const double t_min = 0.01, t_max = 8.0;
  for (int k = 0; k < mid; ++k) {
    const double f = mid == 1 ? 1.0 : static_cast<double>(k) / (mid - 1);
    d.t_grid.push_back(t_min * std::pow(t_max / t_min, f));
  }
  d.t_grid.push_back(std::numeric_limits<double>::infinity());
  return d;
}

namespace {

struct Best {
  double value = std::numeric_limits<double>::infinity();
  long long index = std::numeric_limits<long long>::max();
  bool better_than(const Best& o) const {
    return value < o.value || (value == o.value && index < o.index);
  }
};

struct TimeCoeffs {
  double r2 = 0.0;
  double ratio_e = 0.0;  // prefactor ratio / (1 + 1/sigma)
};

void validate(const JSpec& spec, const ScanDomain& d) {
  if (!(d.eps > 0.0)) throw ConfigError("psd_scan: eps must be > 0");
  if (d.grid_per_axis < 2) throw ConfigError("psd_scan: need at least 2 points per axis");
  if (spec.kind == JKind::ehrhard_time_varying) {
    if (!(spec.eps > 0.0)) throw ConfigError("psd_scan: time-varying kind needs eps > 0");
    if (d.t_grid.empty()) throw ConfigError("psd_scan: empty t grid");
    for (double t : d.t_grid)
      if (!(t >= 0.0)) throw ConfigError("psd_scan: t grid entries must be >= 0");
  }
}

}  // namespace

ScanReport psd_scan(const JSpec& spec, const ScanDomain& domain) {
  validate(spec, domain);
  const CorrelationModel& m = spec.model;
  const int g = domain.grid_per_axis;
  const double L = domain.half_width();
  const double h = domain.spacing();
  const bool tv = spec.kind == JKind::ehrhard_time_varying;
  const bool pl = spec.kind == JKind::pl;
  const std::vector<double> t_list = tv ? domain.t_grid : std::vector<double>{0.0};
  const ScanRegion region = pl ? ScanRegion::all : domain.region;

  std::vector<TimeCoeffs> tc(t_list.size());
  for (std::size_t k = 0; k < t_list.size(); ++k) {
    const double r = spec.r_at(t_list[k]);
    tc[k].r2 = r * r;
    tc[k].ratio_e = tv ? prefactor_ratio(spec.eps, t_list[k]) / (1.0 + 1.0 / m.sigma) : 0.0;
  }
  std::vector<double> coord(g);
  for (int i = 0; i < g; ++i) coord[i] = -L + h * i;
  const long long per_t = static_cast<long long>(g) * g * g;
  const long long total = per_t * static_cast<long long>(t_list.size());

  const Sym3 B = m.B3;
  const double lam = m.lambda, mu = 1.0 - lam, s3 = m.sigma * m.sigma2, sig = m.sigma;
  const Sym3 pl_core = pl ? condition_core_q(spec, 0.0, 0.0, 0.0, 0.0) : Sym3{};

  Best best;
  long long checked = 0;
#pragma omp parallel
  {
    Best local;
    long long local_checked = 0;
#pragma omp for schedule(static)
    for (long long idx = 0; idx < total; ++idx) {
      const long long tk = idx / per_t;
      const long long rem = idx % per_t;
      const double u = coord[rem / (g * g)];
      const double v = coord[(rem / g) % g];
      const double w = coord[rem % g];
      const double xi = lam * u + mu * v - sig * w;
      if (region == ScanRegion::xi_nonpositive && !(xi <= -domain.eps)) continue;
      if (region == ScanRegion::xi_positive && !(xi >= domain.eps)) continue;
      Sym3 n;
      if (pl) {
        n = pl_core;
      } else {
        const double c = tc[tk].r2 * xi;
        const double ce = tc[tk].ratio_e * xi;
        n = {lam * u - ce * lam - c * B.a00, -c * B.a01,     -c * B.a02,
             mu * v - ce * mu - c * B.a11,   -c * B.a12,     -s3 * w - ce * sig - c * B.a22};
      }
      const MinEig3 e = min_eig3(n);
      double val = e.value / std::max(1.0, e.norm);
      if (std::isnan(val)) val = -std::numeric_limits<double>::infinity();
      ++local_checked;
      const Best cand{val, idx};
      if (cand.better_than(local)) local = cand;
    }
#pragma omp critical
    {
      checked += local_checked;
      if (local.better_than(best)) best = local;
    }
  }
  if (checked == 0) throw DomainError("psd_scan: no grid point lies in the scan region");

  ScanReport rep;
  rep.spec = spec;
  rep.domain = domain;
  rep.points_checked = checked;
  rep.grid_spacing = h;
  const long long tk = best.index / per_t;
  const long long rem = best.index % per_t;
  ScanWitness& wit = rep.witness;
  wit.u = coord[rem / (g * g)];
  wit.v = coord[(rem / g) % g];
  wit.w = coord[rem % g];
  wit.t = t_list[tk];
  wit.x = 0.5 * std::erfc(-wit.u / std::sqrt(2.0));
  wit.y = 0.5 * std::erfc(-wit.v / std::sqrt(2.0));
  wit.z = 0.5 * std::erfc(-wit.w / std::sqrt(2.0));
  const MinEig3 e = min_eig3(condition_core_q(spec, wit.u, wit.v, wit.w, wit.t));
  wit.vector = e.vector;
  rep.min_eigenvalue = e.value;
  rep.scale = std::max(1.0, e.norm);
  rep.min_normalized = best.value;
  rep.passed = best.value >= -kScanTol;
  return rep;
}

double analytic_r_bound(const JSpec& spec, const ScanDomain& domain) {
  const CorrelationModel& m = spec.model;
  if (spec.kind == JKind::pl) {
    const SymMatrix ba = pl_b_alpha(m, spec.alpha);
    const SymMatrix minus_da = pl_d_alpha(m, spec.alpha) * -1.0;
    const double k[3] = {1.0, 1.0, 1.0 / spec.alpha};
    const double kk = 2.0 + 1.0 / (spec.alpha * spec.alpha);
    const double on_kernel = minus_da.quad_form(k) / kk;
    if (!(on_kernel > 0.0))
      throw SearchError("analytic_r_bound: no feasible R for pl when alpha >= sigma^2",
                        {k[0], k[1], k[2]});
    const EigenSystem es = eigen_decompose(ba);
    const double delta = std::min(on_kernel, es.values[1]);
    return 1.0 / psd_perturbation_bound(ba, minus_da, delta);
  }
  if (spec.kind != JKind::ehrhard_time_varying)
    throw ConfigError("analytic_r_bound: needs the pl or time-varying kind");
  if (!(spec.eps > 0.0)) throw ConfigError("analytic_r_bound: eps must be > 0");
  const double eps = domain.eps;
  // ratio(t) - 1 >= delta on the whole time axis; cap at 1 keeps (1+delta) <= 2
  const double delta = std::min(1.0, delta_eps(spec.eps, domain.t_grid));
  const auto k = m.b_kernel();
  const double kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
  const EigenSystem es = eigen_decompose(m.B);
  const double delta_psd = std::min(delta * eps / kk, eps * es.values[1]);
  const double norm_bound = 5.0 / eps;
  const double eta = perturbation_bound(delta_psd, norm_bound);
  return std::sqrt(1.0 / (eta * -std::expm1(-spec.eps)));
}

MinRResult min_r(const JSpec& spec, const ScanDomain& domain, std::optional<double> r_hi) {
  if (spec.kind == JKind::ehrhard_static)
    throw ConfigError("min_r: the static kind is never PSD on Xi < 0");
  MinRResult res;
  res.analytic_bound = analytic_r_bound(spec, domain);
  double hi = r_hi.value_or(res.analytic_bound);
  if (!(hi > 0.0 && std::isfinite(hi))) throw ConfigError("min_r: r_hi must be positive");
  auto scan = [&](double R) {
    ScanReport rep = psd_scan(spec.with_R(R), domain);
    res.ladder.emplace_back(R, rep.min_normalized);
    ++res.scans;
    return rep;
  };
  ScanReport hi_rep = scan(hi);
  if (!hi_rep.passed) {
    const auto& w = hi_rep.witness;
    throw SearchError("min_r: condition fails at r_hi", {w.u, w.v, w.w, w.t});
  }
  double lo = hi;
  for (;;) {
    lo = hi / 2.0;
    if (lo < 1e-8) throw SearchError("min_r: feasible down to R = 1e-8; no lower bracket");
    ScanReport rep = scan(lo);
    if (!rep.passed) break;
    hi = lo;
    hi_rep = std::move(rep);
  }
  while (hi / lo - 1.0 > 1e-3) {
    const double mid = std::sqrt(lo * hi);
    ScanReport rep = scan(mid);
    if (rep.passed) {
      hi = mid;
      hi_rep = std::move(rep);
    } else {
      lo = mid;
    }
  }
  res.R_min = hi;
  res.R_infeasible = lo;
  res.at_min = std::move(hi_rep);
  return res;
}

ProbeResult necessity_probe(const Evaluator3& J, const CorrelationModel& m,
                            const std::array<double, 3>& y, const std::array<double, 3>& v,
                            double window, const QuadRule& rule) {
  if (!(window > 0.0)) throw DegenerateInputError("necessity_probe: window must be > 0");
  for (int i = 0; i < 3; ++i) {
    if (!(y[i] - window > 0.0 && y[i] + window < 1.0))
      throw PreconditionError("necessity_probe: y +- window leaves (0,1)^3", {y[0], y[1], y[2]});
  }
  const double j0 = J(y[0], y[1], y[2]);
  const double s = std::sqrt(1.0 - m.rho * m.rho);
  auto clip = [&](double t) { return std::max(-window, std::min(window, t)); };
  auto ratio = [&](double eps) {
    double acc = 0.0;
    const std::size_t n = rule.nodes.size();
    for (std::size_t a = 0; a < n; ++a) {
      double row = 0.0;
      for (std::size_t b = 0; b < n; ++b) {
        const double x1 = rule.nodes[a];
        const double x2 = m.rho * x1 + s * rule.nodes[b];
        const double x3 = m.lambda * x1 + (1.0 - m.lambda) * x2;
        const double val = J(y[0] + clip(eps * v[0] * x1), y[1] + clip(eps * v[1] * x2),
                             y[2] + clip(eps * v[2] * x3));
        row += rule.weights[b] * (val - j0);
      }
      acc += rule.weights[a] * row;
    }
    return acc / (eps * eps);
  };
  ProbeResult r;
  r.coarse = ratio(1e-2);
  r.fine = ratio(5e-3);
  r.coefficient = (4.0 * r.fine - r.coarse) / 3.0;
  r.quadratic_estimate = 2.0 * r.coefficient;
  return r;
}

}  // namespace ehrlab
