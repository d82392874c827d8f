#include "ehrlab/reference.hpp"

#include <cmath>
#include <limits>

#include "ehrlab/errors.hpp"

namespace ehrlab::reference {

ScanReport psd_scan(const JSpec& spec, const ScanDomain& domain) {
  const bool tv = spec.kind == JKind::ehrhard_time_varying;
  const bool pl = spec.kind == JKind::pl;
  const std::vector<double> t_list = tv ? domain.t_grid : std::vector<double>{0.0};
  const int g = domain.grid_per_axis;
  const double L = domain.half_width(), h = domain.spacing();
  ScanReport rep;
  rep.spec = spec;
  rep.domain = domain;
  rep.grid_spacing = h;
  double best = std::numeric_limits<double>::infinity();
  for (double t : t_list) {
    for (int i = 0; i < g; ++i) {
      for (int j = 0; j < g; ++j) {
        for (int k = 0; k < g; ++k) {
          const double u = -L + h * i, v = -L + h * j, w = -L + h * k;
          const double xi = spec.model.xi_q(u, v, w);
          if (!pl && domain.region == ScanRegion::xi_nonpositive && !(xi <= -domain.eps)) continue;
          if (!pl && domain.region == ScanRegion::xi_positive && !(xi >= domain.eps)) continue;
          const ConditionMatrix cm = condition_matrix_q(spec, u, v, w, t);
          const EigenSystem es = eigen_decompose(cm.normalized);
          const double norm = std::max(std::fabs(es.values.front()), std::fabs(es.values.back()));
          const double val = es.values.front() / std::max(1.0, norm);
          ++rep.points_checked;
          if (val < best) {
            best = val;
            rep.witness.u = u;
            rep.witness.v = v;
            rep.witness.w = w;
            rep.witness.t = t;
            rep.witness.x = normal_cdf(u);
            rep.witness.y = normal_cdf(v);
            rep.witness.z = normal_cdf(w);
            rep.witness.vector = {es.vectors[0][0], es.vectors[0][1], es.vectors[0][2]};
            rep.min_eigenvalue = es.values.front();
            rep.scale = std::max(1.0, norm);
          }
        }
      }
    }
  }
  if (rep.points_checked == 0) throw DomainError("psd_scan: no grid point lies in the scan region");
  rep.min_normalized = best;
  rep.passed = best >= -kScanTol;
  return rep;
}

GridFunction ou_apply(const GridFunction& f, double t, double sigma2, const QuadRule& rule) {
  if (t == 0.0) return f;
  std::vector<double> vals(f.n());
  const double decay = std::exp(-t);
  const double spread = std::sqrt((1.0 - std::exp(-2.0 * t)) * sigma2);
  for (std::size_t i = 0; i < f.n(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k)
      s += rule.weights[k] * f.value(decay * f.node(i) + spread * rule.nodes[k]);
    vals[i] = std::min(1.0, std::max(0.0, s));
  }
  return GridFunction::from_values(f.lo(), f.hi(), std::move(vals), f.limit_neg(), f.limit_pos());
}

SlackReport triple_slack(const GridFunction& f, const GridFunction& g, const GridFunction& h,
                         const CorrelationModel& m) {
  SlackReport r;
  r.slack = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.n(); ++i) {
    for (std::size_t j = 0; j < g.n(); ++j) {
      const double x = f.node(i), y = g.node(j);
      const double v = m.xi_q(f.quantiles()[i], g.quantiles()[j],
                              h.quantile(m.lambda * x + (1.0 - m.lambda) * y));
      if (v > r.slack) {
        r.slack = v;
        r.x = x;
        r.y = y;
      }
    }
  }
  return r;
}

std::vector<double> sup_convolution(const GridFunction& f, const GridFunction& g, double lambda,
                                    SupScore score) {
  const std::size_t n = f.n();
  std::vector<double> out(n, -std::numeric_limits<double>::infinity());
  auto sc = [&](const GridFunction& u, std::size_t i) {
    return score == SupScore::quantile ? u.quantiles()[i] : std::log(u.values()[i]);
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double pos = lambda * static_cast<double>(i) + (1.0 - lambda) * static_cast<double>(j);
      const auto k = static_cast<std::size_t>(std::llround(pos));
      out[k] = std::max(out[k], lambda * sc(f, i) + (1.0 - lambda) * sc(g, j));
    }
  }
  return out;
}

}  // namespace ehrlab::reference
