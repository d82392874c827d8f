#include "ehrlab/jfunc.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "ehrlab/errors.hpp"
#include "ehrlab/scalar_gauss.hpp"

namespace ehrlab {

const char* to_string(JKind k) noexcept {
  switch (k) {
    case JKind::pl: return "pl";
    case JKind::ehrhard_static: return "ehrhard_static";
    case JKind::ehrhard_time_varying: return "ehrhard_time_varying";
  }
  return "?";
}

JKind jkind_from_string(const char* s) {
  if (std::strcmp(s, "pl") == 0) return JKind::pl;
  if (std::strcmp(s, "ehrhard_static") == 0 || std::strcmp(s, "static") == 0)
    return JKind::ehrhard_static;
  if (std::strcmp(s, "ehrhard_time_varying") == 0 || std::strcmp(s, "time_varying") == 0 ||
      std::strcmp(s, "tv") == 0)
    return JKind::ehrhard_time_varying;
  throw ConfigError(std::string("unknown J kind: ") + s);
}

namespace {

void check_R(double R) {
  if (!(R > 0.0 && std::isfinite(R))) throw ConfigError("JSpec: R must be positive and finite");
}

void check_unit(double x, double y, double z) {
  if (!(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0 && z > 0.0 && z < 1.0))
    throw DomainError("J: arguments must lie in (0,1)");
}

void check_t(double t) {
  if (!(t >= 0.0) || std::isnan(t)) throw DomainError("J: t must be >= 0");
}

}  // namespace

JSpec JSpec::pl(const CorrelationModel& m, double R, double alpha) {
  check_R(R);
  if (!(alpha > 0.0 && std::isfinite(alpha))) throw ConfigError("JSpec: alpha must be positive");
  JSpec s;
  s.kind = JKind::pl;
  s.model = m;
  s.R = R;
  s.alpha = alpha;
  return s;
}

JSpec JSpec::ehrhard_static(const CorrelationModel& m, double R) {
  check_R(R);
  JSpec s;
  s.kind = JKind::ehrhard_static;
  s.model = m;
  s.R = R;
  return s;
}

JSpec JSpec::ehrhard_time_varying(const CorrelationModel& m, double R, double eps) {
  check_R(R);
  if (!(eps >= 0.0 && std::isfinite(eps))) throw ConfigError("JSpec: eps must be >= 0");
  JSpec s;
  s.kind = JKind::ehrhard_time_varying;
  s.model = m;
  s.R = R;
  s.eps = eps;
  return s;
}

double JSpec::r_at(double t) const {
  check_t(t);
  if (kind != JKind::ehrhard_time_varying || std::isinf(t)) return R;
  return R * std::sqrt(-std::expm1(-2.0 * t - eps));
}

double prefactor_ratio(double eps, double t) {
  if (!(eps > 0.0)) throw ConfigError("prefactor_ratio: eps must be > 0");
  check_t(t);
  if (std::isinf(t) || 2.0 * t + eps > 700.0) return std::exp(eps);
  return std::expm1(2.0 * t + 2.0 * eps) / std::expm1(2.0 * t + eps);
}

double delta_eps(double eps, std::span<const double> t_grid) {
  double d = std::expm1(eps);
  for (double t : t_grid) d = std::min(d, prefactor_ratio(eps, t) - 1.0);
  return d;
}

double j_eval_q(const JSpec& s, double u, double v, double w, double t) {
  if (!s.is_ehrhard()) throw ConfigError("j_eval_q: quantile coordinates need an Ehrhard kind");
  return normal_cdf(s.r_at(t) * s.model.xi_q(u, v, w));
}

double j_eval(const JSpec& s, double x, double y, double z, double t) {
  check_t(t);
  if (s.kind == JKind::pl) {
    if (!(x > 0.0 && y > 0.0 && z > 0.0) || !std::isfinite(x + y + z))
      throw DomainError("J(pl): arguments must be positive and finite");
    const double lam = s.model.lambda;
    return std::exp(s.R * (lam * std::log(x) + (1.0 - lam) * std::log(y) - s.alpha * std::log(z)));
  }
  check_unit(x, y, z);
  return j_eval_q(s, normal_quantile(x), normal_quantile(y), normal_quantile(z), t);
}

double j_time_deriv_q(const JSpec& s, double u, double v, double w, double t) {
  if (s.kind != JKind::ehrhard_time_varying)
    throw ConfigError("j_time_deriv: needs the time-varying kind");
  check_t(t);
  if (s.eps == 0.0 && t == 0.0) throw DomainError("j_time_deriv: singular at eps = 0, t = 0");
  if (std::isinf(t)) return 0.0;
  const double r = s.r_at(t);
  const double xi = s.model.xi_q(u, v, w);
  return r / std::expm1(2.0 * t + s.eps) * xi * normal_pdf(r * xi);
}

double j_time_deriv(const JSpec& s, double x, double y, double z, double t) {
  check_unit(x, y, z);
  return j_time_deriv_q(s, normal_quantile(x), normal_quantile(y), normal_quantile(z), t);
}

SymMatrix d_matrix(const CorrelationModel& m, double u, double v, double w) {
  const double d[3] = {m.lambda * u, (1.0 - m.lambda) * v, -m.sigma * m.sigma2 * w};
  return SymMatrix::diagonal(d);
}

SymMatrix pl_b_alpha(const CorrelationModel& m, double alpha) {
  const double th[3] = {m.lambda, 1.0 - m.lambda, -alpha};
  return hadamard(m.A, SymMatrix::outer(th));
}

SymMatrix pl_d_alpha(const CorrelationModel& m, double alpha) {
  const double d[3] = {m.lambda, 1.0 - m.lambda, -alpha * m.sigma2};
  return SymMatrix::diagonal(d);
}

SymMatrix hessian_closed(const JSpec& s, double x, double y, double z, double t) {
  check_t(t);
  const CorrelationModel& m = s.model;
  if (s.kind == JKind::pl) {
    const double J = j_eval(s, x, y, z, t);
    const double th[3] = {m.lambda, 1.0 - m.lambda, -s.alpha};
    const double p[3] = {x, y, z};
    SymMatrix h(3);
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) {
        double v = th[i] * th[j];
        if (i == j) v -= th[i] / s.R;
        h.set(i, j, J * s.R * s.R * v / (p[i] * p[j]));
      }
    return h;
  }
  check_unit(x, y, z);
  const double q[3] = {normal_quantile(x), normal_quantile(y), normal_quantile(z)};
  const double r = s.r_at(t);
  const double xi = m.xi_q(q[0], q[1], q[2]);
  const double pre = normal_pdf(r * xi);
  SymMatrix h(3);
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      double v = -r * r * r * xi * m.theta[i] * m.theta[j];
      if (i == j) v += r * m.theta[i] * q[i];
      h.set(i, j, pre * v / (normal_pdf(q[i]) * normal_pdf(q[j])));
    }
  return h;
}

HadamardHessian a_hadamard_hess(const JSpec& s, double x, double y, double z, double t) {
  check_t(t);
  HadamardHessian out;
  const CorrelationModel& m = s.model;
  if (s.kind == JKind::pl) {
    const double J = j_eval(s, x, y, z, t);
    out.core = (pl_b_alpha(m, s.alpha) - pl_d_alpha(m, s.alpha) * (1.0 / s.R)) * (J * s.R * s.R);
    out.conj = {x, y, z};
  } else {
    check_unit(x, y, z);
    const double u = normal_quantile(x), v = normal_quantile(y), w = normal_quantile(z);
    const double r = s.r_at(t);
    const double xi = m.xi_q(u, v, w);
    out.core = (d_matrix(m, u, v, w) - m.B * (r * r * xi)) * (r * normal_pdf(r * xi));
    out.conj = {normal_pdf(u), normal_pdf(v), normal_pdf(w)};
  }
  out.full = SymMatrix(3);
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) out.full.set(i, j, out.core(i, j) / (out.conj[i] * out.conj[j]));
  return out;
}

Sym3 condition_core_q(const JSpec& s, double u, double v, double w, double t) noexcept {
  const CorrelationModel& m = s.model;
  const Sym3& B = m.B3;
  if (s.kind == JKind::pl) {
    const double lam = m.lambda, mu = 1.0 - lam, a = s.alpha;
    const Sym3& A = m.A3;
    const double ir = 1.0 / s.R;
    return {A.a00 * lam * lam - lam * ir, A.a01 * lam * mu, -A.a02 * lam * a,
            A.a11 * mu * mu - mu * ir,    -A.a12 * mu * a,  A.a22 * a * a + a * m.sigma2 * ir};
  }
  double r = s.R;
  double ratio = 0.0;
  if (s.kind == JKind::ehrhard_time_varying) {
    if (!std::isinf(t)) r = s.R * std::sqrt(-std::expm1(-2.0 * t - s.eps));
    ratio = (std::isinf(t) || 2.0 * t + s.eps > 700.0)
                ? std::exp(s.eps)
                : std::expm1(2.0 * t + 2.0 * s.eps) / std::expm1(2.0 * t + s.eps);
  }
  const double xi = m.xi_q(u, v, w);
  const double c = r * r * xi;
  const double ce = ratio * xi / (1.0 + 1.0 / m.sigma);
  return {m.lambda * u - ce * m.lambda - c * B.a00,
          -c * B.a01,
          -c * B.a02,
          (1.0 - m.lambda) * v - ce * (1.0 - m.lambda) - c * B.a11,
          -c * B.a12,
          -m.sigma * m.sigma2 * w - ce * m.sigma - c * B.a22};
}

ConditionMatrix condition_matrix_q(const JSpec& s, double u, double v, double w, double t) {
  check_t(t);
  if (s.kind == JKind::ehrhard_time_varying && !(s.eps > 0.0))
    throw ConfigError("condition_matrix: the time-varying kind needs eps > 0");
  ConditionMatrix cm;
  cm.quantiles = {u, v, w};
  cm.point = {normal_cdf(u), normal_cdf(v), normal_cdf(w)};
  cm.t = t;
  cm.normalized = from_sym3(condition_core_q(s, u, v, w, t));
  if (s.kind == JKind::pl) {
    cm.scale = 1.0;
  } else {
    const double r = s.r_at(t);
    cm.scale = r * normal_pdf(r * s.model.xi_q(u, v, w));
  }
  if (s.kind == JKind::ehrhard_time_varying) {
    const double tt[1] = {t};
    cm.delta_eps = delta_eps(s.eps, tt);
  }
  cm.M = cm.normalized * cm.scale;
  return cm;
}

ConditionMatrix condition_matrix(const JSpec& s, double x, double y, double z, double t) {
  if (s.kind == JKind::pl) {
    if (!(x > 0.0 && y > 0.0 && z > 0.0)) throw DomainError("condition_matrix: need x, y, z > 0");
    ConditionMatrix cm = condition_matrix_q(s, 0.0, 0.0, 0.0, t);
    cm.point = {x, y, z};
    cm.quantiles = {std::log(x), std::log(y), std::log(z)};
    return cm;
  }
  check_unit(x, y, z);
  ConditionMatrix cm =
      condition_matrix_q(s, normal_quantile(x), normal_quantile(y), normal_quantile(z), t);
  cm.point = {x, y, z};
  return cm;
}

}  // namespace ehrlab
