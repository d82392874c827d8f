#pragma once

#include <array>
#include <span>

#include "ehrlab/model.hpp"
#include "ehrlab/symmat.hpp"

namespace ehrlab {

enum class JKind { pl, ehrhard_static, ehrhard_time_varying };

const char* to_string(JKind k) noexcept;
JKind jkind_from_string(const char* s);

// Parameters of the functional J whose Hessian condition is checked.
//   pl:                    (x^lambda y^(1-lambda) z^(-alpha))^R
//   ehrhard_static:        Phi(R Xi)
//   ehrhard_time_varying:  Phi(r(t) Xi), r(t) = R sqrt(1 - e^{-2t-eps})
struct JSpec {
  JKind kind = JKind::ehrhard_static;
  CorrelationModel model;
  double R = 1.0;
  double alpha = 0.0;
  double eps = 0.0;

  static JSpec pl(const CorrelationModel& m, double R, double alpha);
  static JSpec ehrhard_static(const CorrelationModel& m, double R);
  // eps = 0 is accepted here; operations that need eps > 0 check it.
  static JSpec ehrhard_time_varying(const CorrelationModel& m, double R, double eps);

  JSpec with_R(double r) const {
    JSpec s = *this;
    s.R = r;
    return s;
  }

  // Effective scale at time t (R for the static and pl kinds; t = +inf
  // gives R for the time-varying kind).
  double r_at(double t) const;
  bool is_ehrhard() const noexcept { return kind != JKind::pl; }
};

// (e^{2(t+eps)} - 1) / (e^{2t+eps} - 1); decreases from e^eps + 1 at t = 0
// to e^eps as t -> inf.
double prefactor_ratio(double eps, double t);

// Margin by which prefactor_ratio exceeds 1 on the given times, capped by
// the t -> inf value e^eps - 1.
double delta_eps(double eps, std::span<const double> t_grid);

double j_eval(const JSpec& s, double x, double y, double z, double t = 0.0);
// Ehrhard kinds only: J at quantile coordinates (u, v, w).
double j_eval_q(const JSpec& s, double u, double v, double w, double t = 0.0);

// dJ/dt for the time-varying kind: r/(e^{2t+eps} - 1) Xi phi(r Xi).
double j_time_deriv(const JSpec& s, double x, double y, double z, double t);
double j_time_deriv_q(const JSpec& s, double u, double v, double w, double t);

// Closed-form Hessian of J in (x, y, z).
SymMatrix hessian_closed(const JSpec& s, double x, double y, double z, double t = 0.0);

// A o Hess J written as C^{-1} core C^{-1} with C = diag(conj):
//   ehrhard: core = r phi(r Xi) (D - r^2 Xi B), conj = (phi(u), phi(v), phi(w))
//   pl:      core = J R^2 (B_alpha - D_alpha / R), conj = (x, y, z)
// full is A o Hess J computed from that factorisation.
struct HadamardHessian {
  SymMatrix full;
  SymMatrix core;
  std::array<double, 3> conj{};
};
HadamardHessian a_hadamard_hess(const JSpec& s, double x, double y, double z, double t = 0.0);

// D = diag(lambda u, (1-lambda) v, -sigma^3 w).
SymMatrix d_matrix(const CorrelationModel& m, double u, double v, double w);

// Reduced core whose PSD-ness decides the Hessian condition, with the
// positive scalar prefactor split off:
//   time-varying: M = scale * normalized,
//     normalized = D - ratio(t) Xi E - r^2 Xi B, scale = r phi(r Xi)
//   static:       normalized = D - R^2 Xi B
//   pl:           normalized = B_alpha - D_alpha / R (point independent)
struct ConditionMatrix {
  std::array<double, 3> point{};      // probabilities (may round to 0/1)
  std::array<double, 3> quantiles{};  // exact coordinates
  double t = 0.0;
  SymMatrix M;
  SymMatrix normalized;
  double scale = 1.0;
  double delta_eps = 0.0;
};

// Time-varying kind requires eps > 0 (ConfigError otherwise).
ConditionMatrix condition_matrix(const JSpec& s, double x, double y, double z, double t);
ConditionMatrix condition_matrix_q(const JSpec& s, double u, double v, double w, double t);

// Hot-path version of condition_matrix_q(...).normalized.
Sym3 condition_core_q(const JSpec& s, double u, double v, double w, double t) noexcept;

// B_alpha = A o theta_a theta_a', D_alpha = diag(lambda, 1-lambda, -alpha sigma^2).
SymMatrix pl_b_alpha(const CorrelationModel& m, double alpha);
SymMatrix pl_d_alpha(const CorrelationModel& m, double alpha);

}  // namespace ehrlab
