#pragma once

#include <array>
#include <vector>

#include "ehrlab/symmat.hpp"

namespace ehrlab {

// Joint law of (X, Y, Z): X, Y standard normal with correlation rho and
// Z = lambda X + (1 - lambda) Y, so Var Z = sigma^2.
struct CorrelationModel {
  double rho = 0.0;
  double lambda = 0.5;
  double sigma2 = 0.5;
  double sigma = 0.7071067811865476;

  SymMatrix A;                    // covariance of (X, Y, Z)
  std::array<double, 3> theta{};  // (lambda, 1 - lambda, -sigma)
  SymMatrix B;                    // A o theta theta', PSD of rank 2
  SymMatrix E;                    // diag(lambda, 1 - lambda, sigma) / (1 + 1/sigma)
  std::vector<double> a_factor1;  // A = a1 a1' + a2 a2'
  std::vector<double> a_factor2;

  Sym3 B3;  // B and A in compact form for inner loops
  Sym3 A3;

  // lambda u + (1 - lambda) v - sigma w, the combination of quantiles whose
  // sign decides admissibility.
  double xi_q(double u, double v, double w) const noexcept {
    return lambda * u + (1.0 - lambda) * v - sigma * w;
  }
  // Kernel vector of B: (1, 1, 1/sigma).
  std::array<double, 3> b_kernel() const noexcept { return {1.0, 1.0, 1.0 / sigma}; }
  // Kernel vector of A: (lambda, 1 - lambda, -1).
  std::array<double, 3> a_kernel() const noexcept { return {lambda, 1.0 - lambda, -1.0}; }
};

// Throws DomainError unless rho in (-1,1) and lambda in (0,1).
CorrelationModel build_model(double rho, double lambda);

// Xi at probabilities (x, y, z) in (0,1)^3. Throws DomainError otherwise.
double xi(const CorrelationModel& m, double x, double y, double z);

}  // namespace ehrlab
