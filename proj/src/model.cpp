#include "ehrlab/model.hpp"

#include <cmath>

#include "ehrlab/errors.hpp"
#include "ehrlab/scalar_gauss.hpp"

namespace ehrlab {

CorrelationModel build_model(double rho, double lambda) {
  if (!(rho > -1.0 && rho < 1.0)) throw DomainError("build_model: rho must lie in (-1,1)");
  if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("build_model: lambda must lie in (0,1)");
  CorrelationModel m;
  m.rho = rho;
  m.lambda = lambda;
  const double mu = 1.0 - lambda;
  m.sigma2 = lambda * lambda + mu * mu + 2.0 * lambda * mu * rho;
  m.sigma = std::sqrt(m.sigma2);
  const double cxz = lambda + mu * rho;
  const double cyz = lambda * rho + mu;
  m.A = SymMatrix::from_rows({{1.0, rho, cxz}, {rho, 1.0, cyz}, {cxz, cyz, m.sigma2}});
  m.theta = {lambda, mu, -m.sigma};
  m.B = hadamard(m.A, SymMatrix::outer(m.theta));
  const double c = 1.0 / (1.0 + 1.0 / m.sigma);
  const double e[3] = {lambda * c, mu * c, m.sigma * c};
  m.E = SymMatrix::diagonal(e);
  auto [f1, f2] = rank2_factor(m.A);
  m.a_factor1 = std::move(f1);
  m.a_factor2 = std::move(f2);
  m.B3 = to_sym3(m.B);
  m.A3 = to_sym3(m.A);
  return m;
}

double xi(const CorrelationModel& m, double x, double y, double z) {
  if (!(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0 && z > 0.0 && z < 1.0))
    throw DomainError("xi: probabilities must lie in (0,1)");
  return m.xi_q(normal_quantile(x), normal_quantile(y), normal_quantile(z));
}

}  // namespace ehrlab
