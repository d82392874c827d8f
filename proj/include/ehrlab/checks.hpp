#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ehrlab/certify.hpp"
#include "ehrlab/corpus.hpp"
#include "ehrlab/flow.hpp"
#include "ehrlab/jfunc.hpp"

// Seeded verification campaigns shared by the CLI and the acceptance runner.
namespace ehrlab::checks {

// Second derivatives of j_eval by central differences with one Richardson
// step (h and h/2).
SymMatrix fd_hessian(const JSpec& s, double x, double y, double z, double t, double h = 5e-4);

// A random spec of the given kind with moderate R, used for the Hessian
// comparisons: rho in [-0.8, 0.8], lambda in [0.2, 0.8].
JSpec random_spec(Rng& rng, JKind kind);

struct HessianCase {
  JSpec spec;
  std::array<double, 4> point{};  // x, y, z, t
  double fd_error = 0.0;          // max |closed - fd| / max |closed|
  double hadamard_error = 0.0;    // max |A o H - C^-1 core C^-1| / max |A o H|
};

struct HessianReport {
  JKind kind = JKind::ehrhard_static;
  int count = 0;
  double max_fd_error = 0.0;
  double max_hadamard_error = 0.0;
  HessianCase worst_fd, worst_hadamard;
};

// Points with coordinates in [0.1, 0.9] and t in [0, 3].
HessianReport hessian_campaign(JKind kind, int count, std::uint64_t seed);

struct EndpointCampaign {
  int count = 0;
  double min_margin = 0.0;
  double max_abs_margin = 0.0;
  std::vector<EndpointReport> cases;
};

// Half-lines with a, b in [-2, 2] and c = lambda a + (1 - lambda) b.
EndpointCampaign halfline_endpoint_campaign(const CorrelationModel& m, int count,
                                            std::uint64_t seed, const QuadRule& rule);
// Unclamped hull triples from concave profiles.
EndpointCampaign hull_endpoint_campaign(const CorrelationModel& m, int count, std::uint64_t seed,
                                        const QuadRule& rule);

struct PlCampaign {
  int count = 0;
  double min_gap = 0.0;  // min over cases of lhs - rhs
  std::vector<PlReport> cases;
};

PlCampaign pl_endpoint_campaign(const CorrelationModel& m, double alpha, int count,
                                std::uint64_t seed, const QuadRule& rule);

struct BlCampaign {
  int count = 0;
  double max_ratio = 0.0;
  double halfline_ratio = 0.0;  // max ratio of a smoothed half-line, should be 1
  double halfline_min_ratio = 0.0;
};

// Clamped random functions (delta 0.25) smoothed at t in [0.1, 2], sigma^2 = 1.
// The clamp kinks need trapezoid_rule; Gauss-Hermite overshoots the bound.
BlCampaign bl_campaign(int count, std::uint64_t seed, const QuadRule& rule);

struct ProbeCase {
  std::array<double, 3> point{};
  std::array<double, 3> direction{};
  double xi = 0.0;
  double quadratic_form = 0.0;  // v'(A o H_J)v
  ProbeResult probe;
  double rel_error = 0.0;  // |estimate - quadratic_form| / |quadratic_form|
};

struct ProbeCampaign {
  int count = 0;
  double max_rel_error = 0.0;
  bool all_negative = true;
  std::vector<ProbeCase> cases;
};

// Static Ehrhard J at random points with Xi > 0; v is the eigenvector of the
// smallest eigenvalue of A o H_J.
ProbeCampaign probe_campaign(const CorrelationModel& m, double R, int count, std::uint64_t seed,
                             const QuadRule& rule);

}  // namespace ehrlab::checks
