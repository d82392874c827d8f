#pragma once

#include <array>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "ehrlab/jfunc.hpp"
#include "ehrlab/scalar_gauss.hpp"

namespace ehrlab {

enum class ScanRegion { xi_nonpositive, xi_positive, all };

const char* to_string(ScanRegion r) noexcept;
ScanRegion scan_region_from_string(const char* s);

// Quantile cube [-1/eps, 1/eps]^3 sampled with grid_per_axis points per axis,
// restricted by region (Xi <= -eps, Xi >= eps, or no restriction), times
// t_grid for the time-varying kind.
struct ScanDomain {
  double eps = 0.1;
  int grid_per_axis = 33;
  std::vector<double> t_grid;
  ScanRegion region = ScanRegion::xi_nonpositive;

  // t = 0, t_points - 2 geometric times up to 8, and t = +inf.
  static ScanDomain standard(double eps, int grid_per_axis = 33, int t_points = 17);
  double half_width() const { return 1.0 / eps; }
  double spacing() const { return 2.0 * half_width() / (grid_per_axis - 1); }
};

struct ScanWitness {
  double u = 0, v = 0, w = 0, t = 0;  // quantile coordinates and time
  double x = 0, y = 0, z = 0;         // Phi(u), Phi(v), Phi(w)
  std::array<double, 3> vector{};     // eigenvector of the smallest eigenvalue
};

struct ScanReport {
  JSpec spec;
  ScanDomain domain;
  long long points_checked = 0;
  double min_eigenvalue = 0.0;   // of the normalized core at the witness
  double scale = 1.0;            // max(1, ||normalized core||) at the witness
  double min_normalized = 0.0;   // min_eigenvalue / scale, minimised over the grid
  ScanWitness witness;
  bool passed = false;           // min_normalized >= -1e-9
  double grid_spacing = 0.0;
};

inline constexpr double kScanTol = 1e-9;

ScanReport psd_scan(const JSpec& spec, const ScanDomain& domain);

struct MinRResult {
  double R_min = 0.0;          // smallest feasible R found (upper end of the final bracket)
  double R_infeasible = 0.0;   // lower end of the final bracket
  double analytic_bound = 0.0;
  int scans = 0;
  std::vector<std::pair<double, double>> ladder;  // (R, min_normalized) for every scan
  ScanReport at_min;
};

// Sufficient R from psd_perturbation_bound (time-varying and pl kinds).
// Throws SearchError when no finite bound exists (pl with alpha >= sigma^2).
double analytic_r_bound(const JSpec& spec, const ScanDomain& domain);

// Bisection on R (geometric, relative width 1e-3). The scan outcome is
// monotone in R, so the bracket [R_infeasible, R_min] is exact for the grid.
// Throws SearchError if R is infeasible at r_hi (default: the analytic bound).
MinRResult min_r(const JSpec& spec, const ScanDomain& domain,
                 std::optional<double> r_hi = std::nullopt);

struct ProbeResult {
  double coefficient = 0.0;         // Richardson limit of (E J(f) - J(y)) / eps^2
  double quadratic_estimate = 0.0;  // 2 * coefficient, estimates v'(A o H_J)v
  double coarse = 0.0;              // raw ratio at eps = 1e-2
  double fine = 0.0;                // raw ratio at eps = 5e-3
};

using Evaluator3 = std::function<double(double, double, double)>;

// Perturbs y along v with clipped Gaussian coordinates and estimates the
// second-order response of E J. window is the clipping level; y +- window
// must stay inside (0,1)^3.
ProbeResult necessity_probe(const Evaluator3& J, const CorrelationModel& m,
                            const std::array<double, 3>& y, const std::array<double, 3>& v,
                            double window, const QuadRule& rule);

}  // namespace ehrlab
