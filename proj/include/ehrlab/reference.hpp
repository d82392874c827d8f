#pragma once

// Plain serial versions of the parallel kernels. They are written for
// clarity rather than speed and serve as test oracles and benchmark
// baselines.

#include <vector>

#include "ehrlab/certify.hpp"
#include "ehrlab/flow.hpp"
#include "ehrlab/semigroup.hpp"

namespace ehrlab::reference {

// Builds every condition matrix with condition_matrix_q and takes its
// smallest eigenvalue with the Jacobi solver.
ScanReport psd_scan(const JSpec& spec, const ScanDomain& domain);

// Sums values only (no complement tracking).
GridFunction ou_apply(const GridFunction& f, double t, double sigma2, const QuadRule& rule);

SlackReport triple_slack(const GridFunction& f, const GridFunction& g, const GridFunction& h,
                         const CorrelationModel& m);

// Discrete sup over node pairs (i, j) with lambda i + (1 - lambda) j rounded
// to the nearest node.
std::vector<double> sup_convolution(const GridFunction& f, const GridFunction& g, double lambda,
                                    SupScore score);

}  // namespace ehrlab::reference
