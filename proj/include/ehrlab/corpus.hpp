#pragma once

#include <cstdint>
#include <random>

#include "ehrlab/flow.hpp"

namespace ehrlab {

// Seeded generators for the test corpora used by the CLI and the tests.
using Rng = std::mt19937_64;

// Phi(a - b (x - c)^2): concave in quantile space, limits 0.
GridFunction concave_profile(Rng& rng);

// Phi of a base level plus three Gaussian bumps, clamped to
// [-1/delta, 1/(3 delta)] in quantile space.
GridFunction random_clamped_function(Rng& rng, double delta);

struct HullTriple {
  Triple triple;       // clamped grid triple
  double hull_slack = 0.0;
  double smoothed_slack = 0.0;  // slack after eps-smoothing, <= -eps
  int attempts = 0;
};

// Concave f, g; h = ehrhard_hull(f, g); all three clamped with delta.
// Redraws until the eps-smoothed triple has slack <= -eps.
HullTriple make_hull_triple(Rng& rng, const CorrelationModel& m, double delta, double eps,
                            const QuadRule& rule);

// Phi of a base level plus three Gaussian bumps, unclamped and smooth.
GridFunction smooth_bump_profile(Rng& rng);

// Smooth triple: f, g from smooth_bump_profile and h constant at the lowest
// admissible level raised by delta, so Xi <= -sigma delta everywhere. (The
// hull of non-concave profiles has kinks that defeat Gauss-Hermite.)
// Redraws until the eps-smoothed slack is <= -eps.
HullTriple make_bump_triple(Rng& rng, const CorrelationModel& m, double delta, double eps,
                            const QuadRule& rule);

// Unclamped hull triple (f, g, ehrhard_hull(f, g)).
Triple make_raw_hull_triple(Rng& rng, const CorrelationModel& m);

struct PlTriple {
  GridFunction f, g, h;
};

// Gaussian-shaped f, g with peak height <= 1; h = pl_hull(f, g).
PlTriple make_pl_triple(Rng& rng, double lambda);

}  // namespace ehrlab
