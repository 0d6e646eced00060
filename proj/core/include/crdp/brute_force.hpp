#pragma once

#include <cstdint>

#include "crdp/distortion.hpp"
#include "crdp/prob.hpp"

namespace crdp {

// Reference optimizer used to cross-check the fixed-point solver. It works on
// the full string kernel P(y-string | x-string) and touches none of the
// solver machinery: distortion and mutual information come from summing the
// fully enumerated joint. Realizable kernels form a polytope (causality is a
// set of linear prefix-marginal constraints) whose vertices are deterministic
// stage maps, mutual information is convex on it and distortion linear, so a
// fully corrective conditional-gradient method with a dynamic-programming
// vertex oracle finds the global optimum of the Lagrangian for each
// multiplier, with a duality-gap certificate; an outer bisection meets the
// distortion budget exactly. Tiny parameter counts use a dense grid instead.
// Binary alphabets, short horizons.
struct BruteForceSettings {
  int horizon = 1;             // stages 0..horizon, at most 3
  double d_target = 0.0;       // per-letter distortion budget
  int grid = 65;               // per-axis resolution for the grid path
  int grid_refinements = 4;
  int max_grid_params = 3;     // parameter count at or below which we grid
  int fw_iters = 4000;         // conditional-gradient iterations per multiplier
  double fw_tol = 1e-10;       // duality-gap stop, total nats
  int bisect_iters = 64;       // multiplier bisection steps
  double lambda_max = 1e6;     // multiplier growth cap
};

struct BruteForceResult {
  double rate = 0.0;            // per-letter bits at the returned point
  double distortion = 0.0;      // per-letter, meets the budget when feasible
  double min_distortion = 0.0;  // exact floor from dynamic programming
  bool feasible = true;         // budget is at or above the floor
  double gap = 0.0;  // duality gap of the answer brackets; conservative, since
                     // zero kernel entries enter the bound with a clamped log
  long long evaluations = 0;
};

BruteForceResult brute_force_rdf(const MarkovSource& source, const DistortionSpec& dist,
                                 const BruteForceSettings& settings);

}  // namespace crdp
