#pragma once

#include "crdp/distortion.hpp"
#include "crdp/policy.hpp"
#include "crdp/prob.hpp"

namespace crdp {

// Two-state source with flip probabilities p (0 to 1) and q (1 to 0), scored
// by whether the reconstruction flags two ones in a row. This family has a
// closed-form curve and kernel, which anchor the solver tests.
struct BinaryExampleParams {
  double p = 0.0;
  double q = 0.0;
};

// Per-letter optimal reconstruction kernel at distortion level d. With
// w = 1{x_i = 1 and x_{i-1} = 1}:
//   alpha = P(y = 0 | w = 0), beta = P(y = 1 | w = 1), gamma = P(y = 0).
struct AnalyticKernel {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double d = 0.0;
  bool within_validity = false;  // 0 < d < edge and all three lie in [0, 1]
};

// P(w = 1) in steady state: the weight of the flagged event.
double indicator_mass(const BinaryExampleParams& params);

// Largest nontrivial distortion: min(P(w = 1), P(w = 0)). The curve is zero
// at and beyond this level.
double analytic_dmax(const BinaryExampleParams& params);

// Curve value in bits per letter: H(P(w = 0)) - H(d) inside (0, edge),
// clamped to the endpoints outside.
double analytic_rdf(const BinaryExampleParams& params, double d);

// Kernel parameters at level d; throws std::domain_error at the d = 1/2
// singularity of the closed forms.
AnalyticKernel analytic_kernel(const BinaryExampleParams& params, double d);

// The scoring table: one-step source memory, memoryless in y; penalty 1 when
// y fails to equal the two-ones indicator.
DistortionSpec consecutive_ones_distortion();

// The kernel packaged as a windowed policy over (x_i, x_{i-1}).
CausalPolicy make_analytic_policy(const BinaryExampleParams& params, double d);

}  // namespace crdp
