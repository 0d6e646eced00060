#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "crdp/distortion.hpp"
#include "crdp/policy.hpp"
#include "crdp/prob.hpp"

namespace crdp {

// Output marginal collapsed to zero mass somewhere it must not; the slope or
// the starting point makes the fixed-point map degenerate.
class DegenerateMarginalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  double slope = 0.0;          // s <= 0, natural-log units
  HorizonMode mode = HorizonMode::stationary;
  int horizon = -1;            // exact mode only: stages 0..horizon
  double tol = 1e-11;          // sup-norm change in output marginals
  int max_iter = 5000;
  double damping = 0.0;        // 0 = plain update, in [0,1)
};

// One point on the rate-distortion curve. Rates are per-letter bits;
// distortion is the per-letter average (total cost / number of stages).
struct RdPoint {
  double s = 0.0;
  double distortion = 0.0;
  double rate = 0.0;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
};

// Output-marginal family M_i(y_i | y^{i-1}). Stationary mode keeps a single
// unconditional marginal in stage[0] (one row). Exact mode keeps one kernel
// per stage with |Y|^i rows.
struct OutputMarginalFamily {
  HorizonMode mode = HorizonMode::stationary;
  int y_size = 0;
  std::vector<StochasticKernel> stage;

  static OutputMarginalFamily uniform_exact(int y_size, int horizon);
  static OutputMarginalFamily uniform_stationary(int y_size);
};

// Backward value table g_i(x^i, y^i), flat index x_hist * |Y|^{i+1} + y_hist.
// Terminal stage is identically zero and is stored explicitly.
struct GTable {
  std::vector<std::vector<double>> stage;
};

struct SolveResult {
  RdPoint point;
  CausalPolicy policy;
  OutputMarginalFamily marginals;
};

struct EvalResult {
  double distortion = 0.0;      // per-letter
  double rate = 0.0;            // per-letter, bits (exact mutual information)
  double rate_closed_form = 0.0;  // per-letter, bits, via s*D - E[g0] - E[log Z]
};

// Backward recursion for the tail-cost table at slope s given the output
// marginal family. Exact mode only; the terminal stage is zero.
GTable backward_g(const MarkovSource& source, const StageCost& cost,
                  const OutputMarginalFamily& marginals, double s, int horizon);

// Stage minimizer K_i(y | y^{i-1}, x^i) proportional to
// M_i(y | y^{i-1}) * exp(s * rho_i - g_i). Exact mode.
StochasticKernel optimal_stage_kernel(const StageCost& cost,
                                      const OutputMarginalFamily& marginals,
                                      const GTable& g, double s, int stage);

// Marginals induced by a policy under the source law: exact mode returns the
// family M_i(y_i | y^{i-1}); stationary mode returns the single-row marginal
// of Y under the stationary window law.
OutputMarginalFamily update_output_marginals(const MarkovSource& source,
                                             const CausalPolicy& policy);

// Alternating minimization of the Lagrangian at fixed slope. Stationary mode
// reduces to the classical per-letter iteration on the window variable.
SolveResult solve_fixed_point(const MarkovSource& source,
                              const DistortionSpec& dist,
                              const SolverConfig& config);

// Exact per-letter distortion and mutual information of a given policy under
// the source. The closed-form rate uses the supplied slope and the policy's
// induced marginals; at a fixed point it matches the exact rate to near
// round-off.
EvalResult evaluate_policy(const MarkovSource& source,
                           const DistortionSpec& dist,
                           const CausalPolicy& policy, double s);

// Sweep a list of slopes. Points come back sorted by distortion. threads > 1
// distributes slopes round-robin.
std::vector<RdPoint> sweep_curve(const MarkovSource& source,
                                 const DistortionSpec& dist,
                                 SolverConfig base, std::vector<double> slopes,
                                 int threads = 1);

// Outer bisection on the slope to hit a target distortion. Targets at or
// above d_max return the zero-rate point with converged=true.
SolveResult solve_for_target_distortion(const MarkovSource& source,
                                        const DistortionSpec& dist,
                                        SolverConfig base, double d_target,
                                        double d_tol = 1e-9);

}  // namespace crdp
