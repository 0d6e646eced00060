#pragma once

#include <vector>

#include "crdp/policy.hpp"
#include "crdp/prob.hpp"

namespace crdp {

// Result of testing whether reconstructions depend on future source symbols.
// Stage entry i is the conditional mutual information, in bits, between the
// reconstructions up to stage i and the source symbols after stage i, given
// the source symbols up to stage i. All entries below the threshold means the
// joint could have been produced by a causal system.
struct CausalityReport {
  std::vector<double> cmi_bits;
  double max_cmi_bits = 0.0;
  double threshold_bits = 1e-10;
  bool causal = true;
};

// Rewrites a time-invariant windowed policy as per-stage full-history
// kernels over a finite horizon. Stages whose window would reach before the
// first symbol average the kernel over the reversed-chain prehistory, the
// same convention the per-stage cost uses.
CausalPolicy unroll_stationary(const MarkovSource& source, const CausalPolicy& policy,
                               int horizon);

// Joint law over (source string, reconstruction string) induced by driving
// the policy with the source; dims {|X|^(n+1), |Y|^(n+1)}, strings encoded
// with stage 0 most significant. Stationary policies are unrolled first.
JointTable policy_joint(const MarkovSource& source, const CausalPolicy& policy,
                        int horizon = -1);

// Check an explicit joint; alphabet sizes recover the string lengths.
CausalityReport check_causality(const JointTable& joint, int x_size, int y_size,
                                double threshold_bits = 1e-10);

// Convenience: build the joint for a policy and check it. Stationary
// policies need an explicit horizon; exact policies use their own.
CausalityReport check_causality(const MarkovSource& source, const CausalPolicy& policy,
                                int horizon = -1, double threshold_bits = 1e-10);

}  // namespace crdp
