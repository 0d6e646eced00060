#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "crdp/binary_analytic.hpp"
#include "crdp/distortion.hpp"
#include "crdp/policy.hpp"
#include "crdp/prob.hpp"

namespace crdp {

// The filter was fed an observation the model assigns zero probability.
class ImpossibleEvidenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One causal component of an encoder/channel/decoder cascade: a kernel
// P(out_i | in_{i-in_window+1..i}, out_{i-out_window..i-1}). Both window
// tuples are most recent first; the row index is
// in_tuple * out_size^out_window + out_tuple, tuples encoded with the most
// recent symbol most significant.
struct CascadeKernel {
  int in_size = 0;
  int out_size = 0;
  int in_window = 1;   // trailing input symbols, current included
  int out_window = 0;  // trailing own outputs
  StochasticKernel rows;

  long long in_states() const { return ipow(in_size, in_window); }
  long long own_states() const { return ipow(out_size, out_window); }
  long long row_index(std::span<const int> in_recent, std::span<const int> out_recent) const;
};

struct RealizationSpec {
  CascadeKernel encoder;  // source symbols -> code symbols
  CascadeKernel channel;  // code symbols -> received symbols
  CascadeKernel decoder;  // received symbols -> reconstructions
};

void validate_realization(const RealizationSpec& realization, int x_size);

// Sampled run of source plus cascade. Streams are aligned: a[i], b[i], y[i]
// all belong to step i; rho[i] is the per-stage distortion at step i, using
// the sampled prehistory for windows that reach before step 0.
struct Trace {
  std::uint64_t seed = 0;
  std::string rng_name;
  std::vector<int> x_prehistory;  // most recent first: x_{-1}, x_{-2}, ...
  std::vector<int> x, a, b, y;
  std::vector<double> rho;
};

struct EmpiricalStats {
  long long n = 0;
  double mean_distortion = 0.0;
  double std_err = 0.0;  // sample standard deviation over sqrt(n); 0 when n < 2
  std::vector<double> marginal_y;
};

struct RealizationReport {
  std::vector<double> stage_tv;  // worst row total variation per stage
  double max_tv = 0.0;
};

// Cascade that reproduces a windowed policy exactly: copy encoder, the policy
// itself as the channel, copy decoder.
RealizationSpec identity_realization(const CausalPolicy& policy);

// Cascade for the two-state flagged-event family on the symmetric manifold
// (event mass one half): deterministic flag encoder, symmetric d-flip
// channel, copy decoder.
RealizationSpec bsc_realization(const BinaryExampleParams& params, double d);

// Seeded sample path. The draw order is frozen: x_0, then the reversed-chain
// prehistory (most recent first), then warm-up steps (a, b, y each), then per
// main step x (from step 1), a, b, y. Every kernel draw consumes exactly one
// uniform, deterministic rows included.
Trace simulate(const MarkovSource& source, const DistortionSpec& dist,
               const RealizationSpec& realization, long long steps, std::uint64_t seed);

EmpiricalStats empirical_stats(const Trace& trace, int y_size);

// Compare the cascade's induced stage kernels P(y_i | y^{i-1}, x^i) with the
// policy's, on reachable rows, for stages 0..horizon. Components must not
// condition on their own past outputs, and input windows are limited to 2.
RealizationReport verify_realization(const MarkovSource& source, const CausalPolicy& policy,
                                     const RealizationSpec& realization, int horizon);

// Recursive posterior over the composite (source window, code window) state
// given the received stream, for cascades whose encoder and channel do not
// condition on their own past outputs. The prior matches the warm-up
// convention in simulate().
class CascadeFilter {
 public:
  CascadeFilter(const MarkovSource& source, const RealizationSpec& realization);

  // Fold in the next received symbol and return P(x_i | b^i).
  Distribution update(int b);

  Distribution source_posterior() const;
  std::span<const double> state_posterior() const { return post_; }
  long long state_count() const { return static_cast<long long>(post_.size()); }

 private:
  const MarkovSource* source_;
  CascadeKernel enc_, ch_;
  int x_size_, a_size_;
  long long xw_states_, aw_states_;
  bool first_ = true;
  std::vector<double> post_;  // index xw * aw_states_ + aw
  std::vector<double> work_;
};

// Run the filter along a received stream; entry i is P(x_i | b^0..b^i).
std::vector<Distribution> bayes_filter(const MarkovSource& source,
                                       const RealizationSpec& realization,
                                       std::span<const int> received);

}  // namespace crdp
