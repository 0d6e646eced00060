#pragma once

#include <vector>

#include "crdp/prob.hpp"

namespace crdp {

// Two problem shapes share one solver surface. Exact mode carries
// full-history kernels for a finite horizon; stationary mode carries one
// time-invariant per-letter kernel over a bounded source window, with a
// constant output marginal.
enum class HorizonMode { stationary, exact };

// Per-stage reconstruction kernels P(y_i | y^{i-1}, x^i).
//
// Exact mode: stage[i] has rows indexed by y_hist * |X|^{i+1} + x_hist where
// histories are flat base encodings with stage 0 most significant. Stage i
// conditions on (y^{i-1}, x^i) only; later source symbols never enter.
//
// Stationary mode: stage[0] has rows indexed by the source window state
// (x_i, x_{i-1}, ..., x_{i-m}), most recent symbol most significant.
struct CausalPolicy {
  HorizonMode mode = HorizonMode::stationary;
  int x_size = 0;
  int y_size = 0;
  int horizon = -1;   // exact mode: n (stages 0..n)
  int x_window = 0;   // stationary mode: source-side memory m
  std::vector<StochasticKernel> stage;

  long long exact_rows(int i) const { return ipow(y_size, i) * ipow(x_size, i + 1); }
};

void validate_policy(const CausalPolicy& policy);

}  // namespace crdp
