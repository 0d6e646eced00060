#pragma once

#include <span>
#include <vector>

#include "crdp/prob.hpp"

namespace crdp {

// Per-stage distortion rho_i(x_i, x_{i-1..i-mx}, y_i, y_{i-1..i-my}) held as a
// dense table. Window tuples are most recent first; the flat index is
// x_window_index * y_states + y_window_index with each window index encoded
// most-significant-first, e.g. for mx=1, my=0 the order is
// d(0,0,y=0), d(0,0,y=1), d(0,1,y=0), ..., d(1,1,y=1).
class DistortionSpec {
 public:
  DistortionSpec(int x_size, int y_size, int x_window, int y_window, std::vector<double> table);

  int x_size() const { return x_size_; }
  int y_size() const { return y_size_; }
  int x_window() const { return x_window_; }
  int y_window() const { return y_window_; }
  long long x_states() const { return x_states_; }
  long long y_states() const { return y_states_; }
  std::span<const double> table() const { return table_; }

  double value_flat(long long x_win, long long y_win) const {
    return table_[static_cast<std::size_t>(x_win * y_states_ + y_win)];
  }
  // Windows most recent first: x_win = (x_i, x_{i-1}, ...).
  double value(std::span<const int> x_win, std::span<const int> y_win) const;

  double max_value() const;

 private:
  int x_size_, y_size_, x_window_, y_window_;
  long long x_states_, y_states_;
  std::vector<double> table_;
};

// Smallest steady-state expected distortion achievable by a constant
// reconstruction; ties broken toward the smallest symbol. Above this level
// the rate of the per-letter problem is zero.
double d_max(const MarkovSource& source, const DistortionSpec& dist);

// Effective per-stage cost over full histories for the finite-horizon
// problem. Stages whose window reaches before stage 0 average the table over
// the virtual prehistory: source side under the stationary backward chain
// given x_0, reconstruction side uniformly. The averaging is exact for the
// optimization because the cost enters the objective linearly in the joint.
class StageCost {
 public:
  StageCost(const MarkovSource& source, const DistortionSpec& dist);

  // Histories are flat base-|X| / base-|Y| encodings with stage 0 most
  // significant; both must have length stage+1.
  double rho(int stage, long long x_hist, long long y_hist) const;

  const DistortionSpec& dist() const { return *dist_; }

 private:
  const DistortionSpec* dist_;
  int x_size_, y_size_;
  // prehist_[k]: rows over x_0, distribution over the k-tuple
  // (x_{-1}, ..., x_{-k}) encoded most-significant-first.
  std::vector<StochasticKernel> prehist_;
};

}  // namespace crdp
