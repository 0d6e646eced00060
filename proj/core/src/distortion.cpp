#include "crdp/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace crdp {

DistortionSpec::DistortionSpec(int x_size, int y_size, int x_window, int y_window,
                               std::vector<double> table)
    : x_size_(x_size),
      y_size_(y_size),
      x_window_(x_window),
      y_window_(y_window),
      x_states_(ipow(x_size, x_window + 1)),
      y_states_(ipow(y_size, y_window + 1)),
      table_(std::move(table)) {
  if (x_size < 1 || y_size < 1) throw std::invalid_argument("DistortionSpec: bad alphabet size");
  if (x_window < 0 || y_window < 0) throw std::invalid_argument("DistortionSpec: negative window");
  if (static_cast<long long>(table_.size()) != x_states_ * y_states_)
    throw std::invalid_argument("DistortionSpec: table size must be " +
                                std::to_string(x_states_ * y_states_) + ", got " +
                                std::to_string(table_.size()));
  for (double v : table_) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("DistortionSpec: entries must be finite and nonnegative");
  }
}

double DistortionSpec::value(std::span<const int> x_win, std::span<const int> y_win) const {
  if (static_cast<int>(x_win.size()) != x_window_ + 1 ||
      static_cast<int>(y_win.size()) != y_window_ + 1)
    throw std::invalid_argument("DistortionSpec: window arity mismatch");
  long long xi = 0, yi = 0;
  for (int v : x_win) xi = xi * x_size_ + v;
  for (int v : y_win) yi = yi * y_size_ + v;
  return value_flat(xi, yi);
}

double DistortionSpec::max_value() const {
  return *std::max_element(table_.begin(), table_.end());
}

double d_max(const MarkovSource& source, const DistortionSpec& dist) {
  if (source.alphabet.size != dist.x_size())
    throw std::invalid_argument("d_max: alphabet mismatch");
  JointTable w = window_joint(source, dist.x_window());
  auto pw = w.flat();
  double best = std::numeric_limits<double>::infinity();
  for (int y = 0; y < dist.y_size(); ++y) {
    // Constant reconstruction: the y window is (y, y, ..., y).
    long long ywin = 0;
    for (int j = 0; j <= dist.y_window(); ++j) ywin = ywin * dist.y_size() + y;
    double e = 0.0;
    for (long long xw = 0; xw < dist.x_states(); ++xw)
      e += pw[static_cast<std::size_t>(xw)] * dist.value_flat(xw, ywin);
    if (e < best) best = e;  // strict: ties keep the smallest symbol
  }
  return best;
}

StageCost::StageCost(const MarkovSource& source, const DistortionSpec& dist)
    : dist_(&dist), x_size_(dist.x_size()), y_size_(dist.y_size()) {
  if (source.alphabet.size != dist.x_size())
    throw std::invalid_argument("StageCost: alphabet mismatch");
  const int mx = dist.x_window();
  if (mx == 0) return;
  prehist_.resize(static_cast<std::size_t>(mx) + 1);
  for (int k = 1; k <= mx; ++k)
    prehist_[static_cast<std::size_t>(k)] = reversed_prehistory(source, k);
}

double StageCost::rho(int stage, long long x_hist, long long y_hist) const {
  const int mx = dist_->x_window();
  const int my = dist_->y_window();
  const int avail = stage + 1;

  // A history index encodes (x_0 ... x_i) with x_0 most significant, so the
  // most recent symbols are the low digits. Window indices put the most
  // recent symbol in the most significant digit.
  auto window_index = [](long long hist, int base, int want) {
    std::vector<int> sym(static_cast<std::size_t>(want));
    for (int j = 0; j < want; ++j) {
      sym[static_cast<std::size_t>(j)] = static_cast<int>(hist % base);
      hist /= base;
    }
    long long idx = 0;
    for (int j = 0; j < want; ++j) idx = idx * base + sym[static_cast<std::size_t>(j)];
    return idx;
  };

  const int x_have = std::min(mx + 1, avail);
  const int y_have = std::min(my + 1, avail);
  const int x_missing = mx + 1 - x_have;
  const int y_missing = my + 1 - y_have;

  long long x_head = window_index(x_hist, x_size_, x_have);
  long long y_head = window_index(y_hist, y_size_, y_have);

  if (x_missing == 0 && y_missing == 0) return dist_->value_flat(x_head, y_head);

  // x_0 is the most significant digit of the length-`avail` history.
  long long top = x_hist;
  for (int j = 1; j < avail; ++j) top /= x_size_;
  const int x0 = static_cast<int>(top);

  const long long x_tuples = ipow(x_size_, x_missing);
  const long long y_tuples = ipow(y_size_, y_missing);
  const double y_w = 1.0 / static_cast<double>(y_tuples);
  double acc = 0.0;
  for (long long xt = 0; xt < x_tuples; ++xt) {
    double wx = x_missing == 0 ? 1.0 : prehist_[static_cast<std::size_t>(x_missing)](x0, static_cast<int>(xt));
    if (wx == 0.0) continue;
    long long xw = x_head * x_tuples + xt;
    for (long long yt = 0; yt < y_tuples; ++yt) {
      long long yw = y_head * y_tuples + yt;
      acc += wx * y_w * dist_->value_flat(xw, yw);
    }
  }
  return acc;
}

}  // namespace crdp
