#include "crdp/binary_analytic.hpp"

#include <cmath>
#include <stdexcept>

namespace crdp {

namespace {

void check_params(const BinaryExampleParams& params) {
  if (!(params.p > 0.0 && params.p < 1.0 && params.q > 0.0 && params.q < 1.0))
    throw std::invalid_argument("binary example: need 0 < p, q < 1");
}

}  // namespace

double indicator_mass(const BinaryExampleParams& params) {
  check_params(params);
  // Steady pair weight of (x_i, x_{i-1}) = (1, 1).
  return params.p * (1.0 - params.q) / (params.p + params.q);
}

double analytic_dmax(const BinaryExampleParams& params) {
  const double w = indicator_mass(params);
  return std::min(w, 1.0 - w);
}

double analytic_rdf(const BinaryExampleParams& params, double d) {
  const double w = indicator_mass(params);
  if (d <= 0.0) return binary_entropy(w);
  if (d >= analytic_dmax(params)) return 0.0;
  return binary_entropy(w) - binary_entropy(d);
}

AnalyticKernel analytic_kernel(const BinaryExampleParams& params, double d) {
  const double w = indicator_mass(params);
  if (std::abs(1.0 - 2.0 * d) < 1e-12)
    throw std::domain_error("analytic_kernel: closed forms are singular at d = 1/2");

  // Reverse-channel construction: the flagged bit passes through a symmetric
  // d-flip, so the output marginal solves P(y=1) = (w - d) / (1 - 2d), and
  // the forward kernel entries follow from one application of Bayes' rule.
  AnalyticKernel k;
  k.d = d;
  k.gamma = 1.0 - (w - d) / (1.0 - 2.0 * d);
  k.alpha = k.gamma * (1.0 - d) / (1.0 - w);
  k.beta = (1.0 - k.gamma) * (1.0 - d) / w;

  auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
  k.within_validity =
      d > 0.0 && d < analytic_dmax(params) && in01(k.alpha) && in01(k.beta) && in01(k.gamma);
  return k;
}

DistortionSpec consecutive_ones_distortion() {
  // Row order over (x_i, x_{i-1}): 00, 01, 10, 11; columns y = 0, 1.
  return DistortionSpec(2, 2, 1, 0, {0, 1, 0, 1, 0, 1, 1, 0});
}

CausalPolicy make_analytic_policy(const BinaryExampleParams& params, double d) {
  const AnalyticKernel k = analytic_kernel(params, d);
  if (!k.within_validity)
    throw std::domain_error("make_analytic_policy: kernel leaves the simplex at this level");

  CausalPolicy policy;
  policy.mode = HorizonMode::stationary;
  policy.x_size = 2;
  policy.y_size = 2;
  policy.x_window = 1;
  policy.horizon = -1;
  StochasticKernel K(4, 2);
  const std::vector<double> off = {k.alpha, 1.0 - k.alpha};
  const std::vector<double> on = {1.0 - k.beta, k.beta};
  for (long long w = 0; w < 3; ++w) K.set_row(w, off);
  K.set_row(3, on);
  policy.stage.push_back(std::move(K));
  return policy;
}

}  // namespace crdp
