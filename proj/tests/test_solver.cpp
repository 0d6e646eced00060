#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "crdp/binary_analytic.hpp"
#include "crdp/solver.hpp"

using namespace crdp;

namespace {

const MarkovSource kSource = binary_markov_source(0.55, 0.45);
const DistortionSpec kDist = consecutive_ones_distortion();
const BinaryExampleParams kParams{0.55, 0.45};

SolverConfig stationary_at(double s) {
  SolverConfig cfg;
  cfg.slope = s;
  cfg.mode = HorizonMode::stationary;
  return cfg;
}

}  // namespace

TEST_CASE("zero slope collapses to an independent kernel") {
  const SolveResult r = solve_fixed_point(kSource, kDist, stationary_at(0.0));
  CHECK(r.point.converged);
  CHECK(r.point.iterations <= 5);
  CHECK(r.point.rate == doctest::Approx(0.0).epsilon(1e-12));
  // Uniform start is already a fixed point; every window row equals it.
  for (long long w = 0; w < r.policy.stage[0].rows(); ++w) {
    CHECK(r.policy.stage[0](w, 0) == doctest::Approx(0.5).epsilon(1e-12));
  }
  CHECK(r.point.distortion == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("stationary solve recovers the closed-form kernel") {
  const double s = std::log(0.25);  // level 0.2
  const SolveResult r = solve_fixed_point(kSource, kDist, stationary_at(s));
  REQUIRE(r.point.converged);

  const AnalyticKernel k = analytic_kernel(kParams, 0.2);
  CHECK(r.point.distortion == doctest::Approx(0.2).epsilon(1e-8));
  CHECK(r.point.rate ==
        doctest::Approx(0.16239735061093918).epsilon(1e-8));
  for (int w = 0; w < 3; ++w) {
    CHECK(r.policy.stage[0](w, 0) == doctest::Approx(k.alpha).epsilon(1e-8));
  }
  CHECK(r.policy.stage[0](3, 1) == doctest::Approx(k.beta).epsilon(1e-8));
  CHECK(r.marginals.stage[0](0, 0) == doctest::Approx(k.gamma).epsilon(1e-8));
}

TEST_CASE("target search lands on the matching slope") {
  SolverConfig base = stationary_at(0.0);
  const SolveResult r =
      solve_for_target_distortion(kSource, kDist, base, 0.2);
  REQUIRE(r.point.converged);
  CHECK(r.point.distortion == doctest::Approx(0.2).epsilon(1e-8));
  CHECK(r.point.s == doctest::Approx(std::log(0.25)).epsilon(1e-5));
  CHECK(r.point.rate ==
        doctest::Approx(0.16239735061093918).epsilon(1e-6));
}

TEST_CASE("targets at or beyond the edge return the zero-rate point") {
  SolverConfig base = stationary_at(0.0);
  for (const double d : {0.3025, 0.4, 1.5}) {
    CAPTURE(d);
    const SolveResult r =
        solve_for_target_distortion(kSource, kDist, base, d);
    CHECK(r.point.converged);
    CHECK(r.point.rate == 0.0);
    CHECK(r.point.distortion <= d + 1e-12);
  }
}

TEST_CASE("policy evaluation on hand-built kernels") {
  const MarkovSource plain = binary_markov_source(0.3, 0.3);
  DistortionSpec hamming(2, 2, 0, 0, {0.0, 1.0, 1.0, 0.0});

  CausalPolicy copy;
  copy.mode = HorizonMode::stationary;
  copy.x_size = 2;
  copy.y_size = 2;
  copy.x_window = 0;
  copy.stage.push_back(
      StochasticKernel::from_rows({{1.0, 0.0}, {0.0, 1.0}}));
  const EvalResult ec = evaluate_policy(plain, hamming, copy, -1.0);
  CHECK(ec.distortion == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(ec.rate == doctest::Approx(1.0).epsilon(1e-12));  // symmetric chain

  CausalPolicy blind = copy;
  blind.stage[0] = StochasticKernel::from_rows({{0.5, 0.5}, {0.5, 0.5}});
  const EvalResult eb = evaluate_policy(plain, hamming, blind, -1.0);
  CHECK(eb.rate == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(eb.distortion == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("finite-horizon solve agrees with its own evaluation") {
  for (const int horizon : {1, 2}) {
    CAPTURE(horizon);
    SolverConfig cfg;
    cfg.slope = std::log(0.25);
    cfg.mode = HorizonMode::exact;
    cfg.horizon = horizon;
    const SolveResult r = solve_fixed_point(kSource, kDist, cfg);
    REQUIRE(r.point.converged);

    const EvalResult ev =
        evaluate_policy(kSource, kDist, r.policy, cfg.slope);
    CHECK(r.point.distortion == doctest::Approx(ev.distortion).epsilon(1e-9));
    CHECK(r.point.rate == doctest::Approx(ev.rate).epsilon(1e-9));
    CHECK(ev.rate_closed_form == doctest::Approx(ev.rate).epsilon(1e-8));
  }
}

TEST_CASE("backward table shapes and signs") {
  const StageCost cost(kSource, kDist);
  const OutputMarginalFamily m = OutputMarginalFamily::uniform_exact(2, 2);
  const double s = std::log(0.25);
  const GTable g = backward_g(kSource, cost, m, s, 2);
  REQUIRE(g.stage.size() == 3);
  for (int i = 0; i <= 2; ++i) {
    CHECK(g.stage[i].size() ==
          static_cast<std::size_t>(ipow(2, i + 1) * ipow(2, i + 1)));
  }
  for (const double v : g.stage[2]) CHECK(v == 0.0);
  for (const auto& st : g.stage) {
    for (const double v : st) CHECK(v >= -1e-12);
  }

  // Stage minimizers stay row-stochastic.
  for (int i = 0; i <= 2; ++i) {
    const StochasticKernel k = optimal_stage_kernel(cost, m, g, s, i);
    for (long long row = 0; row < k.rows(); ++row) {
      double sum = 0.0;
      for (int y = 0; y < 2; ++y) sum += k(row, y);
      CHECK(std::fabs(sum - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("sweeps are deterministic across thread counts") {
  std::vector<double> slopes;
  for (const double d : {0.05, 0.1, 0.15, 0.2, 0.25, 0.29}) {
    slopes.push_back(std::log(d / (1.0 - d)));
  }
  SolverConfig base = stationary_at(0.0);
  const auto one = sweep_curve(kSource, kDist, base, slopes, 1);
  const auto two = sweep_curve(kSource, kDist, base, slopes, 2);
  REQUIRE(one.size() == two.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].s == two[i].s);
    CHECK(one[i].distortion == two[i].distortion);
    CHECK(one[i].rate == two[i].rate);
    CHECK(one[i].iterations == two[i].iterations);
    CHECK(one[i].converged == two[i].converged);
  }
  // Sorted by distortion, rates decreasing, each point on the known curve.
  for (std::size_t i = 0; i + 1 < one.size(); ++i) {
    CHECK(one[i].distortion < one[i + 1].distortion);
    CHECK(one[i].rate >= one[i + 1].rate - 1e-12);
  }
  for (const RdPoint& pt : one) {
    CHECK(pt.rate ==
          doctest::Approx(analytic_rdf(kParams, pt.distortion)).epsilon(1e-6));
  }
}

TEST_CASE("iteration budget is honored") {
  SolverConfig cfg = stationary_at(std::log(0.02 / 0.98));
  cfg.max_iter = 1;
  const SolveResult r = solve_fixed_point(kSource, kDist, cfg);
  CHECK_FALSE(r.point.converged);
  CHECK(r.point.iterations == 1);
  CHECK(r.point.residual > cfg.tol);
}
