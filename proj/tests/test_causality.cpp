#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "crdp/binary_analytic.hpp"
#include "crdp/causality.hpp"
#include "crdp/solver.hpp"

using namespace crdp;

namespace {

const MarkovSource kSource = binary_markov_source(0.55, 0.45);
const DistortionSpec kDist = consecutive_ones_distortion();

// Horizon-1 joint in which both reconstructions copy the *second* source
// symbol: y_0 depends on the future, so the dependence test must fire.
JointTable lookahead_joint(const MarkovSource& source) {
  std::vector<double> flat(16, 0.0);
  for (int x0 = 0; x0 < 2; ++x0) {
    for (int x1 = 0; x1 < 2; ++x1) {
      const double p =
          source.initial[x0] * source.transition(x0, x1);
      const int ys = x1 * 2 + x1;
      flat[(x0 * 2 + x1) * 4 + ys] += p;
    }
  }
  return JointTable::from_flat({4, 4}, flat);
}

}  // namespace

TEST_CASE("policy joints carry the source law") {
  const CausalPolicy pol = make_analytic_policy({0.55, 0.45}, 0.2);
  const JointTable j = policy_joint(kSource, pol, 2);
  CHECK(j.mass() == doctest::Approx(1.0).epsilon(1e-12));

  // Marginalizing out the reconstructions recovers the chain law.
  const JointTable xm = j.marginal(std::vector<int>{0});
  for (int x0 = 0; x0 < 2; ++x0) {
    for (int x1 = 0; x1 < 2; ++x1) {
      for (int x2 = 0; x2 < 2; ++x2) {
        const double want = kSource.initial[x0] *
                            kSource.transition(x0, x1) *
                            kSource.transition(x1, x2);
        const long long idx = (x0 * 2 + x1) * 2 + x2;
        CHECK(xm.flat()[idx] == doctest::Approx(want).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("unrolled stationary stages reuse the window kernel verbatim") {
  const CausalPolicy pol = make_analytic_policy({0.55, 0.45}, 0.2);
  const CausalPolicy un = unroll_stationary(kSource, pol, 3);
  REQUIRE(un.mode == HorizonMode::exact);
  REQUIRE(un.stage.size() == 4);

  // From stage >= window depth onward, each row is the window row bitwise.
  for (int i = 1; i <= 3; ++i) {
    const StochasticKernel& k = un.stage[i];
    const long long xs = ipow(2, i + 1);
    const long long ys = ipow(2, i);
    for (long long yh = 0; yh < ys; ++yh) {
      for (long long xh = 0; xh < xs; ++xh) {
        const int w = static_cast<int>(xh % 4);  // (x_i, x_{i-1})
        for (int y = 0; y < 2; ++y) {
          CHECK(k(yh * xs + xh, y) == pol.stage[0](w, y));
        }
      }
    }
  }
}

TEST_CASE("solver outputs pass the dependence test") {
  SolverConfig cfg;
  cfg.slope = std::log(0.25);
  cfg.mode = HorizonMode::exact;
  cfg.horizon = 2;
  const SolveResult r = solve_fixed_point(kSource, kDist, cfg);
  REQUIRE(r.point.converged);

  const CausalityReport rep = check_causality(kSource, r.policy);
  CHECK(rep.causal);
  CHECK(rep.max_cmi_bits < 1e-10);
  CHECK(rep.cmi_bits.size() == 2);  // stages 0 and 1 look ahead; 2 cannot

  const CausalPolicy pol = make_analytic_policy({0.55, 0.45}, 0.2);
  const CausalityReport rep2 = check_causality(kSource, pol, 3);
  CHECK(rep2.causal);
  CHECK(rep2.max_cmi_bits < 1e-10);
}

TEST_CASE("source-independent reconstructions are trivially causal") {
  CausalPolicy blind;
  blind.mode = HorizonMode::stationary;
  blind.x_size = 2;
  blind.y_size = 2;
  blind.x_window = 0;
  blind.stage.push_back(
      StochasticKernel::from_rows({{0.3, 0.7}, {0.3, 0.7}}));
  const CausalityReport rep = check_causality(kSource, blind, 2);
  CHECK(rep.causal);
  CHECK(rep.max_cmi_bits < 1e-12);
}

TEST_CASE("lookahead joints are rejected") {
  const JointTable j = lookahead_joint(kSource);
  const CausalityReport rep = check_causality(j, 2, 2);
  CHECK_FALSE(rep.causal);
  // y_0 reveals x_1 given x_0: the leak is the full conditional entropy.
  double leak = 0.0;
  for (int x0 = 0; x0 < 2; ++x0) {
    double h = 0.0;
    for (int x1 = 0; x1 < 2; ++x1) {
      const double t = kSource.transition(x0, x1);
      if (t > 0.0) h -= t * std::log2(t);
    }
    leak += kSource.initial[x0] * h;
  }
  CHECK(rep.max_cmi_bits == doctest::Approx(leak).epsilon(1e-9));
  CHECK(rep.max_cmi_bits > 0.9);  // near one bit for this chain
}
