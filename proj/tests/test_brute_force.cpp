#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "crdp/binary_analytic.hpp"
#include "crdp/brute_force.hpp"
#include "crdp/solver.hpp"

using namespace crdp;

TEST_CASE("single letter matches the memoryless closed form") {
  // Symmetric chain => uniform marginal; one-letter curve is 1 - H(d).
  const MarkovSource source = binary_markov_source(0.5, 0.5);
  DistortionSpec hamming(2, 2, 0, 0, {0.0, 1.0, 1.0, 0.0});
  for (const double d : {0.1, 0.25}) {
    CAPTURE(d);
    BruteForceSettings cfg;
    cfg.horizon = 0;
    cfg.d_target = d;
    const BruteForceResult r = brute_force_rdf(source, hamming, cfg);
    CHECK(r.feasible);
    CHECK(r.distortion <= d + 1e-6);
    CHECK(r.rate ==
          doctest::Approx(1.0 - binary_entropy(d)).epsilon(2e-3));
  }
}

TEST_CASE("budgets at the trivial level cost nothing") {
  const MarkovSource source = binary_markov_source(0.55, 0.45);
  const DistortionSpec dist = consecutive_ones_distortion();
  BruteForceSettings cfg;
  cfg.horizon = 1;
  cfg.d_target = 0.6;  // a constant reconstruction already beats this
  const BruteForceResult r = brute_force_rdf(source, dist, cfg);
  CHECK(r.feasible);
  // Stage 0 pays for the unseen pre-history letter even with free rate:
  // the best map still averages p*q/2 = 0.55*0.45/2 over the two stages.
  CHECK(r.min_distortion == doctest::Approx(0.12375).epsilon(1e-9));
  CHECK(r.rate <= 2e-3);
}

TEST_CASE("impossible budgets are flagged") {
  // Every (x, y) pair costs at least 0.2, so no policy can average below it.
  const MarkovSource source = binary_markov_source(0.55, 0.45);
  DistortionSpec dist(2, 2, 0, 0, {0.2, 1.0, 1.0, 0.2});
  BruteForceSettings cfg;
  cfg.horizon = 1;
  cfg.d_target = 0.1;
  const BruteForceResult r = brute_force_rdf(source, dist, cfg);
  CHECK_FALSE(r.feasible);
  CHECK(r.min_distortion == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("exhaustive search agrees with the fixed-point solver") {
  const MarkovSource source = binary_markov_source(0.55, 0.45);
  const DistortionSpec dist = consecutive_ones_distortion();
  const struct {
    int horizon;
    double d;
  } cases[] = {{1, 0.15}, {2, 0.17}};

  for (const auto& c : cases) {
    CAPTURE(c.horizon);
    CAPTURE(c.d);
    SolverConfig base;
    base.mode = HorizonMode::exact;
    base.horizon = c.horizon;
    const SolveResult solver =
        solve_for_target_distortion(source, dist, base, c.d);
    REQUIRE(solver.point.converged);

    BruteForceSettings cfg;
    cfg.horizon = c.horizon;
    cfg.d_target = c.d;
    const BruteForceResult oracle = brute_force_rdf(source, dist, cfg);
    CHECK(oracle.feasible);
    CHECK(std::fabs(oracle.rate - solver.point.rate) <= 1e-3);
  }
}

TEST_CASE("runs are reproducible") {
  const MarkovSource source = binary_markov_source(0.55, 0.45);
  const DistortionSpec dist = consecutive_ones_distortion();
  BruteForceSettings cfg;
  cfg.horizon = 1;
  cfg.d_target = 0.2;
  const BruteForceResult a = brute_force_rdf(source, dist, cfg);
  const BruteForceResult b = brute_force_rdf(source, dist, cfg);
  CHECK(a.rate == b.rate);
  CHECK(a.distortion == b.distortion);
  CHECK(a.evaluations == b.evaluations);
}
