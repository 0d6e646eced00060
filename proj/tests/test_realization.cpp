#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "crdp/realization.hpp"
#include "crdp/solver.hpp"

using namespace crdp;

namespace {

const MarkovSource kSource = binary_markov_source(0.55, 0.45);

CausalPolicy copy_policy() {
  CausalPolicy pol;
  pol.mode = HorizonMode::stationary;
  pol.x_size = 2;
  pol.y_size = 2;
  pol.x_window = 0;
  pol.stage.push_back(StochasticKernel::from_rows({{1.0, 0.0}, {0.0, 1.0}}));
  return pol;
}

}  // namespace

TEST_CASE("identity cascades replay their policy without error") {
  const CausalPolicy windowed = make_analytic_policy({0.55, 0.45}, 0.2);
  const RealizationSpec ident = identity_realization(windowed);
  const RealizationReport rep =
      verify_realization(kSource, windowed, ident, 5);
  CHECK(rep.stage_tv.size() == 6);
  CHECK(rep.max_tv == 0.0);  // exact: both sides accumulate identically

  const CausalPolicy copy = copy_policy();
  const RealizationReport rep2 =
      verify_realization(kSource, copy, identity_realization(copy), 6);
  CHECK(rep2.max_tv == 0.0);
}

TEST_CASE("flag-and-flip cascade induces the closed-form kernel") {
  const BinaryExampleParams special{0.5, 0.25};
  const MarkovSource source = binary_markov_source(special.p, special.q);
  const CausalPolicy pol = make_analytic_policy(special, 0.2);
  const RealizationSpec real = bsc_realization(special, 0.2);
  const RealizationReport rep = verify_realization(source, pol, real, 5);
  CHECK(rep.max_tv < 1e-9);

  // Outside the symmetric manifold the construction refuses.
  CHECK_THROWS_AS((void)bsc_realization(BinaryExampleParams{0.55, 0.45}, 0.2),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)bsc_realization(special, 0.5), std::invalid_argument);
}

TEST_CASE("sample paths are seed-deterministic") {
  const RealizationSpec real = bsc_realization({0.5, 0.25}, 0.2);
  const MarkovSource source = binary_markov_source(0.5, 0.25);
  const DistortionSpec dist = consecutive_ones_distortion();
  const Trace a = simulate(source, dist, real, 2000, 7);
  const Trace b = simulate(source, dist, real, 2000, 7);
  CHECK(a.x_prehistory == b.x_prehistory);
  CHECK(a.x == b.x);
  CHECK(a.a == b.a);
  CHECK(a.b == b.b);
  CHECK(a.y == b.y);
  CHECK(a.rho == b.rho);
  CHECK(a.rng_name == "splitmix64");
  CHECK(a.seed == 7);

  const Trace c = simulate(source, dist, real, 2000, 8);
  CHECK(c.x != a.x);
}

TEST_CASE("trace streams satisfy the cascade identities") {
  const BinaryExampleParams special{0.5, 0.25};
  const MarkovSource source = binary_markov_source(special.p, special.q);
  const DistortionSpec dist = consecutive_ones_distortion();
  const RealizationSpec real = bsc_realization(special, 0.2);
  const Trace t = simulate(source, dist, real, 500, 3);
  REQUIRE(t.x.size() == 500);
  REQUIRE(t.x_prehistory.size() >= 1);

  for (std::size_t i = 0; i < t.x.size(); ++i) {
    const int prev = (i == 0) ? t.x_prehistory[0] : t.x[i - 1];
    const int flag = (t.x[i] == 1 && prev == 1) ? 1 : 0;
    CHECK(t.a[i] == flag);          // deterministic encoder
    CHECK(t.y[i] == t.b[i]);        // copy decoder
    const long long w = t.x[i] * 2 + prev;
    CHECK(t.rho[i] == dist.value_flat(w, t.y[i]));
  }
}

TEST_CASE("copy cascade reconstructs the source verbatim") {
  const DistortionSpec hamming(2, 2, 0, 0, {0.0, 1.0, 1.0, 0.0});
  const RealizationSpec real = identity_realization(copy_policy());
  const Trace t = simulate(kSource, hamming, real, 400, 11);
  for (std::size_t i = 0; i < t.x.size(); ++i) {
    CHECK(t.y[i] == t.x[i]);
    CHECK(t.rho[i] == 0.0);
  }
  const EmpiricalStats st = empirical_stats(t, 2);
  CHECK(st.mean_distortion == 0.0);
  CHECK(st.std_err == 0.0);
}

TEST_CASE("empirical summaries from a hand trace") {
  Trace t;
  t.y = {0, 1, 1, 0};
  t.rho = {0.0, 1.0, 0.0, 1.0};
  t.x = t.a = t.b = t.y;
  const EmpiricalStats st = empirical_stats(t, 2);
  CHECK(st.n == 4);
  CHECK(st.mean_distortion == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(st.std_err ==
        doctest::Approx(std::sqrt(1.0 / 3.0) / 2.0).epsilon(1e-12));
  REQUIRE(st.marginal_y.size() == 2);
  CHECK(st.marginal_y[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(st.marginal_y[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("filter collapses to the evidence under a noiseless cascade") {
  const RealizationSpec real = identity_realization(copy_policy());
  CascadeFilter filter(kSource, real);
  const std::vector<int> bs{1, 0, 0, 1, 1};
  for (const int b : bs) {
    const Distribution post = filter.update(b);
    CHECK(post[b] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(entropy(post) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("uninformative channels leave the stationary law in place") {
  RealizationSpec real = identity_realization(copy_policy());
  real.channel.rows = StochasticKernel::from_rows({{0.5, 0.5}, {0.5, 0.5}});
  const Distribution pi = stationary_distribution(kSource);
  CascadeFilter filter(kSource, real);
  for (const int b : {0, 1, 1, 0}) {
    const Distribution post = filter.update(b);
    CHECK(post[0] == doctest::Approx(pi[0]).epsilon(1e-12));
    CHECK(post[1] == doctest::Approx(pi[1]).epsilon(1e-12));
  }
}

TEST_CASE("filter matches a hand-rolled forward recursion") {
  const BinaryExampleParams special{0.5, 0.25};
  const MarkovSource source = binary_markov_source(special.p, special.q);
  const double d = 0.2;
  const RealizationSpec real = bsc_realization(special, d);
  const std::vector<int> bs{1, 0, 1, 1, 0, 0, 1};

  // Forward recursion over the pair state (x_i, x_{i-1}) with the flag
  // likelihood folded in; prior is the stationary pair law.
  const Distribution pi = stationary_distribution(source);
  std::vector<double> p(4, 0.0);
  for (int xp = 0; xp < 2; ++xp)
    for (int xc = 0; xc < 2; ++xc)
      p[xc * 2 + xp] = pi[xp] * source.transition(xp, xc);

  std::vector<std::vector<double>> want;
  bool first = true;
  for (const int b : bs) {
    if (!first) {
      std::vector<double> nx(4, 0.0);
      for (int xp = 0; xp < 2; ++xp)
        for (int xc = 0; xc < 2; ++xc)
          for (int xn = 0; xn < 2; ++xn)
            nx[xn * 2 + xc] += p[xc * 2 + xp] * source.transition(xc, xn);
      p = nx;
    }
    first = false;
    double total = 0.0;
    for (int s = 0; s < 4; ++s) {
      const int flag = (s == 3) ? 1 : 0;
      const double like = (b == flag) ? 1.0 - d : d;
      p[s] *= like;
      total += p[s];
    }
    for (double& v : p) v /= total;
    want.push_back({p[0] + p[1], p[2] + p[3]});  // marginal over x_i
  }

  const std::vector<Distribution> got = bayes_filter(source, real, bs);
  REQUIRE(got.size() == bs.size());
  for (std::size_t i = 0; i < bs.size(); ++i) {
    CHECK(got[i][0] == doctest::Approx(want[i][0]).epsilon(1e-12));
    CHECK(got[i][1] == doctest::Approx(want[i][1]).epsilon(1e-12));
  }
}

TEST_CASE("zero-likelihood evidence raises") {
  RealizationSpec real = identity_realization(copy_policy());
  real.channel.rows = StochasticKernel::from_rows({{1.0, 0.0}, {1.0, 0.0}});
  CascadeFilter filter(kSource, real);
  CHECK_THROWS_AS((void)filter.update(1), ImpossibleEvidenceError);
}
