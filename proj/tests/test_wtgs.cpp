#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "bvs/estimators.hpp"
#include "bvs/oracle.hpp"
#include "bvs/pg_chain.hpp"
#include "bvs/rng.hpp"
#include "bvs/wtgs.hpp"
#include "testutil.hpp"

using namespace bvs;

namespace {

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const int n = static_cast<int>(a.size());
  auto ranks = [n](const std::vector<double>& v) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return v[x] < v[y]; });
    std::vector<double> r(n);
    for (int k = 0; k < n; ++k) r[order[k]] = k;
    return r;
  };
  const std::vector<double> ra = ranks(a), rb = ranks(b);
  double d2 = 0.0;
  for (int k = 0; k < n; ++k) d2 += (ra[k] - rb[k]) * (ra[k] - rb[k]);
  return 1.0 - 6.0 * d2 / (n * (static_cast<double>(n) * n - 1.0));
}

}  // namespace

TEST_SUITE("wtgs") {

TEST_CASE("eta and the selection weights follow the chain flavor") {
  CHECK(eta(0.3, 5.0, 10) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(eta(0.0, 2.0, 4) == doctest::Approx(0.5).epsilon(1e-14));

  // excluded coordinate: p_tilde = 1 - p
  CHECK(selection_weight(0.3, false, 5.0, 10, Variant::Wtgs) ==
        doctest::Approx(0.5 * 0.8 / 0.7).epsilon(1e-14));
  // included coordinate: p_tilde = p
  CHECK(selection_weight(0.3, true, 5.0, 10, Variant::Wtgs) ==
        doctest::Approx(0.5 * 0.8 / 0.3).epsilon(1e-14));
  CHECK(selection_weight(0.3, false, 5.0, 10, Variant::Tgs) ==
        doctest::Approx(0.5 / 0.7).epsilon(1e-14));
  CHECK(selection_weight(0.3, true, 5.0, 10, Variant::Wgs) ==
        doctest::Approx(0.8).epsilon(1e-14));
}

TEST_CASE("phi matches a hand sum and floors at epsilon over two") {
  const double eps = 5.0;
  GammaState g = testutil::gamma_of(2, {0});
  const std::vector<double> pips = {0.2, 0.6};
  // coordinate 0 included, coordinate 1 excluded
  const double expected =
      0.5 * (0.2 + eps / 2.0) / 0.2 + 0.5 * (0.6 + eps / 2.0) / 0.4;
  CHECK(phi_linear(pips, g, eps) == doctest::Approx(expected).epsilon(1e-14));

  // Every per-coordinate term is at least eta / 2 >= (eps / P) / 2, so the
  // total never drops below eps / 2 and unnormalized weights stay below
  // 2 / eps no matter the state.
  Rng rng(91);
  for (int rep = 0; rep < 200; ++rep) {
    const int P = 1 + static_cast<int>(rng.uniform_int(12));
    std::vector<double> ps(static_cast<std::size_t>(P));
    GammaState gg(P);
    for (int j = 0; j < P; ++j) {
      ps[static_cast<std::size_t>(j)] = rng.uniform();
      if (rng.bernoulli(0.5)) gg.flip(j);
    }
    const double phi = phi_linear(ps, gg, eps);
    CHECK(phi >= eps / 2.0);
    CHECK(1.0 / phi <= 2.0 / eps);
  }
}

TEST_CASE("coordinate draws follow the selection weights") {
  const double eps = 2.0;
  GammaState g = testutil::gamma_of(4, {1});
  const std::vector<double> pips = {0.1, 0.7, 0.5, 0.9};
  std::vector<double> w(4);
  double total = 0.0;
  for (int j = 0; j < 4; ++j) {
    w[static_cast<std::size_t>(j)] =
        selection_weight(pips[static_cast<std::size_t>(j)], g.bit(j), eps, 4,
                         Variant::Wtgs);
    total += w[static_cast<std::size_t>(j)];
  }

  Rng rng(17);
  const int draws = 1000000;
  std::vector<int> count(4, 0);
  for (int t = 0; t < draws; ++t)
    ++count[static_cast<std::size_t>(sample_i_linear(pips, g, eps, rng))];
  for (int j = 0; j < 4; ++j) {
    const double p = w[static_cast<std::size_t>(j)] / total;
    const double se = std::sqrt(p * (1.0 - p) / draws);
    CHECK(std::fabs(count[static_cast<std::size_t>(j)] / double(draws) - p) <=
          4.0 * se);
  }
}

TEST_CASE("a near-certain conditional dominates the draw") {
  // An included coordinate whose conditional probability is pinned at the
  // floor has p_tilde ~ 1e-12, so its tempered weight dwarfs the rest.
  GammaState g = testutil::gamma_of(3, {0});
  const std::vector<double> pips = {1e-13, 0.5, 0.5};
  Rng rng(3);
  for (int t = 0; t < 100; ++t) CHECK(sample_i_linear(pips, g, 5.0, rng) == 0);
}

TEST_CASE("average selection mass ranks coordinates like the inclusion odds") {
  const Dataset data = testutil::linear_data(101, 60, 10,
                                             {{0, 1.0}, {3, 0.6}, {7, -0.8}}, 0.5);
  const double h = 0.1, tau = 1e-4, eps = 5.0;
  const ExactPosterior post = enumerate_linear(data, h, tau);
  const int P = data.p();

  // Posterior-averaged selection mass of each coordinate, straight off the
  // enumeration table.
  std::vector<double> meanMass(static_cast<std::size_t>(P), 0.0);
  std::vector<double> target(static_cast<std::size_t>(P));
  for (std::uint32_t mask = 0; mask < (1u << P); ++mask) {
    const double prob = std::exp(post.modelLogProbs[mask]);
    for (int i = 0; i < P; ++i) {
      const double cp = post.conditional_pip(mask, i);
      meanMass[static_cast<std::size_t>(i)] +=
          prob * selection_weight(cp, (mask >> i) & 1u, eps, P, Variant::Wtgs);
    }
  }
  for (int i = 0; i < P; ++i)
    target[static_cast<std::size_t>(i)] = post.pips(i) + eps / P;

  CHECK(spearman(meanMass, target) > 0.9);
}

TEST_CASE("the weighted chain reproduces the enumerated posterior") {
  const Dataset data = testutil::linear_data(202, 50, 10,
                                             {{0, 1.0}, {3, 0.6}, {7, -0.8}}, 0.5);
  SamplerConfig cfg;
  cfg.h = 0.1;
  cfg.tau = 1e-4;
  cfg.epsilon = 5.0;
  cfg.iterations = 16000;
  cfg.burnIn = 1000;

  Rng rng(7);
  const LinearChainOutput out = wtgs_run(data, cfg, rng);
  const ExactPosterior post = enumerate_linear(data, *cfg.h, cfg.tau);

  double worstRb = 0.0, worstRaw = 0.0;
  const Eigen::VectorXd raw = out.acc.pip_raw();
  for (int j = 0; j < 10; ++j) {
    worstRb = std::max(worstRb, std::fabs(out.pipRB(j) - post.pips(j)));
    worstRaw = std::max(worstRaw, std::fabs(raw(j) - post.pips(j)));
  }
  CHECK(worstRb <= 0.025);
  CHECK(worstRaw <= 0.06);

  // hard weight bound, checked sample by sample
  for (const WeightedSample& s : out.samples)
    CHECK(s.weight <= 2.0 / cfg.epsilon + 1e-12);
  CHECK(out.weightVariance < 10.0);
  CHECK(out.samples.size() == static_cast<std::size_t>(cfg.iterations - cfg.burnIn));

  // the trace and the streaming accumulator describe the same chain
  const Eigen::VectorXd rawTrace = pip_raw(out.samples, 10);
  for (int j = 0; j < 10; ++j)
    CHECK(raw(j) == doctest::Approx(rawTrace(j)).epsilon(1e-12));

  // model-averaged coefficients keep the planted signs
  CHECK(out.betaMean(0) > 0.5);
  CHECK(out.betaMean(3) > 0.2);
  CHECK(out.betaMean(7) < -0.3);
}

TEST_CASE("a one-sample run keeps exactly one normalized weight") {
  const Dataset data = testutil::linear_data(5, 20, 4, {{1, 1.0}}, 0.5);
  SamplerConfig cfg;
  cfg.h = 0.2;
  cfg.tau = 0.01;
  cfg.iterations = 51;
  cfg.burnIn = 50;
  Rng rng(1);
  const LinearChainOutput out = wtgs_run(data, cfg, rng);
  REQUIRE(out.samples.size() == 1);
  const std::vector<double> w = normalize_weights(out.samples);
  CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("pure noise keeps every inclusion probability small") {
  Rng gen(404);
  Dataset data;
  data.kind = Likelihood::Linear;
  data.X = testutil::random_design(gen, 80, 20);
  data.Y.resize(80);
  for (int n = 0; n < 80; ++n) data.Y(n) = gen.normal();

  SamplerConfig cfg;
  cfg.h = 0.1;
  cfg.tau = 0.01;
  cfg.iterations = 6000;
  cfg.burnIn = 1000;
  Rng rng(2);
  const LinearChainOutput out = wtgs_run(data, cfg, rng);
  for (int j = 0; j < 20; ++j) CHECK(out.pipRB(j) < 0.2);
}

TEST_CASE("the plain tempered flavor agrees with enumeration") {
  const Dataset data = testutil::linear_data(33, 40, 5, {{2, 1.2}}, 0.5);
  SamplerConfig cfg;
  cfg.h = 0.2;
  cfg.tau = 0.01;
  cfg.variant = Variant::Tgs;
  cfg.iterations = 30000;
  cfg.burnIn = 2000;
  Rng rng(11);
  const LinearChainOutput out = wtgs_run(data, cfg, rng);
  const ExactPosterior post = enumerate_linear(data, *cfg.h, cfg.tau);
  for (int j = 0; j < 5; ++j)
    CHECK(std::fabs(out.pipRB(j) - post.pips(j)) <= 0.05);
}

TEST_CASE("the untempered flavor agrees with enumeration") {
  const Dataset data = testutil::linear_data(33, 40, 5, {{2, 1.2}}, 0.5);
  SamplerConfig cfg;
  cfg.h = 0.2;
  cfg.tau = 0.01;
  cfg.variant = Variant::Wgs;
  cfg.iterations = 30000;
  cfg.burnIn = 2000;
  Rng rng(12);
  const LinearChainOutput out = wtgs_run(data, cfg, rng);
  const ExactPosterior post = enumerate_linear(data, *cfg.h, cfg.tau);
  for (int j = 0; j < 5; ++j)
    CHECK(std::fabs(out.pipRB(j) - post.pips(j)) <= 0.05);
}

TEST_CASE("h inference matches the enumerated beta-binomial posterior") {
  const Dataset data = testutil::linear_data(909, 50, 8, {{1, 1.5}, {5, -1.0}}, 0.5);
  SamplerConfig cfg;
  cfg.hBeta = BetaPrior{1.0, 9.0};
  cfg.tau = 0.01;
  cfg.iterations = 25000;
  cfg.burnIn = 3000;

  Rng rng(21);
  const LinearChainOutput out = wtgs_run_infer_h(data, cfg, rng);
  const ExactPosterior post =
      enumerate_linear(data, 0.0, cfg.tau, false, -1.0, &*cfg.hBeta);

  for (int j = 0; j < 8; ++j)
    CHECK(std::fabs(out.pipRB(j) - post.pips(j)) <= 0.03);

  REQUIRE(out.hDraws.size() == out.samples.size());
  // Weighted posterior mean of h: the chain spends nearly all its mass at
  // |gamma| = 2, whose conditional is Beta(3, 15) with mean 1/6.
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < out.hDraws.size(); ++t) {
    num += out.samples[t].weight * out.hDraws[t];
    den += out.samples[t].weight;
  }
  const double hMean = num / den;
  CHECK(hMean > 0.08);
  CHECK(hMean < 0.25);

  CHECK(out.xiFinal > 0.0);
  // xi adaptation drives the h-refresh visit rate toward fOmega
  CHECK(std::fabs(out.untemperedFraction - cfg.fOmega) <= 0.07);
}

TEST_CASE("a fixed untempered mass sets the refresh visit rate") {
  // With an enormous prior precision every Bayes factor collapses to one, and
  // a tight symmetric Beta prior pins h near one half, so every conditional
  // probability sits at 0.5. The plain tempered weights are then exactly one
  // per coordinate and the refresh slot is visited with odds xi : 1.
  const Dataset data = testutil::linear_data(55, 20, 10, {}, 1.0);
  SamplerConfig cfg;
  cfg.hBeta = BetaPrior{5000.0, 5000.0};
  cfg.tau = 1e9;
  cfg.xi = 2.0;
  cfg.variant = Variant::Tgs;
  cfg.iterations = 40000;
  cfg.burnIn = 2000;

  Rng rng(5);
  const LinearChainOutput out = wtgs_run_infer_h(data, cfg, rng);
  CHECK(out.xiFinal == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(std::fabs(out.untemperedFraction - 2.0 / 3.0) <= 0.015);
}

}  // TEST_SUITE
