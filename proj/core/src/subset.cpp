#include "bvs/subset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bvs/mll.hpp"
#include "bvs/util.hpp"
#include "chain_util.hpp"

namespace bvs {

double u_ratio(int groundSize, int S, int A, bool iInAnchor) {
  if (iInAnchor) return 1.0;
  return static_cast<double>(groundSize - A) / static_cast<double>(S - A);
}

void sample_subset_into(int i, std::span<const int> anchor, int P, int S, Rng& rng,
                        std::vector<std::uint32_t>& stamp, std::uint32_t& clock,
                        std::vector<int>& out) {
  if (stamp.size() < static_cast<std::size_t>(P))
    stamp.assign(static_cast<std::size_t>(P), 0);
  ++clock;
  if (clock == 0) {  // wrapped; every stale stamp would read as current
    std::fill(stamp.begin(), stamp.end(), 0);
    clock = 1;
  }

  out.clear();
  for (int a : anchor) {
    stamp[static_cast<std::size_t>(a)] = clock;
    out.push_back(a);
  }
  if (i >= 0 && stamp[static_cast<std::size_t>(i)] != clock) {
    stamp[static_cast<std::size_t>(i)] = clock;
    out.push_back(i);
  }
  const int pinned = static_cast<int>(out.size());
  int need = S - pinned;
  if (need < 0)
    throw ConfigError("subset size is smaller than the pinned anchor and index");
  const int pool = P - pinned;

  if (need <= pool - need) {
    // Rejection fill: cheap while the subset is small relative to P.
    while (need > 0) {
      const int j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(P)));
      if (stamp[static_cast<std::size_t>(j)] == clock) continue;
      stamp[static_cast<std::size_t>(j)] = clock;
      out.push_back(j);
      --need;
    }
    std::sort(out.begin(), out.end());
    return;
  }

  // Dense subsets: draw the complement instead (uniform either way), then
  // collect survivors in one ascending pass.
  std::vector<int> excluded;
  int drop = pool - need;
  excluded.reserve(static_cast<std::size_t>(drop));
  while (drop > 0) {
    const int j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(P)));
    if (stamp[static_cast<std::size_t>(j)] == clock) continue;
    stamp[static_cast<std::size_t>(j)] = clock;
    excluded.push_back(j);
    --drop;
  }
  // Pinned indices were stamped before the exclusion draw, so they always
  // survive the scan.
  std::sort(excluded.begin(), excluded.end());
  out.clear();
  std::size_t pe = 0;
  for (int j = 0; j < P; ++j) {
    if (pe < excluded.size() && excluded[pe] == j) {
      ++pe;
      continue;
    }
    out.push_back(j);
  }
}

std::vector<int> sample_subset(int i, std::span<const int> anchor, int P, int S,
                               Rng& rng) {
  std::vector<std::uint32_t> stamp;
  std::uint32_t clock = 0;
  std::vector<int> out;
  sample_subset_into(i, anchor, P, S, rng, stamp, clock, out);
  return out;
}

double phi_subset(std::span<const double> condPips, const GammaState& gamma,
                  double epsilon, const SubsetState& st, Variant variant) {
  const int P = gamma.p();
  double s = 0.0;
  for (std::size_t k = 0; k < st.subset.size(); ++k) {
    const int j = st.subset[k];
    const bool anchored =
        std::binary_search(st.anchor.begin(), st.anchor.end(), j);
    const double u = anchored ? 1.0 : st.ratioInOut;
    s += u * selection_weight(condPips[k], gamma.bit(j), epsilon, P, variant);
  }
  return s;
}

std::vector<int> adapt_anchor(std::span<const double> runningPips, int A, long t,
                              long burnIn) {
  if (t >= burnIn)
    throw ConfigError("anchor adaptation is restricted to burn-in");
  const int P = static_cast<int>(runningPips.size());
  std::vector<int> order(static_cast<std::size_t>(P));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double pa = runningPips[static_cast<std::size_t>(a)];
    const double pb = runningPips[static_cast<std::size_t>(b)];
    if (pa != pb) return pa > pb;
    return a < b;
  });
  order.resize(static_cast<std::size_t>(std::min(A, P)));
  std::sort(order.begin(), order.end());
  return order;
}

LinearChainOutput subset_wtgs_run(const Dataset& data, const SamplerConfig& config,
                                  Rng& rng) {
  validate(data, config);
  if (data.kind != Likelihood::Linear)
    throw ConfigError("subset_wtgs_run drives the linear likelihood");
  if (!config.subsetSize)
    throw ConfigError("subset_wtgs_run needs a subset size; use wtgs_run");
  if (!config.h) throw ConfigError("the linear subset chain needs a fixed h");

  const int P = data.p();
  const int S = *config.subsetSize;
  const int A = config.anchorSize;
  const double h = *config.h;
  const double eps = config.epsilon;

  SubsetState sub;
  sub.S = S;
  sub.A = A;
  sub.ratioInOut = u_ratio(P, S, A, /*iInAnchor=*/false);
  sub.anchor = detail::top_correlated(data, A);

  PipEngine engine(data, config.tau, config.tau_bias(), config.includeBiasLinear,
                   config.precomputeGram);
  engine.set_augmentation(nullptr, 1.0);

  ChainState st;
  st.gamma = GammaState(P);
  st.h = h;
  engine.rebuild(st.gamma);

  std::vector<std::uint32_t> stamp;
  std::uint32_t clock = 0;
  st.sel = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(P)));
  sample_subset_into(st.sel, sub.anchor, P, S, rng, stamp, clock, sub.subset);

  std::vector<double> logbf(static_cast<std::size_t>(S));
  std::vector<double> pips(static_cast<std::size_t>(S));
  std::vector<double> selw(static_cast<std::size_t>(S));

  auto sweep_subset = [&]() {
    engine.log_bayes_factors(sub.subset, logbf);
    detail::pips_from_logbf(logbf, h, pips);
  };
  auto refresh_selw = [&]() {
    double total = 0.0;
    for (std::size_t k = 0; k < sub.subset.size(); ++k) {
      const int j = sub.subset[k];
      const bool anchored =
          std::binary_search(sub.anchor.begin(), sub.anchor.end(), j);
      const double u = anchored ? 1.0 : sub.ratioInOut;
      selw[k] = u * selection_weight(pips[k], st.gamma.bit(j), eps, P, config.variant);
      total += selw[k];
    }
    return total;
  };

  sweep_subset();
  double total = refresh_selw();

  detail::SampleRecorder rec(P, /*storeSweep=*/true);
  WeightedAccumulator burnAcc(P);  // adaptation-only running estimates
  const bool adapting = A > 0 && config.burnIn > 0;

  for (st.t = 0; st.t < config.iterations; ++st.t) {
    const int k = rng.categorical(selw, total);
    st.sel = sub.subset[static_cast<std::size_t>(k)];
    st.gamma.flip(st.sel);

    // The anchor tracks the running inclusion estimates on a fixed burn-in
    // schedule; refreshing it before the resample keeps anchor members inside
    // the new subset by construction.
    if (adapting && st.t < config.burnIn &&
        ((st.t + 1) % 100 == 0 || st.t + 1 == config.burnIn) && burnAcc.count() > 0) {
      const Eigen::VectorXd run = burnAcc.pip_partial_rb();
      sub.anchor = adapt_anchor(std::span<const double>(run.data(),
                                                        static_cast<std::size_t>(P)),
                                A, st.t, config.burnIn);
    }

    sample_subset_into(st.sel, sub.anchor, P, S, rng, stamp, clock, sub.subset);
    engine.rebuild(st.gamma);
    sweep_subset();
    total = refresh_selw();

    st.rhoTilde = 1.0 / total;  // phi at the new (gamma, subset)
    if (st.t >= config.burnIn)
      rec.record(engine, st.rhoTilde, st.gamma, sub.subset, pips);
    else
      burnAcc.add(st.rhoTilde, st.gamma.active(), sub.subset, pips);
  }

  LinearChainOutput out(P);
  out.samples = std::move(rec.samples);
  out.acc = std::move(rec.acc);
  out.pipRB = out.acc.pip_partial_rb();
  out.betaMean = out.acc.beta_model_averaged();
  out.weightVariance = out.acc.weight_variance();
  out.anchorFinal = sub.anchor;
  return out;
}

}  // namespace bvs
