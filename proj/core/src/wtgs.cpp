#include "bvs/wtgs.hpp"

#include <cmath>
#include <numeric>

#include "bvs/mll.hpp"
#include "bvs/pg_chain.hpp"
#include "bvs/util.hpp"
#include "chain_util.hpp"

namespace bvs {

double eta(double condPip, double epsilon, int P) {
  return condPip + epsilon / static_cast<double>(P);
}

double selection_weight(double condPip, bool included, double epsilon, int P,
                        Variant variant) {
  const double p = clamp_pip(condPip);
  const double ptilde = included ? p : 1.0 - p;
  switch (variant) {
    case Variant::Wtgs:
      return 0.5 * eta(p, epsilon, P) / ptilde;
    case Variant::Tgs:
      return 0.5 / ptilde;
    case Variant::Wgs:
      return eta(p, epsilon, P);
  }
  return 0.0;  // unreachable
}

double phi_linear(std::span<const double> condPips, const GammaState& gamma,
                  double epsilon, Variant variant) {
  const int P = gamma.p();
  double s = 0.0;
  for (int j = 0; j < P; ++j)
    s += selection_weight(condPips[static_cast<std::size_t>(j)], gamma.bit(j), epsilon,
                          P, variant);
  return s;
}

int sample_i_linear(std::span<const double> condPips, const GammaState& gamma,
                    double epsilon, Rng& rng, Variant variant) {
  const int P = gamma.p();
  double total = 0.0;
  for (int j = 0; j < P; ++j)
    total += selection_weight(condPips[static_cast<std::size_t>(j)], gamma.bit(j),
                              epsilon, P, variant);
  const double target = rng.uniform() * total;
  double acc = 0.0;
  for (int j = 0; j < P; ++j) {
    acc += selection_weight(condPips[static_cast<std::size_t>(j)], gamma.bit(j),
                            epsilon, P, variant);
    if (target < acc) return j;
  }
  return P - 1;
}

namespace {

// State shared by both linear drivers: engine caches plus the sweep buffers.
struct LinearSweep {
  LinearSweep(const Dataset& data, const SamplerConfig& config)
      : engine(data, config.tau, config.tau_bias(), config.includeBiasLinear,
               config.precomputeGram),
        idxAll(static_cast<std::size_t>(data.p())),
        logbf(idxAll.size()),
        pips(idxAll.size()),
        selw(idxAll.size()) {
    std::iota(idxAll.begin(), idxAll.end(), 0);
    engine.set_augmentation(nullptr, 1.0);
  }

  // Full sweep at the engine's current state.
  void sweep(double h) {
    engine.log_bayes_factors(idxAll, logbf);
    detail::pips_from_logbf(logbf, h, pips);
  }

  // Selection weights (and their sum) for the pips at hand.
  double refresh_selw(const GammaState& gamma, double epsilon, Variant variant) {
    const int P = gamma.p();
    double total = 0.0;
    for (int j = 0; j < P; ++j) {
      const std::size_t k = static_cast<std::size_t>(j);
      selw[k] = selection_weight(pips[k], gamma.bit(j), epsilon, P, variant);
      total += selw[k];
    }
    return total;
  }

  PipEngine engine;
  std::vector<int> idxAll;
  std::vector<double> logbf, pips, selw;
};

}  // namespace

LinearChainOutput wtgs_run(const Dataset& data, const SamplerConfig& config, Rng& rng) {
  validate(data, config);
  if (data.kind != Likelihood::Linear)
    throw ConfigError("wtgs_run drives the linear likelihood; use the count chains");
  if (config.subsetSize)
    throw ConfigError("wtgs_run sweeps every coordinate; use subset_wtgs_run");
  if (!config.h) throw ConfigError("wtgs_run needs a fixed h; use wtgs_run_infer_h");

  const int P = data.p();
  const double h = *config.h;
  const double eps = config.epsilon;
  const bool wgs = config.variant == Variant::Wgs;

  ChainState st;
  st.gamma = GammaState(P);
  st.h = h;

  LinearSweep lin(data, config);
  lin.engine.rebuild(st.gamma);
  lin.sweep(h);
  double total = lin.refresh_selw(st.gamma, eps, config.variant);

  detail::SampleRecorder rec(P, /*storeSweep=*/false);

  for (st.t = 0; st.t < config.iterations; ++st.t) {
    const int i = rng.categorical(lin.selw, total);
    st.sel = i;
    bool moved = true;
    if (wgs) {
      const double a = metropolized_gibbs_accept(lin.pips[static_cast<std::size_t>(i)],
                                                 st.gamma.bit(i));
      moved = rng.uniform() < a;
    }
    if (moved) {
      st.gamma.flip(i);
      lin.engine.rebuild(st.gamma);
      lin.sweep(h);
      total = lin.refresh_selw(st.gamma, eps, config.variant);
    }
    st.rhoTilde = 1.0 / total;  // phi at the new state
    if (st.t >= config.burnIn)
      rec.record(lin.engine, st.rhoTilde, st.gamma, lin.idxAll, lin.pips);
  }

  LinearChainOutput out(P);
  out.samples = std::move(rec.samples);
  out.acc = std::move(rec.acc);
  out.pipRB = out.acc.pip_partial_rb();
  out.betaMean = out.acc.beta_model_averaged();
  out.weightVariance = out.acc.weight_variance();
  return out;
}

LinearChainOutput wtgs_run_infer_h(const Dataset& data, const SamplerConfig& config,
                                   Rng& rng) {
  validate(data, config);
  if (data.kind != Likelihood::Linear)
    throw ConfigError("wtgs_run_infer_h drives the linear likelihood");
  if (config.subsetSize)
    throw ConfigError("h inference runs on the full linear sweep only");
  if (!config.hBeta)
    throw ConfigError("wtgs_run_infer_h needs a Beta prior on h; use wtgs_run");

  const int P = data.p();
  const double eps = config.epsilon;
  const double alpha = config.hBeta->alpha;
  const double beta = config.hBeta->beta;
  const bool wgs = config.variant == Variant::Wgs;
  const bool adaptXi = !config.xi.has_value();

  ChainState st;
  st.gamma = GammaState(P);
  st.xi = config.xi.value_or(5.0);
  st.h = rng.beta(alpha, beta);

  LinearSweep lin(data, config);
  lin.engine.rebuild(st.gamma);
  lin.sweep(st.h);
  double total = lin.refresh_selw(st.gamma, eps, config.variant);

  detail::SampleRecorder rec(P, /*storeSweep=*/false);
  LinearChainOutput out(P);
  long refreshVisits = 0;

  for (st.t = 0; st.t < config.iterations; ++st.t) {
    // One uniform picks between the h-refresh slot (mass xi) and the
    // coordinates (mass selw_j / P each).
    const double phiCur = st.xi + total / P;
    const double u = rng.uniform() * phiCur;
    const int i = u < st.xi
                      ? -1
                      : detail::prefix_pick(lin.selw, (u - st.xi) * P);
    st.sel = i;
    if (i < 0) {
      const int nAct = st.gamma.size();
      st.h = rng.beta(alpha + nAct, beta + (P - nAct));
      // The factorization and Bayes factors do not involve h; only the prior
      // odds in the conditional probabilities move.
      detail::pips_from_logbf(lin.logbf, st.h, lin.pips);
      total = lin.refresh_selw(st.gamma, eps, config.variant);
    } else {
      bool moved = true;
      if (wgs) {
        const double a = metropolized_gibbs_accept(
            lin.pips[static_cast<std::size_t>(i)], st.gamma.bit(i));
        moved = rng.uniform() < a;
      }
      if (moved) {
        st.gamma.flip(i);
        lin.engine.rebuild(st.gamma);
        lin.sweep(st.h);
        total = lin.refresh_selw(st.gamma, eps, config.variant);
      }
    }
    const double phi = st.xi + total / P;
    st.rhoTilde = 1.0 / phi;
    if (st.t >= config.burnIn) {
      rec.record(lin.engine, st.rhoTilde, st.gamma, lin.idxAll, lin.pips);
      out.hDraws.push_back(st.h);
      if (i < 0) ++refreshVisits;
    } else if (adaptXi) {
      st.xi = adapt_xi(st.xi, phi, config.fOmega, st.t);
    }
  }

  out.samples = std::move(rec.samples);
  out.acc = std::move(rec.acc);
  out.pipRB = out.acc.pip_partial_rb();
  out.betaMean = out.acc.beta_model_averaged();
  out.weightVariance = out.acc.weight_variance();
  out.xiFinal = st.xi;
  const long retained = config.iterations - config.burnIn;
  out.untemperedFraction = static_cast<double>(refreshVisits) / retained;
  return out;
}

}  // namespace bvs
