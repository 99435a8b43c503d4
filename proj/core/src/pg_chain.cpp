#include "bvs/pg_chain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bvs/pg.hpp"
#include "bvs/subset.hpp"
#include "bvs/util.hpp"
#include "bvs/wtgs.hpp"
#include "chain_util.hpp"

namespace bvs {

double phi_pg(std::span<const double> condPips, const GammaState& gamma,
              double epsilon, double xi, Variant variant) {
  const int P = gamma.p();
  double s = 0.0;
  for (int j = 0; j < P; ++j)
    s += selection_weight(condPips[static_cast<std::size_t>(j)], gamma.bit(j), epsilon,
                          P, variant);
  return xi + s / static_cast<double>(P);
}

int sample_i_pg(std::span<const double> condPips, const GammaState& gamma,
                double epsilon, double xi, Rng& rng, Variant variant) {
  const int P = gamma.p();
  double total = 0.0;
  for (int j = 0; j < P; ++j)
    total += selection_weight(condPips[static_cast<std::size_t>(j)], gamma.bit(j),
                              epsilon, P, variant);
  const double u = rng.uniform() * (xi + total / P);
  if (u < xi) return -1;
  double target = (u - xi) * P;
  double acc = 0.0;
  for (int j = 0; j < P; ++j) {
    acc += selection_weight(condPips[static_cast<std::size_t>(j)], gamma.bit(j),
                            epsilon, P, variant);
    if (target < acc) return j;
  }
  return P - 1;
}

Eigen::VectorXd beta_hat(const ActiveFactorization& fact) { return fact.Fz; }

double metropolized_gibbs_accept(double q, bool currentlyIncluded) {
  const double p = clamp_pip(q);
  const double ratio = currentlyIncluded ? (1.0 - p) / p : p / (1.0 - p);
  return std::min(1.0, ratio);
}

double adapt_xi(double xi, double phi, double fOmega, long t) {
  const double next = xi + (fOmega - xi / phi) / std::sqrt(static_cast<double>(t + 1));
  return std::max(next, 1e-6);
}

namespace {

// log cosh(x / 2) + log 2 = log(1 + e^x) - x / 2; the log 2 cancels whenever
// the coefficient multiplying it sums to zero across the ratio, and is kept
// explicitly (via the nu terms) when it does not.
inline double log_cosh_term(double x) { return log1pexp(x) - 0.5 * x; }

}  // namespace

double omega_accept_logratio(const Dataset& data, double mllCur, double mllProp,
                             const Eigen::VectorXd& psiHat,
                             const Eigen::VectorXd& psiHatProp,
                             const Eigen::VectorXd& omega,
                             const Eigen::VectorXd& omegaProp, double nu,
                             double nuProp) {
  // Both proposal directions are Polya-Gamma conditionals whose tilted
  // densities factor into the untilted density times cosh and quadratic
  // corrections; the untilted densities cancel against the augmented target,
  // so no Polya-Gamma density is ever evaluated here.
  const int N = data.n();
  double logA = mllProp - mllCur;
  if (data.kind == Likelihood::Binomial) {
    for (int n = 0; n < N; ++n) {
      const double fwd = psiHat(n);       // tilt that proposed omegaProp
      const double rev = psiHatProp(n);   // tilt of the reverse proposal
      logA += data.C(n) * (log_cosh_term(rev) - log_cosh_term(fwd));
      logA -= 0.5 * (omega(n) * rev * rev - omegaProp(n) * fwd * fwd);
    }
    return logA;
  }
  // Negbin: the proposal tilt pairs the current fit with nuProp, the reverse
  // tilt pairs the proposed fit with nu, and the Polya-Gamma shapes Y + nu
  // differ across the ratio, which leaves a residual N (nuProp - nu) log 2.
  const double tiltFwd = data.psi0 - std::log(nuProp);
  const double tiltRev = data.psi0 - std::log(nu);
  logA += N * (nuProp - nu) * std::log(2.0);
  for (int n = 0; n < N; ++n) {
    const double fwd = psiHat(n) + tiltFwd;
    const double rev = psiHatProp(n) + tiltRev;
    logA += (data.Y(n) + nu) * log_cosh_term(rev);
    logA -= (data.Y(n) + nuProp) * log_cosh_term(fwd);
    logA -= 0.5 * (omega(n) * rev * rev - omegaProp(n) * fwd * fwd);
  }
  return logA;
}

OmegaMove omega_mh_step(PipEngine& engine, const GammaState& gamma,
                        Eigen::VectorXd& omega, double& nu, const Dataset& data,
                        const SamplerConfig& config, bool alwaysAccept, Rng& rng) {
  const bool negbin = data.kind == Likelihood::NegBinomial;
  const int N = data.n();

  OmegaProposalContext ctx;
  ctx.betaHat = beta_hat(engine.fact());
  ctx.psiHat = engine.psi_hat();
  ctx.currentLogLik = engine.fact().loglik;

  double nuProp = nu;
  Eigen::VectorXd tilt;
  if (negbin) {
    nuProp = nu * std::exp(config.nuRwScale * rng.normal());
    tilt = ctx.psiHat.array() + (data.psi0 - std::log(nuProp));
  } else {
    tilt = ctx.psiHat;
  }
  Eigen::VectorXd omegaProp(N);
  for (int n = 0; n < N; ++n) {
    const double b = negbin ? data.Y(n) + nuProp : data.C(n);
    omegaProp(n) = pg_draw(rng, b, tilt(n));
  }

  OmegaMove mv;
  if (alwaysAccept) {
    mv.accepted = true;
  } else {
    engine.set_augmentation(&omegaProp, nuProp);
    engine.rebuild(gamma);
    mv.attempted = true;
    const double mllProp = engine.fact().loglik;
    const Eigen::VectorXd psiHatProp = engine.psi_hat();
    const double logA = omega_accept_logratio(data, ctx.currentLogLik, mllProp,
                                              ctx.psiHat, psiHatProp, omega,
                                              omegaProp, nu, nuProp);
    mv.accepted = std::log(rng.uniform()) < logA;
  }

  if (mv.accepted) {
    omega = std::move(omegaProp);
    nu = nuProp;
  }
  // Re-point the engine at the winning state (the proposal buffer dies here).
  engine.set_augmentation(&omega, nu);
  engine.rebuild(gamma);
  return mv;
}

double negbin_loglik_terms(const Dataset& data, const GammaState& gamma,
                           const Eigen::VectorXd& omega, double nu, double tau) {
  if (data.kind != Likelihood::NegBinomial)
    throw ConfigError("negbin_loglik_terms needs a negative-binomial dataset");
  const KappaZ kz = make_kappa_z(data, &omega, nu);
  Model m;
  m.data = &data;
  m.kz = &kz;
  m.omega = &omega;
  m.nu = nu;
  m.tau = tau;
  m.tauBias = tau;
  m.includeBias = true;
  return marginal_loglik_dense(m, gamma);
}

namespace {

// Shared driver for the full-sweep and subset count chains. sweepIdx lists
// the covariates swept each iteration (all P, or the current subset).
struct CountChainCommon {
  CountChainCommon(const Dataset& data, const SamplerConfig& config, Rng& rng,
                   std::size_t sweepLen)
      : negbin(data.kind == Likelihood::NegBinomial),
        inferH(config.hBeta.has_value()),
        adaptXi(!config.xi.has_value()),
        wgs(config.variant == Variant::Wgs),
        warmStart(config.burnIn / 4),
        logbf(sweepLen),
        pips(sweepLen),
        selw(sweepLen) {
    st.gamma = GammaState(data.p());
    st.xi = config.xi.value_or(5.0);
    st.nu = 1.0;
    st.h = inferH ? rng.beta(config.hBeta->alpha, config.hBeta->beta) : *config.h;
    st.omega.resize(data.n());
    for (int n = 0; n < data.n(); ++n) {
      const double b = negbin ? data.Y(n) + st.nu : data.C(n);
      st.omega(n) = pg_draw(rng, b, 0.0);
    }
  }

  // The refresh move shared by both chains: omega (negbin: and nu) MH plus
  // the h Gibbs draw when h carries a prior; the order of the two updates is
  // randomized since each conditions on gamma only. Returns whether the
  // factorization changed.
  bool refresh_move(PipEngine& engine, const Dataset& data,
                    const SamplerConfig& config, Rng& rng) {
    const bool omegaFirst = inferH ? rng.bernoulli(0.5) : true;
    bool changed = false;
    auto do_omega = [&]() {
      const OmegaMove mv = omega_mh_step(engine, st.gamma, st.omega, st.nu, data,
                                         config, st.t < warmStart, rng);
      if (mv.attempted) {
        ++mhAttempts;
        mhAccepts += mv.accepted ? 1 : 0;
      }
      changed = mv.accepted;
    };
    auto do_h = [&]() {
      const int nAct = st.gamma.size();
      st.h = rng.beta(config.hBeta->alpha + nAct,
                      config.hBeta->beta + (data.p() - nAct));
    };
    if (omegaFirst) {
      do_omega();
      if (inferH) do_h();
    } else {
      do_h();
      do_omega();
    }
    return changed;
  }

  void finalize(CountChainOutput& out, detail::SampleRecorder& rec,
                const SamplerConfig& config) {
    out.samples = std::move(rec.samples);
    out.acc = std::move(rec.acc);
    out.pipRB = out.acc.pip_partial_rb();
    out.betaMean = out.acc.beta_model_averaged();
    out.weightVariance = out.acc.weight_variance();
    out.omegaAcceptRate =
        mhAttempts > 0 ? static_cast<double>(mhAccepts) / mhAttempts : 0.0;
    out.xiFinal = st.xi;
    const long retained = config.iterations - config.burnIn;
    out.untemperedFraction = static_cast<double>(refreshVisits) / retained;
  }

  ChainState st;
  bool negbin, inferH, adaptXi, wgs;
  long warmStart;
  long mhAttempts = 0, mhAccepts = 0, refreshVisits = 0;
  std::vector<double> logbf, pips, selw;
};

}  // namespace

CountChainOutput pg_wtgs_run(const Dataset& data, const SamplerConfig& config,
                             Rng& rng) {
  validate(data, config);
  if (data.kind == Likelihood::Linear)
    throw ConfigError("pg_wtgs_run drives the count likelihoods");
  if (config.subsetSize)
    throw ConfigError("pg_wtgs_run sweeps every coordinate; use subset_pg_wtgs_run");

  const int P = data.p();
  const double eps = config.epsilon;

  CountChainCommon cc(data, config, rng, static_cast<std::size_t>(P));
  ChainState& st = cc.st;

  PipEngine engine(data, config.tau, config.tau_bias(), /*includeBias=*/true,
                   /*precomputeGram=*/false);
  engine.set_augmentation(&st.omega, st.nu);
  engine.rebuild(st.gamma);

  std::vector<int> idxAll(static_cast<std::size_t>(P));
  std::iota(idxAll.begin(), idxAll.end(), 0);

  auto sweep = [&]() {
    engine.log_bayes_factors(idxAll, cc.logbf);
    detail::pips_from_logbf(cc.logbf, st.h, cc.pips);
  };
  auto refresh_selw = [&]() {
    double total = 0.0;
    for (int j = 0; j < P; ++j) {
      const std::size_t k = static_cast<std::size_t>(j);
      cc.selw[k] =
          selection_weight(cc.pips[k], st.gamma.bit(j), eps, P, config.variant);
      total += cc.selw[k];
    }
    return total;
  };

  sweep();
  double total = refresh_selw();

  detail::SampleRecorder rec(P, /*storeSweep=*/false);
  CountChainOutput out(P);

  for (st.t = 0; st.t < config.iterations; ++st.t) {
    const double u = rng.uniform() * (st.xi + total / P);
    const int i =
        u < st.xi ? -1 : detail::prefix_pick(cc.selw, (u - st.xi) * P);
    st.sel = i;
    if (i < 0) {
      const bool changed = cc.refresh_move(engine, data, config, rng);
      if (changed)
        sweep();
      else
        detail::pips_from_logbf(cc.logbf, st.h, cc.pips);  // h may have moved
      total = refresh_selw();
    } else {
      // Covariate flips never touch omega; the tempered conditional is
      // uniform, so only the Wgs variant can reject.
      bool moved = true;
      if (cc.wgs) {
        const double a = metropolized_gibbs_accept(
            cc.pips[static_cast<std::size_t>(i)], st.gamma.bit(i));
        moved = rng.uniform() < a;
      }
      if (moved) {
        st.gamma.flip(i);
        engine.rebuild(st.gamma);
        sweep();
        total = refresh_selw();
      }
    }
    const double phi = st.xi + total / P;
    st.rhoTilde = 1.0 / phi;
    if (st.t >= config.burnIn) {
      rec.record(engine, st.rhoTilde, st.gamma, idxAll, cc.pips);
      if (cc.negbin) out.nuDraws.push_back(st.nu);
      if (cc.inferH) out.hDraws.push_back(st.h);
      if (i < 0) ++cc.refreshVisits;
    } else if (cc.adaptXi) {
      st.xi = adapt_xi(st.xi, phi, config.fOmega, st.t);
    }
  }

  cc.finalize(out, rec, config);
  return out;
}

CountChainOutput subset_pg_wtgs_run(const Dataset& data, const SamplerConfig& config,
                                    Rng& rng) {
  validate(data, config);
  if (data.kind == Likelihood::Linear)
    throw ConfigError("subset_pg_wtgs_run drives the count likelihoods");
  if (!config.subsetSize)
    throw ConfigError("subset_pg_wtgs_run needs a subset size; use pg_wtgs_run");

  const int P = data.p();
  const double eps = config.epsilon;
  // The untempered slot occupies one subset seat and one anchor seat
  // permanently, so covariate bookkeeping runs on the remainders.
  const int S = *config.subsetSize;
  const int A = config.anchorSize;
  const int sCov = S - 1;
  const int aCov = A - 1;

  CountChainCommon cc(data, config, rng, static_cast<std::size_t>(sCov));
  ChainState& st = cc.st;

  SubsetState sub;
  sub.S = S;
  sub.A = A;
  sub.ratioInOut = u_ratio(P + 1, S, A, /*iInAnchor=*/false);
  sub.anchor = detail::top_correlated(data, aCov);

  PipEngine engine(data, config.tau, config.tau_bias(), /*includeBias=*/true,
                   /*precomputeGram=*/false);
  engine.set_augmentation(&st.omega, st.nu);
  engine.rebuild(st.gamma);

  std::vector<std::uint32_t> stamp;
  std::uint32_t clock = 0;
  st.sel = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(P)));
  sample_subset_into(st.sel, sub.anchor, P, sCov, rng, stamp, clock, sub.subset);

  auto sweep_subset = [&]() {
    engine.log_bayes_factors(sub.subset, cc.logbf);
    detail::pips_from_logbf(cc.logbf, st.h, cc.pips);
  };
  auto refresh_selw = [&]() {
    double total = 0.0;
    for (std::size_t k = 0; k < sub.subset.size(); ++k) {
      const int j = sub.subset[k];
      const bool anchored =
          std::binary_search(sub.anchor.begin(), sub.anchor.end(), j);
      const double uv = anchored ? 1.0 : sub.ratioInOut;
      cc.selw[k] =
          uv * selection_weight(cc.pips[k], st.gamma.bit(j), eps, P, config.variant);
      total += cc.selw[k];
    }
    return total;
  };

  sweep_subset();
  double total = refresh_selw();

  detail::SampleRecorder rec(P, /*storeSweep=*/true);
  WeightedAccumulator burnAcc(P);
  CountChainOutput out(P);
  const bool adapting = aCov > 0 && config.burnIn > 0;

  for (st.t = 0; st.t < config.iterations; ++st.t) {
    const double u = rng.uniform() * (st.xi + total / P);
    int i = -1;
    if (u >= st.xi) {
      const int k = detail::prefix_pick(cc.selw, (u - st.xi) * P);
      i = sub.subset[static_cast<std::size_t>(k)];
    }
    st.sel = i;

    if (i < 0) {
      cc.refresh_move(engine, data, config, rng);
    } else {
      // Tempered flip; the untempered variant is rejected with subsets at
      // configuration time, so no accept step exists here.
      st.gamma.flip(i);
      engine.rebuild(st.gamma);
    }

    if (adapting && st.t < config.burnIn &&
        ((st.t + 1) % 100 == 0 || st.t + 1 == config.burnIn) && burnAcc.count() > 0) {
      const Eigen::VectorXd run = burnAcc.pip_partial_rb();
      sub.anchor = adapt_anchor(
          std::span<const double>(run.data(), static_cast<std::size_t>(P)), aCov,
          st.t, config.burnIn);
    }

    sample_subset_into(i, sub.anchor, P, sCov, rng, stamp, clock, sub.subset);
    // The subset moved even when the factorization did not, so the sweep runs
    // every iteration; rebuilds already happened where needed.
    sweep_subset();
    total = refresh_selw();

    const double phi = st.xi + total / P;
    st.rhoTilde = 1.0 / phi;
    if (st.t >= config.burnIn) {
      rec.record(engine, st.rhoTilde, st.gamma, sub.subset, cc.pips);
      if (cc.negbin) out.nuDraws.push_back(st.nu);
      if (cc.inferH) out.hDraws.push_back(st.h);
      if (i < 0) ++cc.refreshVisits;
    } else {
      if (cc.adaptXi) st.xi = adapt_xi(st.xi, phi, config.fOmega, st.t);
      burnAcc.add(st.rhoTilde, st.gamma.active(), sub.subset, cc.pips);
    }
  }

  cc.finalize(out, rec, config);
  out.anchorFinal = sub.anchor;
  return out;
}

}  // namespace bvs
