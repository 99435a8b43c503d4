#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bvs/estimators.hpp"
#include "bvs/mll.hpp"
#include "bvs/rng.hpp"
#include "bvs/types.hpp"

namespace bvs {

// Count-likelihood chains. The Polya-Gamma augmentation makes the model
// conditionally Gaussian, so covariate moves are the same tempered flips as
// in the linear chain; the auxiliary index gains an untempered slot of mass
// xi at which omega (and, when inferred, nu and h) are refreshed. omega moves
// never touch gamma and covariate flips never touch omega.

// Inputs of one refresh proposal, read off the current factorization.
struct OmegaProposalContext {
  Eigen::VectorXd betaHat;   // conditional posterior coefficient mean, bias first
  Eigen::VectorXd psiHat;    // linear predictor at betaHat, length N
  double currentLogLik = 0.0;
};

struct CountChainOutput {
  explicit CountChainOutput(int P) : acc(P) {}

  SampleTrace samples;
  Eigen::VectorXd pipRB;
  Eigen::VectorXd betaMean;
  double weightVariance = 0.0;
  double omegaAcceptRate = 0.0;      // over genuine accept/reject attempts
  double untemperedFraction = 0.0;   // post-burn-in rate of refresh moves
  std::vector<double> nuDraws;       // retained dispersion draws, negbin only
  std::vector<double> hDraws;        // retained h draws, h-inference only
  double xiFinal = 0.0;
  std::vector<int> anchorFinal;      // frozen covariate anchor, subset chains only
  WeightedAccumulator acc;
};

// Importance-weight denominator: xi for the untempered slot plus the mean of
// the per-coordinate selection weights. Never smaller than xi, so sample
// weights are bounded by 1 / xi.
double phi_pg(std::span<const double> condPips, const GammaState& gamma,
              double epsilon, double xi, Variant variant = Variant::Wtgs);

// Draws the auxiliary index: -1 for the untempered refresh slot, otherwise a
// covariate. Consumes exactly one uniform.
int sample_i_pg(std::span<const double> condPips, const GammaState& gamma,
                double epsilon, double xi, Rng& rng,
                Variant variant = Variant::Wtgs);

// Conditional posterior mean of the active coefficients (bias first), read
// off the factorization.
Eigen::VectorXd beta_hat(const ActiveFactorization& fact);

// Flip acceptance probability for the untempered (Wgs) variant; q is the
// conditional inclusion probability of the proposed coordinate.
double metropolized_gibbs_accept(double q, bool currentlyIncluded);

// Stochastic-approximation step nudging the untempered-slot visit rate
// (xi / phi on average) toward fOmega; t counts iterations from zero.
double adapt_xi(double xi, double phi, double fOmega, long t);

// Log MH acceptance ratio of an omega refresh proposed from the Polya-Gamma
// conditional at the current fitted linear predictor (negbin proposals also
// move nu, with the proposal tilt evaluated at nuProp and the reverse tilt at
// nu). The Polya-Gamma densities cancel exactly, leaving marginal-likelihood,
// log-cosh, and quadratic terms; nothing here evaluates a Polya-Gamma
// density. psiHat / psiHatProp are the fitted predictors of the current and
// proposed factorizations. nu and nuProp are ignored for the binomial.
double omega_accept_logratio(const Dataset& data, double mllCur, double mllProp,
                             const Eigen::VectorXd& psiHat,
                             const Eigen::VectorXd& psiHatProp,
                             const Eigen::VectorXd& omega,
                             const Eigen::VectorXd& omegaProp, double nu,
                             double nuProp);

struct OmegaMove {
  bool attempted = false;  // false during the always-accept warm start
  bool accepted = false;
};

// One untempered refresh against the engine's current state: draws the
// proposal (negbin: log-nu random walk first, then omega from the Polya-Gamma
// conditional at the proposed tilt), evaluates the acceptance ratio, and
// leaves engine, omega, and nu at whichever state won.
OmegaMove omega_mh_step(PipEngine& engine, const GammaState& gamma,
                        Eigen::VectorXd& omega, double& nu,
                        const Dataset& data, const SamplerConfig& config,
                        bool alwaysAccept, Rng& rng);

// Full negbin marginal log-likelihood at fixed omega and nu, including the
// response-indexed terms that move with nu. Bias precision equals tau.
double negbin_loglik_terms(const Dataset& data, const GammaState& gamma,
                           const Eigen::VectorXd& omega, double nu, double tau);

// Full-sweep count chain. Requires a Binomial or NegBinomial dataset.
CountChainOutput pg_wtgs_run(const Dataset& data, const SamplerConfig& config,
                             Rng& rng);

// Subset variant: the ground set for the subset draw is the P coordinates
// plus the untempered slot, which anchors permanently; config.anchorSize
// counts that slot, so anchorSize - 1 covariates anchor by running estimate.
CountChainOutput subset_pg_wtgs_run(const Dataset& data, const SamplerConfig& config,
                                    Rng& rng);

}  // namespace bvs
