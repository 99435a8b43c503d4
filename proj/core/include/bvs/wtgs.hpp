#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bvs/estimators.hpp"
#include "bvs/rng.hpp"
#include "bvs/types.hpp"

namespace bvs {

// Weighted tempered Gibbs machinery for the linear likelihood.
//
// Each iteration draws one coordinate i with probability proportional to its
// selection weight, flips gamma_i (the tempered conditional of the selected
// coordinate is uniform, so the flip always goes through), and corrects for
// the tempering with an importance weight 1/phi evaluated at the new state.
// eta steers the draw toward coordinates whose inclusion is genuinely
// uncertain while the epsilon/P floor keeps every coordinate visited.

double eta(double condPip, double epsilon, int P);

// Per-coordinate selection mass at conditional inclusion probability
// condPip. Wtgs uses eta / (2 p_tilde) with p_tilde the conditional
// probability of the current gamma_i; Tgs fixes eta = 1 and keeps the
// tempering; Wgs keeps eta and drops the tempering denominator.
double selection_weight(double condPip, bool included, double epsilon, int P,
                        Variant variant);

// Importance-weight denominator of the fixed-h linear chain: the sum of
// selection weights over all P coordinates. For Wtgs it is bounded below by
// epsilon / 2, so unnormalized sample weights never exceed 2 / epsilon.
double phi_linear(std::span<const double> condPips, const GammaState& gamma,
                  double epsilon, Variant variant = Variant::Wtgs);

// Draws the coordinate to flip; condPips must be the sweep at the current
// state. Consumes exactly one uniform.
int sample_i_linear(std::span<const double> condPips, const GammaState& gamma,
                    double epsilon, Rng& rng, Variant variant = Variant::Wtgs);

struct LinearChainOutput {
  explicit LinearChainOutput(int P) : acc(P) {}

  SampleTrace samples;        // retained samples; sweep fields stored by subset chains only
  Eigen::VectorXd pipRB;      // Rao-Blackwellized inclusion estimates
  Eigen::VectorXd betaMean;   // model-averaged coefficient means
  double weightVariance = 0.0;
  std::vector<double> hDraws;        // retained h draws, h-inference runs only
  double xiFinal = 0.0;              // untempered-state mass after adaptation
  double untemperedFraction = 0.0;   // post-burn-in rate of h-refresh moves
  std::vector<int> anchorFinal;      // frozen anchor, subset chains only
  WeightedAccumulator acc;           // streaming summaries; mergeable across chains
};

// Fixed-h linear chain with a full conditional-probability sweep each
// iteration. Requires config.h.
LinearChainOutput wtgs_run(const Dataset& data, const SamplerConfig& config, Rng& rng);

// Linear chain with a Beta prior on the inclusion probability h. The
// auxiliary index gains an untempered slot of mass xi at which h is redrawn
// from its Beta conditional; per-coordinate masses pick up a 1/P factor. The
// marginal likelihood does not involve h, so an h refresh rescales the
// cached Bayes factors without touching the factorization. Requires
// config.hBeta.
LinearChainOutput wtgs_run_infer_h(const Dataset& data, const SamplerConfig& config,
                                   Rng& rng);

}  // namespace bvs
