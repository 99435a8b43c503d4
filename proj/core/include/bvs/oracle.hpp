#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "bvs/errors.hpp"
#include "bvs/types.hpp"

namespace bvs {

// Brute-force reference posteriors. Everything in this header recomputes
// evidence from scratch with its own dense linear algebra (hand-rolled
// elimination, hand-rolled quadrature) so that it shares no code path with
// the incremental machinery it is used to check.

// Exhaustive model-space posterior; modelLogProbs is indexed by the gamma
// bitmask (bit j set = covariate j active) and normalized to sum to one.
struct ExactPosterior {
  std::vector<double> modelLogProbs;  // size 2^P
  Eigen::VectorXd pips;
  double logEvidence = 0.0;  // log of the prior-weighted evidence sum

  // p(gamma_i = 1 | gamma_{-i}) read off the table.
  double conditional_pip(std::uint32_t mask, int i) const;
};

// All 2^P linear-model marginals, P <= 20.
ExactPosterior enumerate_linear(const Dataset& data, double h, double tau,
                                bool includeBias = false, double tauBias = -1.0,
                                const BetaPrior* hBeta = nullptr);

// Count-model posterior over all 2^P models, P <= 3, via per-model evidence
// quadrature. nu is held fixed for the negative binomial.
ExactPosterior quadrature_count(const Dataset& data, double h, double tau,
                                double relTol = 1e-6, double nu = 1.0,
                                double tauBias = -1.0,
                                const BetaPrior* hBeta = nullptr);

// log p(Y | one model) by mode-centered tensor Gauss-Legendre quadrature over
// the regression coefficients (bias included), doubling the node count until
// successive estimates agree to relTol.
double quadrature_count_evidence(const Dataset& data, const std::vector<int>& active,
                                 double tau, double tauBias, double nu,
                                 double relTol = 1e-6);

// Exact reversibility audit of the anchored-subset flip kernel on the joint
// (gamma, subset) state space, linear likelihood, P <= 4. Returns
// max |f(s) K(s,s') - f(s') K(s',s)|; etaBias perturbs the tempering weight of
// covariate 0 in the selection step only, to let tests confirm the audit can
// detect a mismatched kernel.
double detailed_balance_check(const Dataset& data, int S, int A,
                              const std::vector<int>& anchor, double h, double tau,
                              double epsilon = 5.0, double etaBias = 0.0);

}  // namespace bvs
