#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "bvs/errors.hpp"

namespace bvs {

// Importance-weighted posterior summaries.
//
// Every retained iteration contributes a weight w_t, the active set of
// gamma_t, and the conditional inclusion probabilities computed during that
// iteration's sweep (all covariates for full sweeps, the sampled subset
// otherwise). Rao-Blackwellized estimates replace the indicator gamma_tj by
// the conditional probability wherever the sweep provides one.

struct WeightedSample {
  double weight = 0.0;
  std::vector<int> active;        // support of gamma_t, ascending
  std::vector<int> sweepIdx;      // covariates swept this iteration
  std::vector<double> sweepPips;  // conditional inclusion probs, same order
};

using SampleTrace = std::vector<WeightedSample>;

// Weights scaled so their mean is one.
std::vector<double> normalize_weights(const SampleTrace& trace);

// Indicator estimate: sum_t w_t gamma_tj / sum_t w_t.
Eigen::VectorXd pip_raw(const SampleTrace& trace, int P);

// Fully Rao-Blackwellized estimate; every sample must sweep all P covariates.
Eigen::VectorXd pip_rb(const SampleTrace& trace, int P);

// Conditional probability where swept, indicator elsewhere.
Eigen::VectorXd pip_partial_rb(const SampleTrace& trace, int P);

// Monte Carlo standard error of the ratio sum(num)/sum(den) by batch means.
double batch_means_se(std::span<const double> num, std::span<const double> den,
                      int batches);

// Streaming accumulator with O(P) state. Adding an iteration costs
// O(|active| + |sweep|). Accumulators over disjoint chains merge by addition.
class WeightedAccumulator {
 public:
  explicit WeightedAccumulator(int P);

  // betaMean / betaVar, when nonempty, align with `active` and carry the
  // conditional posterior moments of the active coefficients.
  void add(double w, std::span<const int> active, std::span<const int> sweepIdx,
           std::span<const double> sweepPips, std::span<const double> betaMean = {},
           std::span<const double> betaVar = {});

  void merge(const WeightedAccumulator& other);

  long long count() const { return n_; }
  double weight_sum() const { return wSum_; }

  Eigen::VectorXd pip_raw() const;
  Eigen::VectorXd pip_partial_rb() const;

  // Variance of the mean-normalized weights: n sum(w^2) / (sum w)^2 - 1.
  double weight_variance() const;
  double effective_sample_size() const;

  // Coefficient summaries conditional on inclusion; zeros for covariates that
  // were never active.
  void coef_summaries(std::vector<double>& mean, std::vector<double>& sd) const;

  // Model-averaged coefficient means E[beta_j 1{gamma_j}]: the conditional
  // mean times the inclusion indicator, averaged over the weighted chain.
  Eigen::VectorXd beta_model_averaged() const;

 private:
  void check_nonempty() const;

  int P_;
  long long n_ = 0;
  double wSum_ = 0.0, wSqSum_ = 0.0;
  Eigen::VectorXd rawNum_, rbNum_;
  Eigen::VectorXd betaDen_, betaNum_, betaSqNum_;
  mutable std::vector<unsigned char> mark_;  // scratch for membership tests
};

}  // namespace bvs
