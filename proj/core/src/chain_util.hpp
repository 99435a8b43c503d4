#pragma once

// Internal helpers shared by the chain drivers. Not installed.

#include <span>
#include <vector>

#include "bvs/estimators.hpp"
#include "bvs/mll.hpp"
#include "bvs/types.hpp"
#include "bvs/util.hpp"

namespace bvs::detail {

// Applies the prior-inclusion odds to a sweep of log Bayes factors.
inline void pips_from_logbf(std::span<const double> logbf, double h,
                            std::span<double> pips) {
  for (std::size_t k = 0; k < logbf.size(); ++k)
    pips[k] = pip_from_logbf(logbf[k], h);
}

// Prefix-scan pick over nonnegative weights with a caller-supplied target in
// [0, sum). Ties resolve toward lower indices, matching Rng::categorical.
inline int prefix_pick(std::span<const double> weights, double target) {
  double acc = 0.0;
  const int n = static_cast<int>(weights.size());
  for (int k = 0; k < n; ++k) {
    acc += weights[k];
    if (target < acc) return k;
  }
  return n - 1;
}

// Indices of the k largest |corr(X_j, Y)|, ascending. Ties break toward the
// lower index. Zero-variance columns count as uncorrelated.
std::vector<int> top_correlated(const Dataset& data, int k);

// Retained-sample bookkeeping shared by every chain: streaming accumulator,
// stored trace, and the per-iteration conditional coefficient moments.
// storeSweep keeps the per-sample conditional PIPs in the trace (subset
// chains); full-sweep chains fold them into the accumulator only, so trace
// memory stays independent of P.
class SampleRecorder {
 public:
  SampleRecorder(int P, bool storeSweep) : acc(P), storeSweep_(storeSweep) {}

  void record(const PipEngine& engine, double w, const GammaState& gamma,
              std::span<const int> sweepIdx, std::span<const double> sweepPips);

  WeightedAccumulator acc;
  SampleTrace samples;

 private:
  bool storeSweep_;
  std::vector<int> betaIdx_;
  std::vector<double> betaMean_, betaVar_;
};

}  // namespace bvs::detail
