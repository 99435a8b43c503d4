#include "chain_util.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bvs::detail {

std::vector<int> top_correlated(const Dataset& data, int k) {
  const int P = data.p();
  if (k <= 0) return {};
  const int N = data.n();
  const double yMean = data.Y.mean();
  const Eigen::VectorXd yc = data.Y.array() - yMean;
  const double ySs = yc.squaredNorm();

  std::vector<double> score(P, 0.0);
  for (int j = 0; j < P; ++j) {
    const double xMean = data.X.col(j).mean();
    const Eigen::VectorXd xc = data.X.col(j).array() - xMean;
    const double xSs = xc.squaredNorm();
    if (xSs <= 0.0 || ySs <= 0.0) continue;
    score[j] = std::fabs(xc.dot(yc)) / std::sqrt(xSs * ySs);
  }

  std::vector<int> order(P);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return a < b;
  });
  order.resize(std::min(k, P));
  std::sort(order.begin(), order.end());
  return order;
}

void SampleRecorder::record(const PipEngine& engine, double w, const GammaState& gamma,
                            std::span<const int> sweepIdx,
                            std::span<const double> sweepPips) {
  engine.beta_summaries(betaIdx_, betaMean_, betaVar_);
  acc.add(w, gamma.active(), sweepIdx, sweepPips, betaMean_, betaVar_);

  WeightedSample s;
  s.weight = w;
  s.active = gamma.active();
  if (storeSweep_) {
    s.sweepIdx.assign(sweepIdx.begin(), sweepIdx.end());
    s.sweepPips.assign(sweepPips.begin(), sweepPips.end());
  }
  samples.push_back(std::move(s));
}

}  // namespace bvs::detail
