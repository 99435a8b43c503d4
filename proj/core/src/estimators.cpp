#include "bvs/estimators.hpp"

#include <algorithm>
#include <cmath>

namespace bvs {

namespace {

double weight_total(const SampleTrace& trace) {
  double total = 0.0;
  for (const auto& s : trace) total += s.weight;
  if (trace.empty() || !(total > 0.0))
    throw EmptyChain("no retained samples with positive weight");
  return total;
}

}  // namespace

std::vector<double> normalize_weights(const SampleTrace& trace) {
  const double total = weight_total(trace);
  std::vector<double> out(trace.size());
  const double scale = static_cast<double>(trace.size()) / total;
  for (std::size_t t = 0; t < trace.size(); ++t) out[t] = trace[t].weight * scale;
  return out;
}

Eigen::VectorXd pip_raw(const SampleTrace& trace, int P) {
  const double total = weight_total(trace);
  Eigen::VectorXd num = Eigen::VectorXd::Zero(P);
  for (const auto& s : trace)
    for (int j : s.active) num(j) += s.weight;
  return num / total;
}

Eigen::VectorXd pip_rb(const SampleTrace& trace, int P) {
  const double total = weight_total(trace);
  Eigen::VectorXd num = Eigen::VectorXd::Zero(P);
  for (const auto& s : trace) {
    if (static_cast<int>(s.sweepIdx.size()) != P)
      throw DomainError("full Rao-Blackwellization needs a full sweep each iteration");
    for (int i = 0; i < P; ++i) num(s.sweepIdx[i]) += s.weight * s.sweepPips[i];
  }
  return num / total;
}

Eigen::VectorXd pip_partial_rb(const SampleTrace& trace, int P) {
  const double total = weight_total(trace);
  Eigen::VectorXd num = Eigen::VectorXd::Zero(P);
  std::vector<unsigned char> swept(P);
  for (const auto& s : trace) {
    std::fill(swept.begin(), swept.end(), 0);
    for (std::size_t i = 0; i < s.sweepIdx.size(); ++i) {
      num(s.sweepIdx[i]) += s.weight * s.sweepPips[i];
      swept[s.sweepIdx[i]] = 1;
    }
    for (int j : s.active)
      if (!swept[j]) num(j) += s.weight;
  }
  return num / total;
}

double batch_means_se(std::span<const double> num, std::span<const double> den,
                      int batches) {
  if (num.size() != den.size()) throw ShapeMismatch("numerator/denominator length mismatch");
  const int n = static_cast<int>(num.size());
  if (batches < 2 || n < 2 * batches)
    throw DomainError("batch means needs at least two samples per batch");
  const int len = n / batches;
  std::vector<double> ratio(batches);
  for (int b = 0; b < batches; ++b) {
    double sn = 0.0, sd = 0.0;
    for (int t = b * len; t < (b + 1) * len; ++t) {
      sn += num[t];
      sd += den[t];
    }
    if (!(sd > 0.0)) throw DomainError("batch with nonpositive weight");
    ratio[b] = sn / sd;
  }
  double mean = 0.0;
  for (double r : ratio) mean += r;
  mean /= batches;
  double varSum = 0.0;
  for (double r : ratio) varSum += (r - mean) * (r - mean);
  return std::sqrt(varSum / (static_cast<double>(batches) * (batches - 1)));
}

WeightedAccumulator::WeightedAccumulator(int P)
    : P_(P),
      rawNum_(Eigen::VectorXd::Zero(P)),
      rbNum_(Eigen::VectorXd::Zero(P)),
      betaDen_(Eigen::VectorXd::Zero(P)),
      betaNum_(Eigen::VectorXd::Zero(P)),
      betaSqNum_(Eigen::VectorXd::Zero(P)),
      mark_(P, 0) {}

void WeightedAccumulator::add(double w, std::span<const int> active,
                              std::span<const int> sweepIdx,
                              std::span<const double> sweepPips,
                              std::span<const double> betaMean,
                              std::span<const double> betaVar) {
  if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("weights must be finite and nonnegative");
  if (sweepIdx.size() != sweepPips.size())
    throw ShapeMismatch("sweep index/probability length mismatch");
  ++n_;
  wSum_ += w;
  wSqSum_ += w * w;
  for (int j : active) {
    rawNum_(j) += w;
    rbNum_(j) += w;
    mark_[j] = 1;
  }
  // Replace the indicator contribution by the conditional probability on the
  // swept coordinates: rbNum gains w * (q_j - gamma_j).
  for (std::size_t i = 0; i < sweepIdx.size(); ++i) {
    const int j = sweepIdx[i];
    rbNum_(j) += w * (sweepPips[i] - (mark_[j] ? 1.0 : 0.0));
  }
  if (!betaMean.empty()) {
    if (betaMean.size() != active.size() || betaVar.size() != active.size())
      throw ShapeMismatch("coefficient summary length mismatch");
    for (std::size_t i = 0; i < active.size(); ++i) {
      const int j = active[i];
      betaDen_(j) += w;
      betaNum_(j) += w * betaMean[i];
      betaSqNum_(j) += w * (betaVar[i] + betaMean[i] * betaMean[i]);
    }
  }
  for (int j : active) mark_[j] = 0;
}

void WeightedAccumulator::merge(const WeightedAccumulator& other) {
  if (other.P_ != P_) throw ShapeMismatch("accumulator dimension mismatch");
  n_ += other.n_;
  wSum_ += other.wSum_;
  wSqSum_ += other.wSqSum_;
  rawNum_ += other.rawNum_;
  rbNum_ += other.rbNum_;
  betaDen_ += other.betaDen_;
  betaNum_ += other.betaNum_;
  betaSqNum_ += other.betaSqNum_;
}

void WeightedAccumulator::check_nonempty() const {
  if (n_ == 0 || !(wSum_ > 0.0))
    throw EmptyChain("no retained samples with positive weight");
}

Eigen::VectorXd WeightedAccumulator::pip_raw() const {
  check_nonempty();
  return rawNum_ / wSum_;
}

Eigen::VectorXd WeightedAccumulator::pip_partial_rb() const {
  check_nonempty();
  return rbNum_ / wSum_;
}

double WeightedAccumulator::weight_variance() const {
  check_nonempty();
  return static_cast<double>(n_) * wSqSum_ / (wSum_ * wSum_) - 1.0;
}

double WeightedAccumulator::effective_sample_size() const {
  check_nonempty();
  return wSum_ * wSum_ / wSqSum_;
}

void WeightedAccumulator::coef_summaries(std::vector<double>& mean,
                                         std::vector<double>& sd) const {
  check_nonempty();
  mean.assign(P_, 0.0);
  sd.assign(P_, 0.0);
  for (int j = 0; j < P_; ++j) {
    if (!(betaDen_(j) > 0.0)) continue;
    const double m = betaNum_(j) / betaDen_(j);
    const double v = betaSqNum_(j) / betaDen_(j) - m * m;
    mean[j] = m;
    sd[j] = std::sqrt(std::max(v, 0.0));
  }
}

Eigen::VectorXd WeightedAccumulator::beta_model_averaged() const {
  check_nonempty();
  return betaNum_ / wSum_;
}

}  // namespace bvs
