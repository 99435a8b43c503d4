#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bvs/errors.hpp"

namespace bvs {

enum class Likelihood { Linear, Binomial, NegBinomial };

// Chain flavors: Wtgs is the default (tempered flips with exploration
// weighting), Tgs drops the exploration weighting (eta = 1), Wgs keeps the
// weighting but drops tempering so flips go through a Metropolized-Gibbs
// accept step.
enum class Variant { Wtgs, Tgs, Wgs };

struct Dataset {
  Eigen::MatrixXd X;                // N x P covariates
  Eigen::VectorXd Y;                // N responses
  Eigen::VectorXd C;                // binomial total counts (size N or empty)
  Likelihood kind = Likelihood::Linear;
  double psi0 = 0.0;                // negative-binomial log-mean offset
  std::vector<std::string> names;   // covariate names; may be empty

  int n() const { return static_cast<int>(X.rows()); }
  int p() const { return static_cast<int>(X.cols()); }
};

struct BetaPrior {
  double alpha = 1.0;
  double beta = 1.0;
};

struct SamplerConfig {
  std::optional<double> h;          // fixed prior inclusion probability
  std::optional<BetaPrior> hBeta;   // Beta prior on h (exactly one of h/hBeta)
  double tau = 0.01;                // coefficient prior precision
  std::optional<double> tauBias;    // bias-column precision, defaults to tau
  double epsilon = 5.0;             // exploration constant in eta
  std::optional<double> xi;         // fixed untempered-state mass; absent = adapt
  double fOmega = 0.25;             // target fraction of untempered moves
  std::optional<int> subsetSize;    // S; absent = full index sweep
  int anchorSize = 0;               // A, required with subsetSize
  long iterations = 0;              // total MCMC iterations T
  long burnIn = 0;                  // discarded prefix, < T
  std::uint64_t seed = 0;
  double nuRwScale = 0.03;          // log-nu random-walk step
  bool includeBiasLinear = false;   // linear model intercept column
  Variant variant = Variant::Wtgs;
  bool precomputeGram = false;      // cache X^T X for the linear no-omega sweep

  double tau_bias() const { return tauBias.value_or(tau); }
};

// Inclusion indicator vector with a maintained sorted active list, so chains
// can touch only the active coordinates.
class GammaState {
 public:
  GammaState() = default;
  explicit GammaState(int P) : bits_(static_cast<std::size_t>(P), 0) {}

  static GammaState from_active(int P, std::span<const int> active);

  int p() const { return static_cast<int>(bits_.size()); }
  int size() const { return static_cast<int>(active_.size()); }
  bool bit(int j) const { return bits_[static_cast<std::size_t>(j)] != 0; }
  const std::vector<int>& active() const { return active_; }

  void flip(int j);

 private:
  std::vector<std::uint8_t> bits_;
  std::vector<int> active_;  // ascending
};

// Everything a chain mutates while it runs. sel records the most recent
// auxiliary index draw; -1 selects the untempered refresh move (the omega /
// nu / h update slot), covariate indices are 0-based otherwise.
struct ChainState {
  GammaState gamma;
  int sel = -1;
  Eigen::VectorXd omega;    // count likelihoods only
  double nu = 1.0;
  double h = 0.0;
  double xi = 0.0;
  std::vector<int> subset;  // ascending, subset chains only
  std::vector<int> anchor;  // ascending
  long t = 0;
  double rhoTilde = 0.0;
};

// Cross-checks dataset and configuration shapes, domains, and the supported
// flag combinations. Throws ShapeMismatch / DomainError / ConfigError.
void validate(const Dataset& data, const SamplerConfig& config);

}  // namespace bvs
