#include "bvs/types.hpp"

#include <algorithm>
#include <cmath>

namespace bvs {

namespace {

bool is_integer(double v) { return std::isfinite(v) && v == std::floor(v); }

}  // namespace

GammaState GammaState::from_active(int P, std::span<const int> active) {
  GammaState g(P);
  for (int j : active) {
    if (j < 0 || j >= P) throw DomainError("active index out of range");
    if (g.bit(j)) throw DomainError("duplicate active index");
    g.flip(j);
  }
  return g;
}

void GammaState::flip(int j) {
  if (j < 0 || j >= p()) throw DomainError("flip index out of range");
  auto pos = std::lower_bound(active_.begin(), active_.end(), j);
  if (bits_[static_cast<std::size_t>(j)]) {
    bits_[static_cast<std::size_t>(j)] = 0;
    active_.erase(pos);
  } else {
    bits_[static_cast<std::size_t>(j)] = 1;
    active_.insert(pos, j);
  }
}

void validate(const Dataset& data, const SamplerConfig& config) {
  const int N = data.n();
  const int P = data.p();
  if (N < 1 || P < 1) throw ShapeMismatch("X must be a nonempty N x P matrix");
  if (data.Y.size() != N) throw ShapeMismatch("Y length must match rows of X");
  if (!data.X.allFinite()) throw DomainError("X contains non-finite values");
  if (!data.Y.allFinite()) throw DomainError("Y contains non-finite values");
  if (!data.names.empty() && static_cast<int>(data.names.size()) != P)
    throw ShapeMismatch("covariate name count must match columns of X");

  switch (data.kind) {
    case Likelihood::Linear:
      if (data.C.size() != 0)
        throw ShapeMismatch("total counts are a binomial-only input");
      if (data.psi0 != 0.0)
        throw DomainError("psi0 applies to the negative-binomial likelihood only");
      break;
    case Likelihood::Binomial:
      if (data.C.size() != N)
        throw ShapeMismatch("binomial likelihood needs a total-count entry per row");
      for (int i = 0; i < N; ++i) {
        if (!is_integer(data.C[i]) || data.C[i] < 1.0)
          throw DomainError("total counts must be positive integers");
        if (!is_integer(data.Y[i]) || data.Y[i] < 0.0 || data.Y[i] > data.C[i])
          throw DomainError("binomial responses must be integers in [0, C]");
      }
      if (data.psi0 != 0.0)
        throw DomainError("psi0 applies to the negative-binomial likelihood only");
      break;
    case Likelihood::NegBinomial:
      if (data.C.size() != 0)
        throw ShapeMismatch("total counts are a binomial-only input");
      for (int i = 0; i < N; ++i)
        if (!is_integer(data.Y[i]) || data.Y[i] < 0.0)
          throw DomainError("count responses must be nonnegative integers");
      if (!std::isfinite(data.psi0)) throw DomainError("psi0 must be finite");
      break;
  }

  const bool count = data.kind != Likelihood::Linear;

  if (config.h.has_value() == config.hBeta.has_value())
    throw ConfigError("set exactly one of h and hBeta");
  if (config.h && !(*config.h > 0.0 && *config.h < 1.0))
    throw ConfigError("h must lie strictly inside (0, 1)");
  if (config.hBeta && !(config.hBeta->alpha > 0.0 && config.hBeta->beta > 0.0))
    throw ConfigError("hBeta shapes must be positive");
  if (!(config.tau > 0.0) || !std::isfinite(config.tau))
    throw ConfigError("tau must be positive and finite");
  if (config.tauBias && (!(*config.tauBias > 0.0) || !std::isfinite(*config.tauBias)))
    throw ConfigError("tauBias must be positive and finite");
  if (!(config.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (config.xi && !(*config.xi > 0.0)) throw ConfigError("xi must be positive");
  if (!(config.fOmega > 0.0 && config.fOmega < 1.0))
    throw ConfigError("fOmega must lie strictly inside (0, 1)");
  if (config.iterations < 1) throw ConfigError("iterations must be at least 1");
  if (config.burnIn < 0 || config.burnIn >= config.iterations)
    throw ConfigError("burnIn must satisfy 0 <= burnIn < iterations");
  if (!(config.nuRwScale > 0.0)) throw ConfigError("nuRwScale must be positive");

  if (config.subsetSize) {
    const int S = *config.subsetSize;
    const int A = config.anchorSize;
    if (S < 1 || S > P) throw ConfigError("subset size must satisfy 1 <= S <= P");
    if (A < 0 || A >= S) throw ConfigError("anchor size must satisfy 0 <= A < S");
    if (count && A < 1)
      throw ConfigError("count-likelihood subset chains need anchor size >= 1 "
                        "(the untempered slot is pinned into the anchor)");
    if (config.variant == Variant::Wgs)
      throw ConfigError("the wgs variant is not defined for subset chains");
    if (!count && config.hBeta)
      throw ConfigError("h inference with a subset chain is count-likelihood only");
  } else if (config.anchorSize != 0) {
    throw ConfigError("anchor size requires a subset size");
  }

  if (config.includeBiasLinear && count)
    throw ConfigError("includeBiasLinear applies to the linear likelihood only "
                      "(count likelihoods always carry the bias column)");
  if (config.precomputeGram && count)
    throw ConfigError("the Gram precompute shortcut exists for the linear likelihood only");
}

}  // namespace bvs
