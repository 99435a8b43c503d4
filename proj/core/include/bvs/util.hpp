#pragma once

#include <algorithm>
#include <cmath>

namespace bvs {

inline double log1pexp(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

// Conditional inclusion probabilities are clamped away from {0,1} so the
// tempered-flip denominators and the eta weights stay finite.
inline constexpr double kPipFloor = 1e-12;

inline double clamp_pip(double p) {
  return std::clamp(p, kPipFloor, 1.0 - kPipFloor);
}

inline double pip_from_logbf(double logbf, double h) {
  return clamp_pip(logistic(logbf + logit(h)));
}

}  // namespace bvs
