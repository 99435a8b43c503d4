#pragma once

#include <cstdint>
#include <span>

#include <random>

namespace bvs {

// Seeded random stream with every sampling algorithm spelled out so that a
// given seed reproduces a run bit-for-bit on one platform. std::mt19937_64 is
// the only stdlib facility used; its output sequence is fixed by the C++
// standard. std::normal_distribution and friends are avoided on purpose:
// their internals vary across standard libraries.
//
// Draw order is part of the chain determinism contract. Every method consumes
// a documented number of raw 64-bit words per call (rejection samplers consume
// a variable but seed-determined count).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on the open interval (0,1); 53-bit resolution, never exactly 0 or 1.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via a 128-layer ziggurat (Marsaglia & Tsang 2000), with
  // the classic exact tail sampler beyond x = 3.4426. Typically one word per
  // draw.
  double normal();

  // Exponential(1).
  double exponential();

  // Gamma(shape, 1) by Marsaglia-Tsang squeeze; shape < 1 uses the boost
  // Gamma(shape+1) * U^{1/shape} identity. Requires shape > 0.
  double gamma(double shape);
  double gamma(double shape, double scale) { return gamma(shape) * scale; }

  // Beta(a, b) as Ga/(Ga+Gb).
  double beta(double a, double b);

  // Uniform integer in {0, ..., n-1}; n >= 1. Rejection keeps it exact.
  std::uint64_t uniform_int(std::uint64_t n);

  // Index draw proportional to nonnegative weights; total must equal their
  // sum. One uniform, then a prefix scan, so ties in floating point resolve
  // deterministically toward lower indices.
  int categorical(std::span<const double> weights, double total);

  bool bernoulli(double p) { return uniform() < p; }

  // Inverse Gaussian(mu, lambda=1), used by the Polya-Gamma sampler.
  double inverse_gaussian(double mu);

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace bvs
