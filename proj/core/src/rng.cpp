#include "bvs/rng.hpp"

#include <cmath>

#include "bvs/errors.hpp"

namespace bvs {

namespace {

// 128-layer ziggurat tables for the standard normal. R is the base-strip
// right edge, V the common strip area; the published pair closes the
// recursion so the top cap also has area V.
constexpr double kZigR = 3.442619855899;
constexpr double kZigV = 9.91256303526217e-3;

struct ZigTables {
  double width[128];  // right edge of layer i (layer 0: base width V/f(R))
  double ratio[128];  // fast-accept threshold on the scaled uniform
  double fx[128];     // f(x_i) = exp(-x_i^2/2); fx[0] = 1 for the top wedge

  ZigTables() {
    const double fR = std::exp(-0.5 * kZigR * kZigR);
    width[127] = kZigR;
    fx[127] = fR;
    width[0] = kZigV / fR;
    ratio[0] = kZigR / width[0];
    fx[0] = 1.0;
    double prev = kZigR;
    for (int i = 126; i >= 1; --i) {
      const double f = kZigV / prev + std::exp(-0.5 * prev * prev);
      const double x = std::sqrt(-2.0 * std::log(f));
      width[i] = x;
      fx[i] = f;
      prev = x;
    }
    for (int i = 127; i >= 2; --i) ratio[i] = width[i - 1] / width[i];
    ratio[1] = 0.0;  // top cap always takes the wedge test
  }
};

const ZigTables& zig() {
  static const ZigTables tables;
  return tables;
}

}  // namespace

double Rng::normal() {
  const ZigTables& t = zig();
  for (;;) {
    const std::uint64_t r = engine_();
    const int iz = static_cast<int>(r & 127);
    const bool neg = (r >> 7) & 1;
    const double u = (static_cast<double>(r >> 11) + 0.5) * 0x1.0p-53;
    const double x = u * t.width[iz];
    if (u < t.ratio[iz]) return neg ? -x : x;
    if (iz == 0) {
      // Exact tail beyond R (Marsaglia 1964).
      double xt, yt;
      do {
        xt = -std::log(uniform()) / kZigR;
        yt = -std::log(uniform());
      } while (yt + yt < xt * xt);
      return neg ? -(kZigR + xt) : (kZigR + xt);
    }
    const double y = t.fx[iz] + uniform() * (t.fx[iz - 1] - t.fx[iz]);
    if (y < std::exp(-0.5 * x * x)) return neg ? -x : x;
  }
}

double Rng::exponential() { return -std::log(uniform()); }

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw DomainError("gamma shape must be positive");
  if (shape < 1.0) {
    const double u = uniform();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("beta shapes must be positive");
  const double ga = gamma(a);
  const double gb = gamma(b);
  const double s = ga + gb;
  if (s <= 0.0) return 0.5;  // both underflowed; zero-measure event
  return ga / s;
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  if (n == 0) throw DomainError("uniform_int needs n >= 1");
  if (n == 1) return 0;
  const std::uint64_t reject = (0 - n) % n;  // 2^64 mod n via wraparound
  std::uint64_t r;
  do {
    r = engine_();
  } while (r < reject);
  return r % n;
}

int Rng::categorical(std::span<const double> weights, double total) {
  if (weights.empty() || !(total > 0.0))
    throw DomainError("categorical needs positive total weight");
  const double target = uniform() * total;
  double cum = 0.0;
  int lastPositive = -1;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double w = weights[i];
    if (w <= 0.0) continue;
    lastPositive = static_cast<int>(i);
    cum += w;
    if (target <= cum) return lastPositive;
  }
  if (lastPositive < 0) throw DomainError("categorical needs a positive weight");
  return lastPositive;  // floating-point slack at the far end
}

double Rng::inverse_gaussian(double mu) {
  const double z = normal();
  const double v = z * z;
  double x = mu + 0.5 * mu * (mu * v - std::sqrt(4.0 * mu * v + mu * mu * v * v));
  if (x <= 0.0) x = mu * 1e-12;  // guard against cancellation at tiny v
  if (uniform() > mu / (mu + x)) x = mu * mu / x;
  return x;
}

}  // namespace bvs
