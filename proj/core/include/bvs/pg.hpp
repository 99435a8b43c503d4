#pragma once

#include "bvs/errors.hpp"
#include "bvs/rng.hpp"

namespace bvs {

// Polya-Gamma draws and moments.
//
// PG(b, z) admits the series representation
//   omega = (1 / (2 pi^2)) * sum_k g_k / ((k - 1/2)^2 + z^2 / (4 pi^2)),
// with g_k iid Gamma(b, 1). pg_draw_unit samples PG(1, z) exactly by the
// alternating-series rejection scheme on J*(1, z/2); pg_draw handles general
// shape b > 0 by composing unit draws (integer b <= 16) or by drawing the
// first 200 series terms exactly and closing the tail with a moment-matched
// Gamma variate.

double pg_draw_unit(Rng& rng, double z);

double pg_draw(Rng& rng, double b, double z);

// E[PG(b, z)] = b / (2 z) * tanh(z / 2); continuous at z = 0 (value b / 4).
double pg_mean(double b, double z);

// Var[PG(b, z)] = b (sinh z - z) sech^2(z / 2) / (4 z^3); b / 24 at z = 0.
double pg_variance(double b, double z);

}  // namespace bvs
