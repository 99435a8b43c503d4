#include "bvs/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "bvs/util.hpp"

namespace bvs {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559005768;

// Gaussian elimination with partial pivoting on row-major storage. Solves
// A X = B for m right-hand sides and reports log|det A|, requiring det > 0.
// Deliberately not Eigen: the oracle must not share solver code with the
// incremental implementation it audits.
void gauss_solve(std::vector<double> a, std::vector<double>& b, int d, int m,
                 double* logdet) {
  double ld = 0.0;
  int sign = 1;
  for (int k = 0; k < d; ++k) {
    int piv = k;
    double best = std::fabs(a[k * d + k]);
    for (int r = k + 1; r < d; ++r) {
      const double v = std::fabs(a[r * d + k]);
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (!(best > 0.0)) throw NumericalError("singular matrix in reference solve");
    if (piv != k) {
      sign = -sign;
      for (int c = 0; c < d; ++c) std::swap(a[k * d + c], a[piv * d + c]);
      for (int c = 0; c < m; ++c) std::swap(b[k * m + c], b[piv * m + c]);
    }
    const double p = a[k * d + k];
    if (p < 0.0) sign = -sign;
    ld += std::log(std::fabs(p));
    for (int r = k + 1; r < d; ++r) {
      const double f = a[r * d + k] / p;
      if (f == 0.0) continue;
      for (int c = k; c < d; ++c) a[r * d + c] -= f * a[k * d + c];
      for (int c = 0; c < m; ++c) b[r * m + c] -= f * b[k * m + c];
    }
  }
  for (int k = d - 1; k >= 0; --k) {
    for (int c = 0; c < m; ++c) {
      double s = b[k * m + c];
      for (int j = k + 1; j < d; ++j) s -= a[k * d + j] * b[j * m + c];
      b[k * m + c] = s / a[k * d + k];
    }
  }
  if (sign <= 0) throw NumericalError("nonpositive determinant in reference solve");
  if (logdet) *logdet = ld;
}

double log_beta_fn(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double model_log_prior(int k, int P, double h, const BetaPrior* hBeta) {
  if (hBeta)
    return log_beta_fn(hBeta->alpha + k, hBeta->beta + P - k) -
           log_beta_fn(hBeta->alpha, hBeta->beta);
  return k * std::log(h) + (P - k) * std::log1p(-h);
}

std::vector<int> mask_bits(std::uint32_t mask, int P) {
  std::vector<int> cols;
  for (int j = 0; j < P; ++j)
    if (mask >> j & 1u) cols.push_back(j);
  return cols;
}

ExactPosterior normalize_table(std::vector<double> logUnnorm, int P) {
  const std::size_t M = logUnnorm.size();
  double best = logUnnorm[0];
  for (double v : logUnnorm) best = std::max(best, v);
  double total = 0.0;
  for (double v : logUnnorm) total += std::exp(v - best);
  const double logZ = best + std::log(total);

  ExactPosterior out;
  out.logEvidence = logZ;
  out.modelLogProbs.resize(M);
  out.pips = Eigen::VectorXd::Zero(P);
  for (std::size_t mask = 0; mask < M; ++mask) {
    out.modelLogProbs[mask] = logUnnorm[mask] - logZ;
    const double p = std::exp(out.modelLogProbs[mask]);
    for (int j = 0; j < P; ++j)
      if (mask >> j & 1u) out.pips(j) += p;
  }
  return out;
}

// ---- quadrature support ----------------------------------------------------

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::fabs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

struct CountModel {
  const Dataset& data;
  std::vector<int> active;  // covariate columns; coefficient 0 is the bias
  double tau, tauBias, nu;

  int dim() const { return static_cast<int>(active.size()) + 1; }

  double psi_row(int n, const std::vector<double>& beta) const {
    double psi = beta[0];
    for (std::size_t j = 0; j < active.size(); ++j)
      psi += data.X(n, active[j]) * beta[j + 1];
    return psi;
  }

  // Full log joint of (Y, beta) for this model, prior normalization included.
  double log_joint(const std::vector<double>& beta) const {
    const int N = data.n();
    double g = 0.0;
    for (int n = 0; n < N; ++n) {
      const double psi = psi_row(n, beta);
      const double y = data.Y(n);
      if (data.kind == Likelihood::Binomial) {
        const double c = data.C(n);
        g += std::lgamma(c + 1.0) - std::lgamma(y + 1.0) - std::lgamma(c - y + 1.0) +
             y * psi - c * log1pexp(psi);
      } else {
        const double xi = psi + data.psi0 - std::log(nu);
        g += std::lgamma(y + nu) - std::lgamma(nu) - std::lgamma(y + 1.0) + y * xi -
             (y + nu) * log1pexp(xi);
      }
    }
    for (int j = 0; j < dim(); ++j) {
      const double prec = j == 0 ? tauBias : tau;
      g += 0.5 * std::log(prec / kTwoPi) - 0.5 * prec * beta[j] * beta[j];
    }
    return g;
  }

  void grad_hess(const std::vector<double>& beta, std::vector<double>& grad,
                 std::vector<double>& hess) const {
    const int d = dim();
    const int N = data.n();
    grad.assign(d, 0.0);
    hess.assign(d * d, 0.0);
    for (int n = 0; n < N; ++n) {
      const double psi = psi_row(n, beta);
      double g1, g2;  // d/dpsi and d2/dpsi2 of the row log likelihood
      if (data.kind == Likelihood::Binomial) {
        const double s = logistic(psi);
        g1 = data.Y(n) - data.C(n) * s;
        g2 = -data.C(n) * s * (1.0 - s);
      } else {
        const double s = logistic(psi + data.psi0 - std::log(nu));
        const double b = data.Y(n) + nu;
        g1 = data.Y(n) - b * s;
        g2 = -b * s * (1.0 - s);
      }
      for (int j = 0; j < d; ++j) {
        const double xj = j == 0 ? 1.0 : data.X(n, active[j - 1]);
        grad[j] += g1 * xj;
        for (int k = 0; k <= j; ++k) {
          const double xk = k == 0 ? 1.0 : data.X(n, active[k - 1]);
          hess[j * d + k] += g2 * xj * xk;
        }
      }
    }
    for (int j = 0; j < d; ++j) {
      const double prec = j == 0 ? tauBias : tau;
      grad[j] -= prec * beta[j];
      hess[j * d + j] -= prec;
      for (int k = j + 1; k < d; ++k) hess[j * d + k] = hess[k * d + j];
    }
  }
};

// Posterior mode and Laplace scales by damped Newton on the log-concave joint.
void find_mode(const CountModel& model, std::vector<double>& mode,
               std::vector<double>& sd) {
  const int d = model.dim();
  mode.assign(d, 0.0);
  std::vector<double> grad, hess, step;
  double g = model.log_joint(mode);
  for (int iter = 0; iter < 200; ++iter) {
    model.grad_hess(mode, grad, hess);
    double gmax = 0.0;
    for (double v : grad) gmax = std::max(gmax, std::fabs(v));
    if (gmax < 1e-10) break;
    std::vector<double> negH(d * d);
    for (int i = 0; i < d * d; ++i) negH[i] = -hess[i];
    step = grad;
    gauss_solve(negH, step, d, 1, nullptr);
    double scale = 1.0;
    for (int tries = 0; tries < 40; ++tries) {
      std::vector<double> cand(d);
      for (int j = 0; j < d; ++j) cand[j] = mode[j] + scale * step[j];
      const double gc = model.log_joint(cand);
      if (gc >= g) {
        mode = cand;
        g = gc;
        break;
      }
      scale *= 0.5;
    }
  }
  std::vector<double> grad2, hess2;
  model.grad_hess(mode, grad2, hess2);
  std::vector<double> negH(d * d);
  for (int i = 0; i < d * d; ++i) negH[i] = -hess2[i];
  std::vector<double> inv(d * d, 0.0);
  for (int j = 0; j < d; ++j) inv[j * d + j] = 1.0;
  gauss_solve(negH, inv, d, d, nullptr);
  sd.resize(d);
  for (int j = 0; j < d; ++j) {
    if (!(inv[j * d + j] > 0.0))
      throw NumericalError("nonpositive curvature at the posterior mode");
    sd[j] = std::sqrt(inv[j * d + j]);
  }
}

double tensor_quadrature(const CountModel& model, const std::vector<double>& mode,
                         const std::vector<double>& sd, int n) {
  const int d = model.dim();
  std::vector<double> gx, gw;
  gauss_legendre(n, gx, gw);
  // per-dimension nodes over mode +- 10 sd
  std::vector<std::vector<double>> nodes(d), weights(d);
  for (int j = 0; j < d; ++j) {
    const double half = 10.0 * sd[j];
    nodes[j].resize(n);
    weights[j].resize(n);
    for (int i = 0; i < n; ++i) {
      nodes[j][i] = mode[j] + half * gx[i];
      weights[j][i] = gw[i] * half;
    }
  }
  const double gMode = model.log_joint(mode);
  std::vector<int> idx(d, 0);
  std::vector<double> beta(d);
  double total = 0.0;
  for (;;) {
    double lw = 0.0;
    for (int j = 0; j < d; ++j) {
      beta[j] = nodes[j][idx[j]];
      lw += std::log(weights[j][idx[j]]);
    }
    total += std::exp(model.log_joint(beta) - gMode + lw);
    int j = 0;
    for (; j < d; ++j) {
      if (++idx[j] < n) break;
      idx[j] = 0;
    }
    if (j == d) break;
  }
  if (!(total > 0.0)) throw NumericalError("quadrature mass underflowed");
  return gMode + std::log(total);
}

}  // namespace

double ExactPosterior::conditional_pip(std::uint32_t mask, int i) const {
  const double on = modelLogProbs[mask | (1u << i)];
  const double off = modelLogProbs[mask & ~(1u << i)];
  const double m = std::max(on, off);
  return std::exp(on - m) / (std::exp(on - m) + std::exp(off - m));
}

ExactPosterior enumerate_linear(const Dataset& data, double h, double tau,
                                bool includeBias, double tauBias,
                                const BetaPrior* hBeta) {
  if (data.kind != Likelihood::Linear)
    throw ConfigError("exhaustive enumeration covers the linear likelihood only");
  const int P = data.p();
  const int N = data.n();
  if (P > 20) throw TooLarge("enumeration is limited to 20 covariates");
  if (!hBeta && !(h > 0.0 && h < 1.0)) throw DomainError("h must lie inside (0, 1)");
  if (tauBias <= 0.0) tauBias = tau;

  // Plain-loop sufficient statistics.
  std::vector<double> gram(static_cast<std::size_t>(P) * P, 0.0);
  std::vector<double> xy(P, 0.0), colSum(P, 0.0);
  double syy = 0.0, ySum = 0.0;
  for (int n = 0; n < N; ++n) {
    syy += data.Y(n) * data.Y(n);
    ySum += data.Y(n);
  }
  for (int i = 0; i < P; ++i) {
    for (int n = 0; n < N; ++n) {
      xy[i] += data.X(n, i) * data.Y(n);
      colSum[i] += data.X(n, i);
    }
    for (int j = 0; j <= i; ++j) {
      double s = 0.0;
      for (int n = 0; n < N; ++n) s += data.X(n, i) * data.X(n, j);
      gram[i * P + j] = s;
      gram[j * P + i] = s;
    }
  }

  const double constN = -0.5 * N * std::log(kTwoPi) + std::lgamma(0.5 * N) +
                        0.5 * N * std::log(2.0);
  const std::uint32_t M = 1u << P;
  std::vector<double> logUnnorm(M);
  for (std::uint32_t mask = 0; mask < M; ++mask) {
    const std::vector<int> cols = mask_bits(mask, P);
    const int nc = static_cast<int>(cols.size());
    const int d = nc + (includeBias ? 1 : 0);
    double loglik;
    if (d == 0) {
      loglik = -0.5 * N * std::log(syy) + constN;
    } else {
      std::vector<double> A(static_cast<std::size_t>(d) * d);
      std::vector<double> z(d);
      const int off = includeBias ? 1 : 0;
      if (includeBias) {
        A[0] = N + tauBias;
        z[0] = ySum;
        for (int j = 0; j < nc; ++j) {
          A[0 * d + j + 1] = colSum[cols[j]];
          A[(j + 1) * d + 0] = colSum[cols[j]];
        }
      }
      for (int i = 0; i < nc; ++i) {
        z[i + off] = xy[cols[i]];
        for (int j = 0; j < nc; ++j)
          A[(i + off) * d + j + off] = gram[cols[i] * P + cols[j]] + (i == j ? tau : 0.0);
      }
      std::vector<double> sol = z;
      double logdet = 0.0;
      gauss_solve(A, sol, d, 1, &logdet);
      double quad = 0.0;
      for (int i = 0; i < d; ++i) quad += z[i] * sol[i];
      const double resid = syy - quad;
      if (!(resid > 0.0))
        throw NumericalError("explained sum of squares reached the response norm");
      loglik = 0.5 * ((includeBias ? std::log(tauBias) : 0.0) + nc * std::log(tau)) -
               0.5 * logdet - 0.5 * N * std::log(resid) + constN;
    }
    logUnnorm[mask] = loglik + model_log_prior(nc, P, h, hBeta);
  }
  return normalize_table(std::move(logUnnorm), P);
}

double quadrature_count_evidence(const Dataset& data, const std::vector<int>& active,
                                 double tau, double tauBias, double nu,
                                 double relTol) {
  if (data.kind == Likelihood::Linear)
    throw ConfigError("quadrature evidence covers count likelihoods only");
  if (tauBias <= 0.0) tauBias = tau;
  CountModel model{data, active, tau, tauBias, nu};
  std::vector<double> mode, sd;
  find_mode(model, mode, sd);
  double prev = 0.0;
  bool havePrev = false;
  for (int n : {16, 32, 64, 128}) {
    const double cur = tensor_quadrature(model, mode, sd, n);
    if (havePrev && std::fabs(cur - prev) <= relTol) return cur;
    prev = cur;
    havePrev = true;
  }
  throw QuadratureNotConverged("evidence quadrature did not stabilize");
}

ExactPosterior quadrature_count(const Dataset& data, double h, double tau,
                                double relTol, double nu, double tauBias,
                                const BetaPrior* hBeta) {
  const int P = data.p();
  if (P > 3) throw TooLarge("quadrature posterior is limited to 3 covariates");
  if (!hBeta && !(h > 0.0 && h < 1.0)) throw DomainError("h must lie inside (0, 1)");
  const std::uint32_t M = 1u << P;
  std::vector<double> logUnnorm(M);
  for (std::uint32_t mask = 0; mask < M; ++mask) {
    const std::vector<int> cols = mask_bits(mask, P);
    logUnnorm[mask] = quadrature_count_evidence(data, cols, tau, tauBias, nu, relTol) +
                      model_log_prior(static_cast<int>(cols.size()), P, h, hBeta);
  }
  return normalize_table(std::move(logUnnorm), P);
}

double detailed_balance_check(const Dataset& data, int S, int A,
                              const std::vector<int>& anchor, double h, double tau,
                              double epsilon, double etaBias) {
  const int P = data.p();
  if (P > 4) throw TooLarge("detailed-balance audit is limited to 4 covariates");
  if (static_cast<int>(anchor.size()) != A || A >= S || S > P)
    throw ConfigError("need |anchor| = A < S <= P");
  for (int a : anchor)
    if (a < 0 || a >= P) throw DomainError("anchor index out of range");
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");

  const ExactPosterior exact = enumerate_linear(data, h, tau);

  // Size-S subsets of {0..P-1} containing the anchor, encoded as bitmasks.
  std::uint32_t anchorMask = 0;
  for (int a : anchor) anchorMask |= 1u << a;
  std::vector<std::uint32_t> subsets;
  for (std::uint32_t m = 0; m < (1u << P); ++m)
    if (__builtin_popcount(m) == S && (m & anchorMask) == anchorMask)
      subsets.push_back(m);
  const int nSub = static_cast<int>(subsets.size());
  std::vector<int> subIndex(1u << P, -1);
  for (int s = 0; s < nSub; ++s) subIndex[subsets[s]] = s;

  const auto choose = [](int n, int k) {
    double c = 1.0;
    for (int i = 0; i < k; ++i) c = c * (n - i) / (i + 1);
    return c;
  };
  // U(S' | i, anchor): uniform over size-S supersets of anchor + {i}.
  std::vector<double> uval(P);
  for (int i = 0; i < P; ++i) {
    const bool inA = (anchorMask >> i & 1u) != 0;
    uval[i] = 1.0 / choose(P - A - (inA ? 0 : 1), S - A - (inA ? 0 : 1));
  }

  const std::uint32_t nGamma = 1u << P;
  const int nStates = static_cast<int>(nGamma) * nSub;
  std::vector<double> F(nStates, 0.0);
  std::vector<double> K(static_cast<std::size_t>(nStates) * nStates, 0.0);

  for (std::uint32_t m = 0; m < nGamma; ++m) {
    const double post = std::exp(exact.modelLogProbs[m]);
    for (int s = 0; s < nSub; ++s) {
      const int state = static_cast<int>(m) * nSub + s;
      double phi = 0.0;
      std::vector<double> sel;
      std::vector<int> members;
      for (int i = 0; i < P; ++i) {
        if (!(subsets[s] >> i & 1u)) continue;
        const double q = exact.conditional_pip(m, i);
        const double ptil = (m >> i & 1u) ? q : 1.0 - q;
        const double eta = q + epsilon / P;
        phi += 0.5 * eta / ptil * uval[i];
        const double etaSel = eta + (i == 0 ? etaBias : 0.0);
        sel.push_back(0.5 * etaSel / ptil * uval[i]);
        members.push_back(i);
      }
      F[state] = post * phi;
      double selTotal = 0.0;
      for (double v : sel) selTotal += v;
      for (std::size_t t = 0; t < members.size(); ++t) {
        const int i = members[t];
        const double fi = sel[t] / selTotal;
        const std::uint32_t mNext = m ^ (1u << i);
        for (int s2 = 0; s2 < nSub; ++s2) {
          if (!(subsets[s2] >> i & 1u)) continue;
          K[static_cast<std::size_t>(state) * nStates +
            static_cast<int>(mNext) * nSub + s2] += fi * uval[i];
        }
      }
    }
  }

  double fTotal = 0.0;
  for (double v : F) fTotal += v;
  for (double& v : F) v /= fTotal;

  double worst = 0.0;
  for (int s = 0; s < nStates; ++s)
    for (int t = 0; t < nStates; ++t) {
      const double fwd = F[s] * K[static_cast<std::size_t>(s) * nStates + t];
      const double bwd = F[t] * K[static_cast<std::size_t>(t) * nStates + s];
      worst = std::max(worst, std::fabs(fwd - bwd));
    }
  return worst;
}

}  // namespace bvs
