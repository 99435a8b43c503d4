#include "bvs/mll.hpp"

#include <algorithm>
#include <cmath>

#include "bvs/util.hpp"

namespace bvs {

namespace {

constexpr double kLn2 = 0.6931471805599453;

// Cholesky with an escalating diagonal jitter: base 1e-10 * trace/dim, then
// x10 twice more. Throws NumericalError when all attempts fail.
Eigen::LLT<Eigen::MatrixXd> llt_with_jitter(const Eigen::MatrixXd& A) {
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (A.rows() == 0 || llt.info() == Eigen::Success) return llt;
  const int d = static_cast<int>(A.rows());
  double jitter = 1e-10 * A.trace() / d;
  if (!(jitter > 0.0)) jitter = 1e-12;
  for (int attempt = 0; attempt < 3; ++attempt) {
    Eigen::MatrixXd Aj = A;
    Aj.diagonal().array() += jitter;
    llt.compute(Aj);
    if (llt.info() == Eigen::Success) return llt;
    jitter *= 10.0;
  }
  throw NumericalError("Cholesky factorization failed despite jitter");
}

struct BuildContext {
  const Dataset& data;
  const KappaZ& kz;
  const Eigen::VectorXd* omega = nullptr;
  const Eigen::VectorXd* sqrtOmega = nullptr;  // optional cache
  double tau = 0.0;
  double tauBias = 0.0;
  bool includeBias = false;
  const Eigen::MatrixXd* gram = nullptr;    // linear-only caches
  const Eigen::VectorXd* colSums = nullptr;
  bool wantXtil = true;
};

ActiveFactorization build_impl(const BuildContext& c, const std::vector<int>& cols) {
  const int N = c.data.n();
  const bool count = c.data.kind != Likelihood::Linear;
  const int nc = static_cast<int>(cols.size());
  const int d = nc + (c.includeBias ? 1 : 0);

  if (count && (!c.omega || c.omega->size() != N))
    throw ShapeMismatch("count likelihood needs an omega entry per row");

  ActiveFactorization f;
  f.cols = cols;
  f.hasBias = c.includeBias;

  Eigen::VectorXd sw;
  const Eigen::VectorXd* sqrtOmega = c.sqrtOmega;
  if (count && !sqrtOmega) {
    sw = c.omega->cwiseSqrt();
    sqrtOmega = &sw;
  }

  Eigen::MatrixXd A(d, d);
  Eigen::VectorXd zAct(d);
  Eigen::MatrixXd Xs;
  const bool useGram = c.gram != nullptr && !count;
  const bool needXs = !useGram || c.wantXtil;

  if (needXs) {
    Xs.resize(N, d);
    int pos = 0;
    if (c.includeBias) {
      if (count)
        Xs.col(pos) = *sqrtOmega;
      else
        Xs.col(pos).setOnes();
      ++pos;
    }
    for (int k : cols) {
      if (count)
        Xs.col(pos) = c.data.X.col(k).cwiseProduct(*sqrtOmega);
      else
        Xs.col(pos) = c.data.X.col(k);
      ++pos;
    }
  }

  if (useGram) {
    int off = c.includeBias ? 1 : 0;
    if (c.includeBias) {
      A(0, 0) = static_cast<double>(N);
      for (int j = 0; j < nc; ++j) {
        const double v = (*c.colSums)(cols[j]);
        A(0, j + 1) = v;
        A(j + 1, 0) = v;
      }
    }
    for (int j = 0; j < nc; ++j)
      for (int i = 0; i <= j; ++i) {
        const double v = (*c.gram)(cols[i], cols[j]);
        A(i + off, j + off) = v;
        A(j + off, i + off) = v;
      }
  } else {
    A.noalias() = Xs.transpose() * Xs;
  }

  {
    int pos = 0;
    if (c.includeBias) {
      A(0, 0) += c.tauBias;
      zAct(pos++) = c.kz.zBias;
    }
    for (int k : cols) {
      A(pos, pos) += c.tau;
      zAct(pos) = c.kz.z(k);
      ++pos;
    }
  }

  const auto llt = llt_with_jitter(A);
  f.L = llt.matrixL();
  f.Ztil = zAct;
  if (d > 0) llt.matrixL().solveInPlace(f.Ztil);
  f.Finv = llt.solve(Eigen::MatrixXd::Identity(d, d));
  f.Fz = llt.solve(zAct);
  f.quad = f.Ztil.squaredNorm();
  f.logdet = 2.0 * f.L.diagonal().array().log().sum();
  if (c.wantXtil) {
    f.Xtil = Xs;
    if (d > 0) llt.matrixU().solveInPlace<Eigen::OnTheRight>(f.Xtil);
    f.u.noalias() = f.Xtil * f.Ztil;
  }

  const double priorLogPrec =
      (c.includeBias ? std::log(c.tauBias) : 0.0) + nc * std::log(c.tau);
  if (count) {
    f.loglik = 0.5 * f.quad - 0.5 * f.logdet + 0.5 * priorLogPrec + c.kz.offsetTerms;
  } else {
    const double resid = c.kz.syy - f.quad;
    if (!(resid > 0.0))
      throw NumericalError("explained sum of squares reached the response norm");
    f.loglik = 0.5 * priorLogPrec - 0.5 * f.logdet - 0.5 * N * std::log(resid);
  }
  return f;
}

BuildContext context_of(const Model& m, bool wantXtil) {
  return BuildContext{*m.data, *m.kz,    m.omega, nullptr, m.tau,
                      m.tauBias, m.includeBias, nullptr, nullptr, wantXtil};
}

}  // namespace

KappaZ make_kappa_z(const Dataset& data, const Eigen::VectorXd* omega, double nu,
                    std::span<const int> onlyCols) {
  const int N = data.n();
  const int P = data.p();
  KappaZ kz;
  kz.z = Eigen::VectorXd::Zero(P);

  Eigen::VectorXd work;
  switch (data.kind) {
    case Likelihood::Linear:
      kz.syy = data.Y.squaredNorm();
      kz.zBias = data.Y.sum();
      work = data.Y;
      break;
    case Likelihood::Binomial:
      kz.kappa = data.Y - 0.5 * data.C;
      kz.zBias = kz.kappa.sum();
      work = kz.kappa;
      break;
    case Likelihood::NegBinomial: {
      if (!omega || omega->size() != N)
        throw ShapeMismatch("negative binomial needs an omega entry per row");
      if (!(nu > 0.0)) throw DomainError("nu must be positive");
      kz.kappa = 0.5 * (data.Y.array() - nu).matrix();
      const double tilt = data.psi0 - std::log(nu);
      work = kz.kappa - tilt * (*omega);
      kz.zBias = work.sum();
      double lg = 0.0;
      for (int i = 0; i < N; ++i) lg += std::lgamma(data.Y(i) + nu);
      lg -= N * (std::lgamma(nu) + nu * kLn2);
      kz.offsetTerms = lg + tilt * kz.kappa.sum() - 0.5 * tilt * tilt * omega->sum();
      break;
    }
  }

  if (onlyCols.empty()) {
    kz.z.noalias() = data.X.transpose() * work;
  } else {
    for (int k : onlyCols) {
      if (k < 0 || k >= P) throw DomainError("column index out of range");
      kz.z(k) = data.X.col(k).dot(work);
    }
  }
  return kz;
}

int ActiveFactorization::position(int k) const {
  const auto it = std::lower_bound(cols.begin(), cols.end(), k);
  if (it == cols.end() || *it != k) throw DomainError("covariate is not active");
  return static_cast<int>(it - cols.begin()) + (hasBias ? 1 : 0);
}

double marginal_loglik_dense(const Model& model, const GammaState& gamma) {
  return build_impl(context_of(model, /*wantXtil=*/false), gamma.active()).loglik;
}

ActiveFactorization build_factorization(const Model& model, const GammaState& gamma) {
  return build_impl(context_of(model, /*wantXtil=*/true), gamma.active());
}

double loglik_add(const Model& model, const ActiveFactorization& fact, int k) {
  const Dataset& data = *model.data;
  const bool count = data.kind != Likelihood::Linear;
  if (std::binary_search(fact.cols.begin(), fact.cols.end(), k))
    throw DomainError("loglik_add: covariate already active");

  Eigen::VectorXd xk = data.X.col(k);
  if (count) xk.array() *= model.omega->array().sqrt();
  const double s = xk.squaredNorm();
  double vn2 = 0.0, vz = 0.0;
  if (fact.d() > 0) {
    const Eigen::VectorXd v = fact.Xtil.transpose() * xk;
    vn2 = v.squaredNorm();
    vz = v.dot(fact.Ztil);
  }
  const double ginv = s + model.tau - vn2;
  if (!(ginv > 1e-10 * (s + model.tau)))
    throw NumericalError("rank-one add lost positive definiteness");
  const double numer = vz - model.kz->z(k);
  const double wsq = numer * numer / ginv;
  if (count)
    return fact.loglik + 0.5 * wsq - 0.5 * std::log(ginv) + 0.5 * std::log(model.tau);
  const double sBase = model.kz->syy - fact.quad;
  const double sAdd = sBase - wsq;
  if (!(sAdd > 0.0))
    throw NumericalError("rank-one add exhausted the residual sum of squares");
  return fact.loglik + 0.5 * std::log(model.tau) - 0.5 * std::log(ginv) -
         0.5 * data.n() * (std::log(sAdd) - std::log(sBase));
}

double loglik_drop(const Model& model, const ActiveFactorization& fact, int k) {
  const Dataset& data = *model.data;
  const bool count = data.kind != Likelihood::Linear;
  const int pos = fact.position(k);
  const double fkk = fact.Finv(pos, pos);
  const double fz = fact.Fz(pos);
  if (!(fkk > 0.0)) throw NumericalError("rank-one drop met a nonpositive pivot");
  if (count)
    return fact.loglik - 0.5 * fz * fz / fkk - 0.5 * std::log(fkk) -
           0.5 * std::log(model.tau);
  const double sBase = model.kz->syy - fact.quad;
  const double sDrop = sBase + fz * fz / fkk;
  return fact.loglik - 0.5 * std::log(model.tau) - 0.5 * std::log(fkk) -
         0.5 * data.n() * (std::log(sDrop) - std::log(sBase));
}

namespace {

double dense_flip_bf(const Model& model, const ActiveFactorization& fact, int k,
                     bool active) {
  GammaState g = GammaState::from_active(model.data->p(), fact.cols);
  g.flip(k);
  const double other = marginal_loglik_dense(model, g);
  return active ? fact.loglik - other : other - fact.loglik;
}

}  // namespace

void log_bayes_factors(const Model& model, const ActiveFactorization& fact,
                       std::span<const int> idx, std::span<double> logbf) {
  if (idx.size() != logbf.size()) throw ShapeMismatch("index/output size mismatch");
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const int k = idx[i];
    const bool active = std::binary_search(fact.cols.begin(), fact.cols.end(), k);
    try {
      logbf[i] = active ? fact.loglik - loglik_drop(model, fact, k)
                        : loglik_add(model, fact, k) - fact.loglik;
    } catch (const NumericalError&) {
      logbf[i] = dense_flip_bf(model, fact, k, active);
    }
  }
}

void conditional_pips(const Model& model, const ActiveFactorization& fact, double h,
                      std::span<const int> idx, std::span<double> pips) {
  if (!(h > 0.0 && h < 1.0)) throw DomainError("h must lie strictly inside (0, 1)");
  std::vector<double> bf(idx.size());
  log_bayes_factors(model, fact, idx, bf);
  for (std::size_t i = 0; i < idx.size(); ++i) pips[i] = pip_from_logbf(bf[i], h);
}

PipEngine::PipEngine(const Dataset& data, double tau, double tauBias, bool includeBias,
                     bool precomputeGram)
    : data_(data), tau_(tau), tauBias_(tauBias), includeBias_(includeBias) {
  const bool count = data.kind != Likelihood::Linear;
  if (count && !includeBias_)
    throw ConfigError("count likelihoods always include the bias column");
  if (!count) {
    sAll_ = data.X.colwise().squaredNorm();
    if (precomputeGram) {
      gram_.noalias() = data.X.transpose() * data.X;
      if (includeBias_) gramZt_ = data.X.colwise().sum();
    }
  } else if (precomputeGram) {
    throw ConfigError("the Gram precompute shortcut exists for the linear likelihood only");
  }
}

Model PipEngine::model() const {
  return Model{&data_, &kz_, omega_, nu_, tau_, tauBias_, includeBias_};
}

void PipEngine::set_augmentation(const Eigen::VectorXd* omega, double nu) {
  const bool count = data_.kind != Likelihood::Linear;
  omega_ = omega;
  nu_ = nu;
  kz_ = make_kappa_z(data_, omega, nu);
  if (count) {
    sqrtOmega_ = omega->cwiseSqrt();
    const int P = data_.p();
    sAll_.resize(P);
    for (int k = 0; k < P; ++k)
      sAll_(k) = (data_.X.col(k).array().square() * omega->array()).sum();
  }
}

void PipEngine::rebuild(const GammaState& gamma) {
  const bool count = data_.kind != Likelihood::Linear;
  const bool useGram = gram_.size() > 0;
  BuildContext c{data_,      kz_,  omega_, count ? &sqrtOmega_ : nullptr,
                 tau_,       tauBias_, includeBias_,
                 useGram ? &gram_ : nullptr,
                 useGram && includeBias_ ? &gramZt_ : nullptr,
                 /*wantXtil=*/!useGram};
  fact_ = build_impl(c, gamma.active());
}

void PipEngine::log_bayes_factors(std::span<const int> idx, std::span<double> out) {
  if (idx.size() != out.size()) throw ShapeMismatch("index/output size mismatch");
  const ActiveFactorization& f = fact_;
  const int d = f.d();
  const int N = data_.n();
  const int P = data_.p();
  const bool count = data_.kind != Likelihood::Linear;
  const bool useGram = gram_.size() > 0;
  const bool full = static_cast<int>(idx.size()) == P;
  const double logTau = std::log(tau_);
  const double sBase = count ? 0.0 : (kz_.syy - f.quad);

  // Stage the shared pieces of the add-side sweep.
  Eigen::VectorXd w;  // L^{-T} Ztil, Gram path
  const Eigen::MatrixXd* Xtw = nullptr;
  if (useGram) {
    w = f.Ztil;
    if (d > 0) f.L.transpose().triangularView<Eigen::Upper>().solveInPlace(w);
  } else if (d > 0) {
    if (count) {
      scratchXtw_ = f.Xtil;
      scratchXtw_.array().colwise() *= sqrtOmega_.array();
      Xtw = &scratchXtw_;
      scratchUw_ = sqrtOmega_.cwiseProduct(f.u);
    } else {
      Xtw = &f.Xtil;
      scratchUw_ = f.u;
    }
  }

  const int nc = static_cast<int>(f.cols.size());
  const int off = f.hasBias ? 1 : 0;

  if (full && d > 0) {
    if (static_cast<int>(scratchZdots_.size()) < P) scratchZdots_.resize(P);
    if (useGram) {
      Eigen::VectorXd zd = Eigen::VectorXd::Zero(P);
      if (f.hasBias) zd = gramZt_ * w(0);
      for (int j = 0; j < nc; ++j) zd.noalias() += gram_.col(f.cols[j]) * w(j + off);
      scratchZdots_.head(P) = zd;
      // vnorm^2 via chunked triangular solves of the gathered cross products
      const int B = 2048;
      if (scratchV_.rows() < d || scratchV_.cols() < B) scratchV_.resize(d, B);
      if (static_cast<int>(sweepVn2_.size()) < P) sweepVn2_.resize(P);
      for (int start = 0; start < P; start += B) {
        const int len = std::min(B, P - start);
        auto M = scratchV_.topLeftCorner(d, len);
        for (int c2 = 0; c2 < len; ++c2) {
          const int k = start + c2;
          if (f.hasBias) M(0, c2) = gramZt_(k);
          for (int j = 0; j < nc; ++j) M(j + off, c2) = gram_(f.cols[j], k);
        }
        f.L.triangularView<Eigen::Lower>().solveInPlace(M);
        sweepVn2_.segment(start, len) = M.colwise().squaredNorm();
      }
    } else {
      scratchZdots_.head(P).noalias() = data_.X.transpose() * scratchUw_;
      const int B = 2048;
      if (scratchV_.rows() < d || scratchV_.cols() < B) scratchV_.resize(d, B);
      if (static_cast<int>(sweepVn2_.size()) < P) sweepVn2_.resize(P);
      for (int start = 0; start < P; start += B) {
        const int len = std::min(B, P - start);
        auto V = scratchV_.topLeftCorner(d, len);
        V.noalias() = Xtw->transpose() * data_.X.middleCols(start, len);
        sweepVn2_.segment(start, len) = V.colwise().squaredNorm();
      }
    }
  }

  auto add_parts = [&](int k, double& ginv, double& numer) {
    double vn2 = 0.0, zd = 0.0;
    if (d > 0) {
      if (full) {
        vn2 = sweepVn2_(k);
        zd = scratchZdots_(k);
      } else if (useGram) {
        Eigen::VectorXd m(d);
        if (f.hasBias) m(0) = gramZt_(k);
        for (int j = 0; j < nc; ++j) m(j + off) = gram_(f.cols[j], k);
        zd = m.dot(w);
        f.L.triangularView<Eigen::Lower>().solveInPlace(m);
        vn2 = m.squaredNorm();
      } else {
        const auto xk = data_.X.col(k);
        zd = count ? xk.dot(scratchUw_) : xk.dot(f.u);
        Eigen::VectorXd v = Xtw->transpose() * xk;
        vn2 = v.squaredNorm();
      }
    }
    ginv = sAll_(k) + tau_ - vn2;
    numer = zd - kz_.z(k);
  };

  for (std::size_t i = 0; i < idx.size(); ++i) {
    const int k = idx[i];
    const bool active = std::binary_search(f.cols.begin(), f.cols.end(), k);
    if (active) {
      const int pos = f.position(k);
      const double fkk = f.Finv(pos, pos);
      const double fz = f.Fz(pos);
      if (!(fkk > 0.0)) {
        out[i] = dense_flip_bf(model(), f, k, true);
        continue;
      }
      if (count) {
        out[i] = 0.5 * fz * fz / fkk + 0.5 * std::log(fkk) + 0.5 * logTau;
      } else {
        const double sDrop = sBase + fz * fz / fkk;
        out[i] = 0.5 * logTau + 0.5 * std::log(fkk) +
                 0.5 * N * (std::log(sDrop) - std::log(sBase));
      }
    } else {
      double ginv, numer;
      add_parts(k, ginv, numer);
      if (!(ginv > 1e-10 * (sAll_(k) + tau_))) {
        out[i] = dense_flip_bf(model(), f, k, false);
        continue;
      }
      const double wsq = numer * numer / ginv;
      if (count) {
        out[i] = 0.5 * wsq - 0.5 * std::log(ginv) + 0.5 * logTau;
      } else {
        const double sAdd = sBase - wsq;
        if (!(sAdd > 0.0)) {
          out[i] = dense_flip_bf(model(), f, k, false);
          continue;
        }
        out[i] = 0.5 * logTau - 0.5 * std::log(ginv) -
                 0.5 * N * (std::log(sAdd) - std::log(sBase));
      }
    }
  }
}

Eigen::VectorXd PipEngine::psi_hat() const {
  const ActiveFactorization& f = fact_;
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(data_.n());
  int pos = 0;
  if (f.hasBias) psi.array() += f.Fz(pos++);
  for (int k : f.cols) psi.noalias() += data_.X.col(k) * f.Fz(pos++);
  return psi;
}

void PipEngine::beta_summaries(std::vector<int>& idx, std::vector<double>& mean,
                               std::vector<double>& var, double* biasMean) const {
  const ActiveFactorization& f = fact_;
  const bool count = data_.kind != Likelihood::Linear;
  const int off = f.hasBias ? 1 : 0;
  const int nc = static_cast<int>(f.cols.size());
  idx.assign(f.cols.begin(), f.cols.end());
  mean.resize(nc);
  var.resize(nc);
  double scale = 1.0;
  if (!count) {
    const double sBase = kz_.syy - f.quad;
    scale = sBase / std::max(data_.n() - 2, 1);  // posterior mean of sigma^2
  }
  for (int j = 0; j < nc; ++j) {
    mean[j] = f.Fz(j + off);
    var[j] = f.Finv(j + off, j + off) * scale;
  }
  if (biasMean) *biasMean = f.hasBias ? f.Fz(0) : 0.0;
}

}  // namespace bvs
