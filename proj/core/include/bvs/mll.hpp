#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bvs/types.hpp"

namespace bvs {

// Working response and its covariate projections. For count likelihoods this
// is the half-difference kappa of the augmented model; for the linear model z
// is simply X^T Y. offsetTerms collects the model-indexed but gamma-free
// additions to the marginal log-likelihood (nonzero for the negative
// binomial, whose kappa and tilt depend on nu and omega).
struct KappaZ {
  Eigen::VectorXd kappa;      // per-row working response (empty for linear)
  Eigen::VectorXd z;          // per-covariate projection, length P
  double zBias = 0.0;         // projection onto the all-ones bias column
  double offsetTerms = 0.0;
  double syy = 0.0;           // Y^T Y, linear only
};

// onlyCols, when nonempty, limits the z fill to those covariates (the other
// entries are left at zero); zBias and offsetTerms are always complete. Used
// on the hot path where a proposal only needs the active columns.
KappaZ make_kappa_z(const Dataset& data, const Eigen::VectorXd* omega, double nu,
                    std::span<const int> onlyCols = {});

// Read-only bundle tying one marginal-likelihood evaluation together.
struct Model {
  const Dataset* data = nullptr;
  const KappaZ* kz = nullptr;
  const Eigen::VectorXd* omega = nullptr;  // null for the linear likelihood
  double nu = 1.0;
  double tau = 0.01;
  double tauBias = 0.01;
  bool includeBias = false;  // always true for count likelihoods
};

// Cholesky factorization of A = Xs^T Xs + diag(prior precisions) over the
// active columns (bias first when present), plus the solved quantities every
// downstream operation reads. quad = Ztil^T Ztil, logdet = log det A, and
// loglik is the full marginal log-likelihood at this state.
struct ActiveFactorization {
  std::vector<int> cols;   // active covariate indices, ascending
  bool hasBias = false;
  Eigen::MatrixXd L;       // lower Cholesky factor of A
  Eigen::MatrixXd Xtil;    // Xs L^{-T}, N x d
  Eigen::VectorXd Ztil;    // L^{-1} z_active
  Eigen::MatrixXd Finv;    // A^{-1}
  Eigen::VectorXd Fz;      // A^{-1} z_active = conditional posterior mean of beta
  Eigen::VectorXd u;       // Xtil Ztil
  double quad = 0.0;
  double logdet = 0.0;
  double loglik = 0.0;

  int d() const { return static_cast<int>(L.rows()); }
  // Position of covariate k inside the factorization; requires k active.
  int position(int k) const;
};

// Dense reference evaluation: gathers the active columns, factorizes from
// scratch, no incremental reuse. The fast paths below must agree with this to
// about 1e-8 relative; tests enforce that.
double marginal_loglik_dense(const Model& model, const GammaState& gamma);

ActiveFactorization build_factorization(const Model& model, const GammaState& gamma);

// Marginal log-likelihood with covariate k added to / removed from the state
// the factorization was built at. Rank-one formulas only; throws
// NumericalError if cancellation destroys positive definiteness.
double loglik_add(const Model& model, const ActiveFactorization& fact, int k);
double loglik_drop(const Model& model, const ActiveFactorization& fact, int k);

// log Bayes factor of gamma_k = 1 vs 0 with the rest of gamma held at the
// factorization's state, for each requested covariate. Falls back to the
// dense path per index when the rank-one update is numerically unsafe.
void log_bayes_factors(const Model& model, const ActiveFactorization& fact,
                       std::span<const int> idx, std::span<double> logbf);

// Conditional inclusion probabilities p(gamma_k = 1 | gamma_{-k}, ...) under
// prior inclusion probability h, clamped to [1e-12, 1 - 1e-12].
void conditional_pips(const Model& model, const ActiveFactorization& fact, double h,
                      std::span<const int> idx, std::span<double> pips);

// Owns the per-chain caches: the working response, column norms under the
// current augmentation, the optional Gram matrix, and the factorization at
// the chain's current gamma. One full-index sweep per iteration costs
// O(|gamma| N P) (O(|gamma|^2 P) with the Gram cache); rebuilds cost
// O(N d^2 + d^3).
class PipEngine {
 public:
  PipEngine(const Dataset& data, double tau, double tauBias, bool includeBias,
            bool precomputeGram);

  // Installs the augmentation (omega must outlive the call; pass null for the
  // linear likelihood) and refreshes kappa/z and the column norms.
  void set_augmentation(const Eigen::VectorXd* omega, double nu);

  void rebuild(const GammaState& gamma);

  const ActiveFactorization& fact() const { return fact_; }
  const KappaZ& kz() const { return kz_; }
  Model model() const;

  // Batched log Bayes factors at the current base state. Uses one GEMM for a
  // full sweep, per-column products for subset sweeps.
  void log_bayes_factors(std::span<const int> idx, std::span<double> logbf);

  // Linear predictor X_active * Fz (+ bias) at the factorization state.
  Eigen::VectorXd psi_hat() const;

  // Conditional posterior mean and variance of each active coefficient (bias
  // excluded): count models use the Gaussian conditional variance Finv_jj;
  // the linear model scales Finv_jj by the posterior mean of sigma^2.
  void beta_summaries(std::vector<int>& idx, std::vector<double>& mean,
                      std::vector<double>& var, double* biasMean = nullptr) const;

 private:
  const Dataset& data_;
  double tau_, tauBias_;
  bool includeBias_;
  const Eigen::VectorXd* omega_ = nullptr;
  double nu_ = 1.0;
  KappaZ kz_;
  Eigen::VectorXd sqrtOmega_;   // count likelihoods
  Eigen::VectorXd sAll_;        // augmentation-weighted column square norms
  Eigen::MatrixXd gram_;        // optional X^T X (linear only)
  Eigen::VectorXd gramZt_;      // column sums X^T 1 for the Gram-path bias row
  ActiveFactorization fact_;
  // scratch buffers, grown on demand
  Eigen::MatrixXd scratchV_;
  Eigen::VectorXd scratchZdots_, scratchUw_, sweepVn2_;
  Eigen::MatrixXd scratchXtw_;
};

}  // namespace bvs
