#pragma once

#include <Eigen/Core>
#include <stdexcept>

#include "factorcop/dataset.hpp"
#include "factorcop/groups.hpp"
#include "factorcop/rng.hpp"

namespace factorcop {

enum class FactorKind { OneFactor, BiFactor, Oblique };

const char* kind_name(FactorKind k);
FactorKind kind_from_name(const std::string& name);

// Structured Gaussian factor model with loading matrix A (D x p),
// idiosyncratic variances psi2, and, for the oblique structure, the latent
// correlation matrix.  p = 1, G+1 or G depending on the kind; 1-factor and
// bi-factor latents are independent.
struct GaussianFactorModel {
  FactorKind kind = FactorKind::OneFactor;
  GroupStructure groups;
  Eigen::MatrixXd loadings;
  Eigen::VectorXd psi2;
  Eigen::MatrixXd latent_corr;  // G x G, oblique only (empty otherwise)

  int dim() const { return static_cast<int>(loadings.rows()); }
  int factor_count() const { return static_cast<int>(loadings.cols()); }

  Eigen::MatrixXd latent_corr_or_identity() const;
  Eigen::MatrixXd implied_correlation() const;  // A Sigma_W A^T + Psi^2
  void validate() const;

  // column of the local factor for group g (bi-factor: 1+g; oblique: g)
  int local_column(int g) const;
};

GaussianFactorModel make_one_factor(const Eigen::VectorXd& alphas);
GaussianFactorModel make_bifactor(const GroupStructure& groups,
                                  const Eigen::VectorXd& global,
                                  const Eigen::VectorXd& local);
GaussianFactorModel make_oblique(const GroupStructure& groups,
                                 const Eigen::VectorXd& alphas,
                                 const Eigen::MatrixXd& latent_corr);

struct FactorScores {
  Eigen::MatrixXd w;  // N x p
};

// E(W | Z = z) row by row.  1-factor/bi-factor use the p x p solve
// (I + A^T Psi^{-2} A)^{-1} A^T Psi^{-2} z; the oblique default is the
// groupwise conditional mean E(W_g | Z_g), with the all-variable version
// behind the joint flag.
FactorScores regression_scores(const GaussianFactorModel& model, const NormalScores& z,
                               bool oblique_joint = false);

// Global score from the all-variable solve, then each group score from the
// correlation of (Z_g, W_0) with the global score plugged in.
FactorScores bifactor_scores_two_stage(const GaussianFactorModel& model,
                                       const NormalScores& z);

// Cov(W | Z): evaluates two algebraically equal forms and checks they
// agree to 1e-10 before returning.
Eigen::MatrixXd conditional_covariance(const GaussianFactorModel& model);
// The direct form alone (D x D solve), for cross-checks.
Eigen::MatrixXd conditional_covariance_direct(const GaussianFactorModel& model);

struct VarianceDecomposition {
  double term1;  // (1 + q_g)^{-1}
  double coeff;  // qtilde_g^2 (1 + q_g)^{-2}, multiplies Var(W_0 | Z)
};

VarianceDecomposition bifactor_variance_decomposition(const GaussianFactorModel& model,
                                                      int g);

struct QCondition {
  Eigen::MatrixXd q_bar;  // D^{-1} A^T Psi^{-2} A
  double condition_number;
};

QCondition q_matrix_condition(const GaussianFactorModel& model);

struct GaussianFitOptions {
  int max_iter = 300;
  double grad_tol = 1e-7;
  // warn threshold for the condition number diagnostic
  double condition_warn = 1e3;
};

class GaussianFitError : public std::runtime_error {
 public:
  GaussianFitError(const std::string& msg, GaussianFactorModel best_iterate)
      : std::runtime_error(msg), best(std::move(best_iterate)) {}
  GaussianFactorModel best;
};

// Structured ML fit of the sample correlation matrix; loadings
// sign-normalized so each column's largest-magnitude entry is positive.
GaussianFactorModel fit_gaussian(FactorKind kind, const NormalScores& z,
                                 const GroupStructure& groups,
                                 const GaussianFitOptions& opts = {});

// ML discrepancy log det(Sigma) + tr(Sigma^{-1} R) - log det(R) - D of the
// model against the sample correlation of z (lower is better).
double gaussian_discrepancy(const GaussianFactorModel& model, const NormalScores& z);

struct BlockFitInfo {
  int blocks = 0;
  int anchor_refits = 0;  // blocks refit because the anchor estimate was ~0
};

// Split variables into sequential blocks of size ~B (> 5), fit each block,
// align signs through anchor variables and concatenate; anchor estimates
// and the oblique latent correlation average across blocks.
GaussianFactorModel block_fit(FactorKind kind, const NormalScores& z,
                              const GroupStructure& groups, int block_size,
                              const GaussianFitOptions& opts = {},
                              BlockFitInfo* info = nullptr);

enum class ResidualKind { Iid, Antedep1, Dominating };

struct ResidualSpec {
  ResidualKind kind = ResidualKind::Iid;
  double r1 = 0.0;
  double r2 = 0.0;
};

// Residual correlation matrix: identity, order-1 ante-dependence
// (omega_{j,j+1} ~ U(r1,r2), longer lags by products) or a dominating
// first variable (omega_{1j} ~ U(r1,r2), omega_{jk} = omega_{1j}omega_{1k}).
Eigen::MatrixXd residual_correlation(const ResidualSpec& spec, int dim, Rng& rng);

struct GaussianSample {
  NormalScores z;
  Eigen::MatrixXd w;  // latent draws, N x p
};

GaussianSample simulate_gaussian(const GaussianFactorModel& model, int n, Rng& rng,
                                 const ResidualSpec& residual = {});

}  // namespace factorcop
