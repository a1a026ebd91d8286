#pragma once

#include <Eigen/Core>
#include <vector>

#include "factorcop/bicop.hpp"
#include "factorcop/dataset.hpp"
#include "factorcop/gaussian_factor.hpp"
#include "factorcop/groups.hpp"
#include "factorcop/quadrature.hpp"
#include "factorcop/rng.hpp"

namespace factorcop {

using RowRef = Eigen::Ref<const Eigen::RowVectorXd>;

// Factor copula model built from bivariate links.
//   1-factor: global_links[j]  joins U_j with V.
//   bi-factor: global_links[j] joins U_jg with V_0;
//              local_links[j]  joins U_jg with V_g given V_0.
//   oblique:  local_links[j]   joins U_jg with V_g;
//             latent_links[g]  joins V_g with the latent common factor of
//             the nested 1-factor latent copula.
struct CopulaFactorModel {
  FactorKind kind = FactorKind::OneFactor;
  GroupStructure groups;
  std::vector<BivariateCopula> global_links;
  std::vector<BivariateCopula> local_links;
  std::vector<BivariateCopula> latent_links;

  int dim() const { return groups.total(); }
  void validate() const;
};

// log prod_j c_j(u_j, v): the joint density of a row and the latent value.
double log_density_1factor_given_v(const CopulaFactorModel& model, RowRef u, double v);

// fills out[k] = log density of the row at quadrature node k
void node_log_densities_1factor(const CopulaFactorModel& model, RowRef u,
                                const QuadratureRule& rule, double* out);

double loglik_1factor(const CopulaFactorModel& model, RowRef u, const QuadratureRule& rule);

// log f_g(u_g; v0): the group-inner integral over v_g given v0.
double log_group_inner_integral(const CopulaFactorModel& model, int g, RowRef u_group,
                                double v0, const QuadratureRule& rule);

// log c_{U,V0}(u, v0): global-link terms plus the group-inner integrals.
double log_marginal_bifactor_v0(const CopulaFactorModel& model, RowRef u, double v0,
                                const QuadratureRule& rule);

double loglik_bifactor(const CopulaFactorModel& model, RowRef u, const QuadratureRule& rule);

// Two-level quadrature: outer over the nested latent common factor, inner
// per group.  Requires latent_links.
double loglik_oblique_nested(const CopulaFactorModel& model, RowRef u,
                             const QuadratureRule& rule);

// Sum of per-row log-likelihoods for the model's own kind.
double loglik(const CopulaFactorModel& model, const UniformData& u,
              const QuadratureRule& rule);

struct CopulaSample {
  UniformData u;
  LatentRealization latent;
};

CopulaSample simulate(const CopulaFactorModel& model, int n, Rng& rng);

}  // namespace factorcop
