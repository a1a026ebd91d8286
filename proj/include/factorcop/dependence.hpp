#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "factorcop/bicop.hpp"
#include "factorcop/rng.hpp"

namespace factorcop {

struct TauResult {
  double tau = 0.0;
  bool degenerate = false;  // one input constant
};

// Kendall's tau-a by merge counting, O(N log N).
TauResult empirical_tau(const std::vector<double>& x, const std::vector<double>& y);
double empirical_tau(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

struct DependenceSummary {
  double tau = 0.0;
  double zeta_upper = 0.0;
  double zeta_lower = 0.0;
  int alpha_power = 20;
};

// tau from the closed form; tail-weighted measures as power-transform
// correlations Cor(U1^a, U2^a) and Cor((1-U1)^a, (1-U2)^a) estimated from
// mc_n simulated pairs.
DependenceSummary model_summary(const BivariateCopula& c, int mc_n, Rng& rng,
                                int alpha_power = 20);

// (count)^{-1} sum |est - truth| over all entries; shapes must match.
double mae_params(const Eigen::MatrixXd& est, const Eigen::MatrixXd& truth);

// mean absolute difference of Kendall's taus of two link sets
double tau_diff(const std::vector<BivariateCopula>& a, const std::vector<BivariateCopula>& b);

enum class DepMeasure { Tau, ZetaUpper, ZetaLower };

// D^{-1} sum_j |M(fitted_j) - M(true_j)|; zeta measures by Monte Carlo with
// per-link streams derived from the base seed.
double depmeas_diff(const std::vector<BivariateCopula>& fitted,
                    const std::vector<BivariateCopula>& truth, DepMeasure measure,
                    int mc_n, std::uint64_t seed);

// sqrt of the mean squared entry difference
double rmse_proxies(const Eigen::MatrixXd& proxy, const Eigen::MatrixXd& truth);

}  // namespace factorcop
