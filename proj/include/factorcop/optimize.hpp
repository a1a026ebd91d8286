#pragma once

#include <Eigen/Core>
#include <functional>

namespace factorcop {

struct BrentResult {
  double x = 0.0;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Minimum of f on [lo, hi] (golden section with parabolic steps).
BrentResult brent_minimize(const std::function<double(double)>& f, double lo,
                           double hi, double tol = 1e-10, int max_iter = 200);

struct GoldenResult {
  double x = 0.0;
  double f = 0.0;
};

GoldenResult golden_section(const std::function<double(double)>& f, double lo,
                            double hi, double tol = 1e-10, int max_iter = 200);

struct BfgsOptions {
  int max_iter = 200;
  double grad_tol = 1e-6;   // inf-norm of gradient
  double f_tol = 1e-10;     // relative objective change
  double fd_step = 1e-5;    // central-difference step
};

struct BfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd grad;
  int iterations = 0;
  bool converged = false;
};

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;
using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

Eigen::VectorXd numerical_gradient(const ObjectiveFn& f, const Eigen::VectorXd& x,
                                   double step);

// Quasi-Newton minimization with a backtracking Armijo line search.
// When grad is absent, central differences with opts.fd_step are used.
BfgsResult bfgs_minimize(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                         const BfgsOptions& opts = {},
                         const GradientFn& grad = nullptr);

}  // namespace factorcop
