#pragma once

// Scalar distribution functions used throughout: standard normal cdf and
// quantile, Student-t cdf/quantile/density via the regularized incomplete
// beta function, and the first Debye function for Frank's Kendall tau.

namespace factorcop {

double norm_cdf(double x);
double norm_logpdf(double x);

// Inverse of the standard normal cdf (Wichura's PPND16 rational
// approximations; relative accuracy near machine precision on (0,1)).
double norm_quantile(double p);

// Regularized incomplete beta function I_x(a, b), continued-fraction
// evaluation with the usual symmetry split.
double inc_beta(double a, double b, double x);

double student_t_cdf(double x, double nu);
double student_t_logpdf(double x, double nu);

// Newton inversion of student_t_cdf with a bracketing safeguard.
double student_t_quantile(double p, double nu);

// D_1(x) = (1/x) * int_0^x t/(e^t - 1) dt, x != 0.
double debye1(double x);

double log1mexp(double x);  // log(1 - exp(x)) for x < 0

}  // namespace factorcop
