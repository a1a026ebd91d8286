#pragma once

#include <string>
#include <utility>
#include <vector>

#include "factorcop/rng.hpp"

namespace factorcop {

enum class CopulaFamily { Independence, Gaussian, Frank, Gumbel, StudentT, BB1 };

// Counterclockwise rotations of the copula; 90/270 turn positive into
// negative dependence, 180 is the survival copula.
enum class Reflection { None, Deg90, Deg180, Deg270 };

struct ParamBox {
  std::vector<double> lower;
  std::vector<double> upper;
};

int param_count(CopulaFamily f);
const char* family_name(CopulaFamily f);
CopulaFamily family_from_name(const std::string& name);

// Bounds used by all fitting routines; strict sub-box of the admissible
// region so fitted links stay away from the comonotonic limit.
ParamBox param_box(CopulaFamily f);

// Optimization scale: log for Gumbel theta-1 and both BB1 parameters,
// atanh for correlations, log for Frank theta.
std::vector<double> to_unconstrained(CopulaFamily f, const std::vector<double>& params);
std::vector<double> from_unconstrained(CopulaFamily f, const std::vector<double>& s);

// Parametric bivariate copula; immutable, all member calls pure.
// Student-t keeps nu fixed at 5 with the correlation as the only free
// parameter.
class BivariateCopula {
 public:
  static constexpr double kStudentNu = 5.0;

  BivariateCopula();  // Independence
  BivariateCopula(CopulaFamily family, const std::vector<double>& params,
                  Reflection reflection = Reflection::None);

  CopulaFamily family() const { return family_; }
  Reflection reflection() const { return reflection_; }
  std::vector<double> params() const;
  double param(int i) const { return par_[i]; }
  int n_params() const { return npar_; }

  double cdf(double u, double v) const;
  double pdf(double u, double v) const;
  double log_pdf(double u, double v) const;

  // C_{U|V}(u|v) = dC/dv and C_{V|U}(v|u) = dC/du.
  double hfunc(double u, double v) const;
  double hfunc_dual(double u, double v) const;

  // u with hfunc(u, v) = p.
  double hfunc_inverse(double p, double v) const;

  std::pair<double, double> sample_pair(Rng& rng) const;

  double kendall_tau() const;

  std::string to_string() const;                       // e.g. "frank:7.3", "gumbel@90:2.5"
  static BivariateCopula parse(const std::string& spec);

 private:
  CopulaFamily family_;
  Reflection reflection_;
  double par_[2];
  int npar_;

  double base_log_pdf(double u, double v) const;
  double base_cdf(double u, double v) const;
  double base_hfunc(double u, double v) const;
  double base_hinv(double p, double v) const;
};

}  // namespace factorcop
