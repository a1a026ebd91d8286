#include "factorcop/bicop.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "factorcop/stats.hpp"

namespace factorcop {

namespace {

constexpr double kEps = 1e-14;

double clamp01(double x) {
  if (x < kEps) return kEps;
  if (x > 1.0 - kEps) return 1.0 - kEps;
  return x;
}

// log(exp(a) + exp(b)) without overflow
double logadd(double a, double b) {
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

// ---- Frank --------------------------------------------------------------
// Stable pieces: E = 1-e^{-th}, A = 1-e^{-th u}, B = 1-e^{-th v}.
// The denominator E - A*B is computed as (e^{-th u}-e^{-th}) +
// e^{-th v}(1-e^{-th u}), both nonnegative for th > 0.

double frank_denom(double th, double u, double v) {
  return (std::exp(-th * u) - std::exp(-th)) +
         std::exp(-th * v) * (-std::expm1(-th * u));
}

double frank_log_pdf(double th, double u, double v) {
  const double e = -std::expm1(-th);  // sign matches th
  const double den = frank_denom(th, u, v);
  return std::log(th * e) - th * (u + v) - 2.0 * std::log(std::fabs(den));
}

double frank_cdf(double th, double u, double v) {
  const double e = -std::expm1(-th);
  const double den = frank_denom(th, u, v);
  return -(std::log(std::fabs(den)) - std::log(std::fabs(e))) / th;
}

double frank_hfunc(double th, double u, double v) {
  const double a = -std::expm1(-th * u);
  return std::exp(-th * v) * a / frank_denom(th, u, v);
}

double frank_hinv(double th, double p, double v) {
  const double e = std::expm1(-th);
  const double b = std::expm1(-th * v);
  return -std::log1p(p * e / (1.0 + b * (1.0 - p))) / th;
}

// ---- Gaussian -----------------------------------------------------------

double gauss_log_pdf(double rho, double u, double v) {
  const double x = norm_quantile(u), y = norm_quantile(v);
  const double r2 = 1.0 - rho * rho;
  return -0.5 * std::log(r2) -
         (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2);
}

double gauss_hfunc(double rho, double u, double v) {
  const double x = norm_quantile(u), y = norm_quantile(v);
  return norm_cdf((x - rho * y) / std::sqrt(1.0 - rho * rho));
}

double gauss_hinv(double rho, double p, double v) {
  const double y = norm_quantile(v);
  return norm_cdf(norm_quantile(p) * std::sqrt(1.0 - rho * rho) + rho * y);
}

// ---- Student t (nu fixed) -----------------------------------------------

double t_log_pdf(double rho, double nu, double u, double v) {
  const double x = student_t_quantile(u, nu), y = student_t_quantile(v, nu);
  const double r2 = 1.0 - rho * rho;
  const double quad = (x * x - 2.0 * rho * x * y + y * y) / (nu * r2);
  // log f2(x,y) - log f(x) - log f(y) with the bivariate-t normalizer
  // Gamma((nu+2)/2)/Gamma(nu/2) = nu/2
  const double lf2 = -std::log(2.0 * M_PI) - 0.5 * std::log(r2) -
                     0.5 * (nu + 2.0) * std::log1p(quad);
  return lf2 - student_t_logpdf(x, nu) - student_t_logpdf(y, nu);
}

double t_hfunc(double rho, double nu, double u, double v) {
  const double x = student_t_quantile(u, nu), y = student_t_quantile(v, nu);
  const double scale = std::sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0));
  return student_t_cdf((x - rho * y) / scale, nu + 1.0);
}

double t_hinv(double rho, double nu, double p, double v) {
  const double y = student_t_quantile(v, nu);
  const double scale = std::sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0));
  const double x = student_t_quantile(p, nu + 1.0) * scale + rho * y;
  return student_t_cdf(x, nu);
}

// ---- Gumbel -------------------------------------------------------------

double gumbel_logT(double th, double u, double v) {
  // log T with T = (x^th + y^th)^{1/th}, x = -log u, y = -log v
  const double lx = std::log(-std::log(u)), ly = std::log(-std::log(v));
  const double a = th * lx, b = th * ly;
  const double m = std::max(a, b);
  return (m + std::log1p(std::exp(std::min(a, b) - m))) / th;
}

double gumbel_cdf(double th, double u, double v) {
  return std::exp(-std::exp(gumbel_logT(th, u, v)));
}

double gumbel_log_pdf(double th, double u, double v) {
  const double x = -std::log(u), y = -std::log(v);
  const double logT = gumbel_logT(th, u, v);
  const double T = std::exp(logT);
  return -T + (th - 1.0) * (std::log(x) + std::log(y)) + (1.0 - 2.0 * th) * logT +
         std::log(T + th - 1.0) + x + y;
}

double gumbel_log_hfunc(double th, double u, double v) {
  const double y = -std::log(v);
  const double logT = gumbel_logT(th, u, v);
  return -std::exp(logT) + (1.0 - th) * logT + (th - 1.0) * std::log(y) + y;
}

// ---- BB1 ----------------------------------------------------------------
// xt = u^{-th}-1, x = xt^dl, s = x+y, t = s^{1/dl}; C = (1+t)^{-1/th}.

struct BB1Work {
  double log_xt, log_yt;  // log(u^{-th}-1), log(v^{-th}-1)
  double log_t;
};

BB1Work bb1_prepare(double th, double dl, double u, double v) {
  BB1Work w;
  w.log_xt = std::log(std::expm1(-th * std::log(u)));
  w.log_yt = std::log(std::expm1(-th * std::log(v)));
  const double a = dl * w.log_xt, b = dl * w.log_yt;
  const double m = std::max(a, b);
  w.log_t = (m + std::log1p(std::exp(std::min(a, b) - m))) / dl;
  return w;
}

double log1p_exp(double logt) {
  // log(1 + t) given log t
  if (logt > 33.0) return logt;
  if (logt < -33.0) return std::exp(logt);
  return std::log1p(std::exp(logt));
}

double bb1_cdf(double th, double dl, double u, double v) {
  const BB1Work w = bb1_prepare(th, dl, u, v);
  return std::exp(-log1p_exp(w.log_t) / th);
}

double bb1_log_pdf(double th, double dl, double u, double v) {
  const BB1Work w = bb1_prepare(th, dl, u, v);
  const double l1pt = log1p_exp(w.log_t);
  // log((1+th*dl) t + th(dl-1)) without forming t when huge
  const double la = std::log1p(th * dl) + w.log_t;
  const double bracket = (dl > 1.0)
      ? logadd(la, std::log(th * (dl - 1.0)))
      : la;
  return -(1.0 / th + 2.0) * l1pt + (1.0 - 2.0 * dl) * w.log_t + bracket +
         (dl - 1.0) * (w.log_xt + w.log_yt) - (th + 1.0) * (std::log(u) + std::log(v));
}

double bb1_log_hfunc(double th, double dl, double u, double v) {
  const BB1Work w = bb1_prepare(th, dl, u, v);
  const double l1pt = log1p_exp(w.log_t);
  return -(1.0 / th + 1.0) * l1pt + (1.0 - dl) * w.log_t + (dl - 1.0) * w.log_yt -
         (th + 1.0) * std::log(v);
}

// ---- generic numeric helpers ---------------------------------------------

// Root of hfunc(u) = p by bisection to a short bracket, then safeguarded
// Newton with the density as derivative.
template <typename HFn, typename LogPdfFn>
double hinv_numeric(const HFn& h, const LogPdfFn& log_pdf, double p, double v) {
  double lo = kEps, hi = 1.0 - kEps;
  double flo = h(lo, v) - p, fhi = h(hi, v) - p;
  if (flo >= 0.0) return lo;
  if (fhi <= 0.0) return hi;
  for (int it = 0; it < 16; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (h(mid, v) - p < 0.0) lo = mid; else hi = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 40; ++it) {
    const double f = h(x, v) - p;
    if (f < 0.0) lo = x; else hi = x;
    if (std::fabs(f) < 1e-12) break;
    const double dens = std::exp(log_pdf(x, v));
    double xn = (dens > 0.0) ? x - f / dens : 0.5 * (lo + hi);
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::fabs(xn - x) < 1e-15) { x = xn; break; }
    x = xn;
  }
  return clamp01(x);
}

// C(u,v) = int_0^v C_{U|V}(u|t) dt by composite Gauss-Legendre; only used
// for families without a closed-form cdf.
template <typename HFn>
double cdf_by_h_integration(const HFn& h, double u, double v) {
  static const double gl_x[8] = {0.0950125098376374, 0.2816035507792589,
                                 0.4580167776572274, 0.6178762444026438,
                                 0.7554044083550030, 0.8656312023878318,
                                 0.9445750230732326, 0.9894009349916499};
  static const double gl_w[8] = {0.1894506104550685, 0.1826034150449236,
                                 0.1691565193950025, 0.1495959888165767,
                                 0.1246289712555339, 0.0951585116824928,
                                 0.0622535239386479, 0.0271524594117541};
  const int panels = 16;
  const double w = v / panels;
  double total = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double mid = (k + 0.5) * w, half = 0.5 * w;
    for (int i = 0; i < 8; ++i)
      total += half * gl_w[i] *
               (h(u, clamp01(mid + half * gl_x[i])) + h(u, clamp01(mid - half * gl_x[i])));
  }
  return total;
}

}  // namespace

int param_count(CopulaFamily f) {
  switch (f) {
    case CopulaFamily::Independence: return 0;
    case CopulaFamily::BB1: return 2;
    default: return 1;
  }
}

const char* family_name(CopulaFamily f) {
  switch (f) {
    case CopulaFamily::Independence: return "indep";
    case CopulaFamily::Gaussian: return "gaussian";
    case CopulaFamily::Frank: return "frank";
    case CopulaFamily::Gumbel: return "gumbel";
    case CopulaFamily::StudentT: return "t";
    case CopulaFamily::BB1: return "bb1";
  }
  return "?";
}

CopulaFamily family_from_name(const std::string& name) {
  if (name == "indep" || name == "independence") return CopulaFamily::Independence;
  if (name == "gaussian" || name == "normal") return CopulaFamily::Gaussian;
  if (name == "frank") return CopulaFamily::Frank;
  if (name == "gumbel") return CopulaFamily::Gumbel;
  if (name == "t" || name == "student") return CopulaFamily::StudentT;
  if (name == "bb1") return CopulaFamily::BB1;
  throw std::invalid_argument("unknown copula family: " + name);
}

ParamBox param_box(CopulaFamily f) {
  switch (f) {
    case CopulaFamily::Independence: return {};
    case CopulaFamily::Gaussian: return {{0.01}, {0.995}};
    case CopulaFamily::StudentT: return {{0.01}, {0.995}};
    case CopulaFamily::Frank: return {{0.1}, {40.0}};
    case CopulaFamily::Gumbel: return {{1.01}, {20.0}};
    case CopulaFamily::BB1: return {{0.05, 1.01}, {7.0, 7.0}};
  }
  return {};
}

std::vector<double> to_unconstrained(CopulaFamily f, const std::vector<double>& p) {
  switch (f) {
    case CopulaFamily::Independence: return {};
    case CopulaFamily::Gaussian:
    case CopulaFamily::StudentT: return {std::atanh(p[0])};
    case CopulaFamily::Frank: return {std::log(p[0])};
    case CopulaFamily::Gumbel: return {std::log(p[0] - 1.0)};
    case CopulaFamily::BB1: return {std::log(p[0]), std::log(p[1] - 1.0)};
  }
  return {};
}

std::vector<double> from_unconstrained(CopulaFamily f, const std::vector<double>& s) {
  switch (f) {
    case CopulaFamily::Independence: return {};
    case CopulaFamily::Gaussian:
    case CopulaFamily::StudentT: return {std::tanh(s[0])};
    case CopulaFamily::Frank: return {std::exp(s[0])};
    case CopulaFamily::Gumbel: return {1.0 + std::exp(s[0])};
    case CopulaFamily::BB1: return {std::exp(s[0]), 1.0 + std::exp(s[1])};
  }
  return {};
}

BivariateCopula::BivariateCopula()
    : family_(CopulaFamily::Independence), reflection_(Reflection::None), npar_(0) {
  par_[0] = par_[1] = 0.0;
}

BivariateCopula::BivariateCopula(CopulaFamily family, const std::vector<double>& params,
                                 Reflection reflection)
    : family_(family), reflection_(reflection) {
  npar_ = param_count(family);
  if (static_cast<int>(params.size()) != npar_)
    throw std::invalid_argument("BivariateCopula: wrong parameter count");
  par_[0] = npar_ > 0 ? params[0] : 0.0;
  par_[1] = npar_ > 1 ? params[1] : 0.0;
  switch (family_) {
    case CopulaFamily::Independence: break;
    case CopulaFamily::Gaussian:
    case CopulaFamily::StudentT:
      if (!(std::fabs(par_[0]) < 1.0))
        throw std::invalid_argument("correlation parameter must be in (-1,1)");
      break;
    case CopulaFamily::Frank:
      if (par_[0] == 0.0) throw std::invalid_argument("Frank theta must be nonzero");
      break;
    case CopulaFamily::Gumbel:
      if (!(par_[0] > 1.0)) throw std::invalid_argument("Gumbel theta must exceed 1");
      break;
    case CopulaFamily::BB1:
      if (!(par_[0] > 0.0) || !(par_[1] > 1.0))
        throw std::invalid_argument("BB1 requires theta > 0 and delta > 1");
      break;
  }
}

std::vector<double> BivariateCopula::params() const {
  return std::vector<double>(par_, par_ + npar_);
}

double BivariateCopula::base_log_pdf(double u, double v) const {
  switch (family_) {
    case CopulaFamily::Independence: return 0.0;
    case CopulaFamily::Gaussian: return gauss_log_pdf(par_[0], u, v);
    case CopulaFamily::Frank: return frank_log_pdf(par_[0], u, v);
    case CopulaFamily::Gumbel: return gumbel_log_pdf(par_[0], u, v);
    case CopulaFamily::StudentT: return t_log_pdf(par_[0], kStudentNu, u, v);
    case CopulaFamily::BB1: return bb1_log_pdf(par_[0], par_[1], u, v);
  }
  return 0.0;
}

double BivariateCopula::base_cdf(double u, double v) const {
  switch (family_) {
    case CopulaFamily::Independence: return u * v;
    case CopulaFamily::Frank: return frank_cdf(par_[0], u, v);
    case CopulaFamily::Gumbel: return gumbel_cdf(par_[0], u, v);
    case CopulaFamily::BB1: return bb1_cdf(par_[0], par_[1], u, v);
    case CopulaFamily::Gaussian: {
      const double rho = par_[0];
      return cdf_by_h_integration(
          [rho](double uu, double t) { return gauss_hfunc(rho, uu, t); }, u, v);
    }
    case CopulaFamily::StudentT: {
      const double rho = par_[0];
      return cdf_by_h_integration(
          [rho](double uu, double t) { return t_hfunc(rho, kStudentNu, uu, t); }, u, v);
    }
  }
  return 0.0;
}

double BivariateCopula::base_hfunc(double u, double v) const {
  switch (family_) {
    case CopulaFamily::Independence: return u;
    case CopulaFamily::Gaussian: return gauss_hfunc(par_[0], u, v);
    case CopulaFamily::Frank: return frank_hfunc(par_[0], u, v);
    case CopulaFamily::Gumbel: return std::exp(gumbel_log_hfunc(par_[0], u, v));
    case CopulaFamily::StudentT: return t_hfunc(par_[0], kStudentNu, u, v);
    case CopulaFamily::BB1: return std::exp(bb1_log_hfunc(par_[0], par_[1], u, v));
  }
  return u;
}

double BivariateCopula::base_hinv(double p, double v) const {
  switch (family_) {
    case CopulaFamily::Independence: return p;
    case CopulaFamily::Gaussian: return gauss_hinv(par_[0], p, v);
    case CopulaFamily::Frank: return frank_hinv(par_[0], p, v);
    case CopulaFamily::StudentT: return t_hinv(par_[0], kStudentNu, p, v);
    case CopulaFamily::Gumbel: {
      const double th = par_[0];
      return hinv_numeric(
          [th](double uu, double vv) { return std::exp(gumbel_log_hfunc(th, uu, vv)); },
          [th](double uu, double vv) { return gumbel_log_pdf(th, uu, vv); }, p, v);
    }
    case CopulaFamily::BB1: {
      const double th = par_[0], dl = par_[1];
      return hinv_numeric(
          [th, dl](double uu, double vv) { return std::exp(bb1_log_hfunc(th, dl, uu, vv)); },
          [th, dl](double uu, double vv) { return bb1_log_pdf(th, dl, uu, vv); }, p, v);
    }
  }
  return p;
}

double BivariateCopula::log_pdf(double u, double v) const {
  u = clamp01(u);
  v = clamp01(v);
  switch (reflection_) {
    case Reflection::None: return base_log_pdf(u, v);
    case Reflection::Deg90: return base_log_pdf(1.0 - u, v);
    case Reflection::Deg180: return base_log_pdf(1.0 - u, 1.0 - v);
    case Reflection::Deg270: return base_log_pdf(u, 1.0 - v);
  }
  return 0.0;
}

double BivariateCopula::pdf(double u, double v) const { return std::exp(log_pdf(u, v)); }

double BivariateCopula::cdf(double u, double v) const {
  u = clamp01(u);
  v = clamp01(v);
  double c = 0.0;
  switch (reflection_) {
    case Reflection::None: c = base_cdf(u, v); break;
    case Reflection::Deg90: c = v - base_cdf(1.0 - u, v); break;
    case Reflection::Deg180: c = u + v - 1.0 + base_cdf(1.0 - u, 1.0 - v); break;
    case Reflection::Deg270: c = u - base_cdf(u, 1.0 - v); break;
  }
  const double lo = std::max(u + v - 1.0, 0.0), hi = std::min(u, v);
  return std::min(std::max(c, lo), hi);
}

double BivariateCopula::hfunc(double u, double v) const {
  u = clamp01(u);
  v = clamp01(v);
  double h = u;
  switch (reflection_) {
    case Reflection::None: h = base_hfunc(u, v); break;
    case Reflection::Deg90: h = 1.0 - base_hfunc(1.0 - u, v); break;
    case Reflection::Deg180: h = 1.0 - base_hfunc(1.0 - u, 1.0 - v); break;
    case Reflection::Deg270: h = base_hfunc(u, 1.0 - v); break;
  }
  return clamp01(h);
}

double BivariateCopula::hfunc_dual(double u, double v) const {
  // families here are exchangeable, so the base dual is hfunc with
  // arguments swapped
  u = clamp01(u);
  v = clamp01(v);
  double h = v;
  switch (reflection_) {
    case Reflection::None: h = base_hfunc(v, u); break;
    case Reflection::Deg90: h = base_hfunc(v, 1.0 - u); break;
    case Reflection::Deg180: h = 1.0 - base_hfunc(1.0 - v, 1.0 - u); break;
    case Reflection::Deg270: h = 1.0 - base_hfunc(1.0 - v, u); break;
  }
  return clamp01(h);
}

double BivariateCopula::hfunc_inverse(double p, double v) const {
  p = clamp01(p);
  v = clamp01(v);
  double u = p;
  switch (reflection_) {
    case Reflection::None: u = base_hinv(p, v); break;
    case Reflection::Deg90: u = 1.0 - base_hinv(1.0 - p, v); break;
    case Reflection::Deg180: u = 1.0 - base_hinv(1.0 - p, 1.0 - v); break;
    case Reflection::Deg270: u = base_hinv(p, 1.0 - v); break;
  }
  return clamp01(u);
}

std::pair<double, double> BivariateCopula::sample_pair(Rng& rng) const {
  const double v = uniform01(rng);
  const double q = uniform01(rng);
  return {hfunc_inverse(q, v), v};
}

double BivariateCopula::kendall_tau() const {
  double tau = 0.0;
  switch (family_) {
    case CopulaFamily::Independence: tau = 0.0; break;
    case CopulaFamily::Gaussian:
    case CopulaFamily::StudentT: tau = 2.0 * std::asin(par_[0]) / M_PI; break;
    case CopulaFamily::Frank: tau = 1.0 - 4.0 / par_[0] * (1.0 - debye1(par_[0])); break;
    case CopulaFamily::Gumbel: tau = 1.0 - 1.0 / par_[0]; break;
    case CopulaFamily::BB1: tau = 1.0 - 2.0 / (par_[1] * (par_[0] + 2.0)); break;
  }
  if (reflection_ == Reflection::Deg90 || reflection_ == Reflection::Deg270) tau = -tau;
  return tau;
}

std::string BivariateCopula::to_string() const {
  std::ostringstream out;
  out << family_name(family_);
  switch (reflection_) {
    case Reflection::None: break;
    case Reflection::Deg90: out << "@90"; break;
    case Reflection::Deg180: out << "@180"; break;
    case Reflection::Deg270: out << "@270"; break;
  }
  char buf[32];
  for (int i = 0; i < npar_; ++i) {
    std::snprintf(buf, sizeof(buf), "%.12g", par_[i]);
    out << (i == 0 ? ":" : ",") << buf;
  }
  return out.str();
}

BivariateCopula BivariateCopula::parse(const std::string& spec) {
  std::string head = spec;
  std::vector<double> params;
  const auto colon = spec.find(':');
  if (colon != std::string::npos) {
    head = spec.substr(0, colon);
    std::stringstream ss(spec.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) params.push_back(std::stod(tok));
  }
  Reflection refl = Reflection::None;
  const auto at = head.find('@');
  if (at != std::string::npos) {
    const std::string deg = head.substr(at + 1);
    if (deg == "0") refl = Reflection::None;
    else if (deg == "90") refl = Reflection::Deg90;
    else if (deg == "180") refl = Reflection::Deg180;
    else if (deg == "270") refl = Reflection::Deg270;
    else throw std::invalid_argument("bad reflection suffix: " + spec);
    head = head.substr(0, at);
  }
  return BivariateCopula(family_from_name(head), params, refl);
}

}  // namespace factorcop
