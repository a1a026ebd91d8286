#include "factorcop/gaussian_factor.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "factorcop/optimize.hpp"

namespace factorcop {

const char* kind_name(FactorKind k) {
  switch (k) {
    case FactorKind::OneFactor: return "1factor";
    case FactorKind::BiFactor: return "bifactor";
    case FactorKind::Oblique: return "oblique";
  }
  return "?";
}

FactorKind kind_from_name(const std::string& name) {
  if (name == "1factor" || name == "onefactor") return FactorKind::OneFactor;
  if (name == "bifactor") return FactorKind::BiFactor;
  if (name == "oblique") return FactorKind::Oblique;
  throw std::invalid_argument("unknown factor kind: " + name);
}

Eigen::MatrixXd GaussianFactorModel::latent_corr_or_identity() const {
  if (latent_corr.size() > 0) return latent_corr;
  return Eigen::MatrixXd::Identity(factor_count(), factor_count());
}

Eigen::MatrixXd GaussianFactorModel::implied_correlation() const {
  const Eigen::MatrixXd sw = latent_corr_or_identity();
  Eigen::MatrixXd sigma = loadings * sw * loadings.transpose();
  sigma.diagonal() += psi2;
  return sigma;
}

int GaussianFactorModel::local_column(int g) const {
  switch (kind) {
    case FactorKind::OneFactor: return 0;
    case FactorKind::BiFactor: return 1 + g;
    case FactorKind::Oblique: return g;
  }
  return 0;
}

void GaussianFactorModel::validate() const {
  const int d = dim(), p = factor_count();
  const int expected_p = (kind == FactorKind::OneFactor) ? 1
                         : (kind == FactorKind::BiFactor) ? groups.group_count() + 1
                                                          : groups.group_count();
  if (p != expected_p) throw std::invalid_argument("loading matrix has wrong factor count");
  if (kind != FactorKind::OneFactor && d != groups.total())
    throw std::invalid_argument("loading matrix rows do not match group sizes");
  if (psi2.size() != d) throw std::invalid_argument("psi2 has wrong length");
  for (int j = 0; j < d; ++j)
    if (!(psi2[j] > 0.0)) throw std::invalid_argument("psi2 entries must be positive");
  if (kind == FactorKind::Oblique) {
    if (latent_corr.rows() != p || latent_corr.cols() != p)
      throw std::invalid_argument("latent correlation has wrong size");
    Eigen::LLT<Eigen::MatrixXd> llt(latent_corr);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("latent correlation is not positive definite");
  }
  // structural zeros and unit implied diagonal
  for (int j = 0; j < d; ++j) {
    double row_var = psi2[j];
    const int local_c = (kind == FactorKind::OneFactor) ? 0 : local_column(groups.group_of(j));
    for (int c = 0; c < p; ++c) {
      const double a = loadings(j, c);
      const bool allowed = (kind == FactorKind::OneFactor) ||
                           (kind == FactorKind::BiFactor && c == 0) || (c == local_c);
      if (!allowed && a != 0.0)
        throw std::invalid_argument("loading outside the structural pattern");
      row_var += a * a;
    }
    if (std::fabs(row_var - 1.0) > 1e-6)
      throw std::invalid_argument("implied correlation diagonal is not 1");
  }
}

GaussianFactorModel make_one_factor(const Eigen::VectorXd& alphas) {
  GaussianFactorModel m;
  m.kind = FactorKind::OneFactor;
  m.groups = GroupStructure::single(static_cast<int>(alphas.size()));
  m.loadings = alphas;
  m.psi2 = (1.0 - alphas.array().square()).matrix();
  m.validate();
  return m;
}

GaussianFactorModel make_bifactor(const GroupStructure& groups, const Eigen::VectorXd& global,
                                  const Eigen::VectorXd& local) {
  const int d = groups.total(), gg = groups.group_count();
  GaussianFactorModel m;
  m.kind = FactorKind::BiFactor;
  m.groups = groups;
  m.loadings = Eigen::MatrixXd::Zero(d, gg + 1);
  m.loadings.col(0) = global;
  for (int j = 0; j < d; ++j) m.loadings(j, 1 + groups.group_of(j)) = local[j];
  m.psi2 = (1.0 - global.array().square() - local.array().square()).matrix();
  m.validate();
  return m;
}

GaussianFactorModel make_oblique(const GroupStructure& groups, const Eigen::VectorXd& alphas,
                                 const Eigen::MatrixXd& latent_corr) {
  const int d = groups.total(), gg = groups.group_count();
  GaussianFactorModel m;
  m.kind = FactorKind::Oblique;
  m.groups = groups;
  m.loadings = Eigen::MatrixXd::Zero(d, gg);
  for (int j = 0; j < d; ++j) m.loadings(j, groups.group_of(j)) = alphas[j];
  m.psi2 = (1.0 - alphas.array().square()).matrix();
  m.latent_corr = latent_corr;
  m.validate();
  return m;
}

namespace {

void check_psi(const GaussianFactorModel& m) {
  for (int j = 0; j < m.dim(); ++j)
    if (!(m.psi2[j] > 0.0))
      throw std::invalid_argument("factor scores need positive psi2");
}

// (I_p + A^T Psi^{-2} A)^{-1} A^T Psi^{-2} applied to the rows of z
Eigen::MatrixXd woodbury_scores(const Eigen::MatrixXd& a, const Eigen::VectorXd& psi2,
                                const Eigen::MatrixXd& z) {
  const int p = static_cast<int>(a.cols());
  const Eigen::MatrixXd api = a.array().colwise() / psi2.array();  // Psi^{-2} A
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(p, p) + a.transpose() * api;
  return m.ldlt().solve(api.transpose() * z.transpose()).transpose();
}

}  // namespace

FactorScores regression_scores(const GaussianFactorModel& model, const NormalScores& z,
                               bool oblique_joint) {
  check_psi(model);
  FactorScores out;
  if (model.kind != FactorKind::Oblique) {
    out.w = woodbury_scores(model.loadings, model.psi2, z.values);
    return out;
  }
  if (oblique_joint) {
    // E(W|Z) = Sigma_W A^T (A Sigma_W A^T + Psi^2)^{-1} z
    const Eigen::MatrixXd sigma = model.implied_correlation();
    const Eigen::MatrixXd sw = model.latent_corr_or_identity();
    Eigen::MatrixXd t = sigma.ldlt().solve(z.values.transpose());  // D x N
    out.w = (sw * model.loadings.transpose() * t).transpose();
    return out;
  }
  // groupwise conditional mean E(W_g | Z_g), a scalar 1-factor solve
  const int n = z.rows(), gg = model.groups.group_count();
  out.w.resize(n, gg);
  for (int g = 0; g < gg; ++g) {
    const int lo = model.groups.begin(g), dg = model.groups.size(g);
    const Eigen::VectorXd ag = model.loadings.col(g).segment(lo, dg);
    const Eigen::VectorXd pg = model.psi2.segment(lo, dg);
    const double qg = (ag.array().square() / pg.array()).sum();
    const Eigen::VectorXd wgt = (ag.array() / pg.array()).matrix() / (1.0 + qg);
    out.w.col(g) = z.values.middleCols(lo, dg) * wgt;
  }
  return out;
}

FactorScores bifactor_scores_two_stage(const GaussianFactorModel& model,
                                       const NormalScores& z) {
  if (model.kind != FactorKind::BiFactor)
    throw std::invalid_argument("two-stage scores need a bi-factor model");
  check_psi(model);
  const int n = z.rows(), gg = model.groups.group_count();
  const Eigen::MatrixXd sigma = model.implied_correlation();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("two-stage scores: singular implied correlation");
  // global score a_0^T Sigma^{-1} z
  const Eigen::VectorXd srow = ldlt.solve(model.loadings.col(0));
  const Eigen::VectorXd w0 = z.values * srow;

  FactorScores out;
  out.w.resize(n, gg + 1);
  out.w.col(0) = w0;
  for (int g = 0; g < gg; ++g) {
    const int lo = model.groups.begin(g), dg = model.groups.size(g);
    const Eigen::VectorXd b0 = model.loadings.col(0).segment(lo, dg);
    const Eigen::VectorXd bg = model.loadings.col(1 + g).segment(lo, dg);
    Eigen::MatrixXd sg(dg + 1, dg + 1);
    sg.topLeftCorner(dg, dg) = b0 * b0.transpose() + bg * bg.transpose();
    sg.topLeftCorner(dg, dg).diagonal() += model.psi2.segment(lo, dg);
    sg.topRightCorner(dg, 1) = b0;
    sg.bottomLeftCorner(1, dg) = b0.transpose();
    sg(dg, dg) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sg);
    if (!lu.isInvertible())
      throw std::runtime_error("two-stage scores: singular group correlation");
    Eigen::VectorXd lhs = Eigen::VectorXd::Zero(dg + 1);
    lhs.head(dg) = bg;
    const Eigen::VectorXd r = lu.solve(lhs);  // Sigma_g symmetric: (b_g,0) Sigma_g^{-1}
    out.w.col(1 + g) = z.values.middleCols(lo, dg) * r.head(dg) + w0 * r[dg];
  }
  return out;
}

Eigen::MatrixXd conditional_covariance_direct(const GaussianFactorModel& model) {
  const Eigen::MatrixXd sw = model.latent_corr_or_identity();
  const Eigen::MatrixXd sigma = model.implied_correlation();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("conditional covariance: singular implied correlation");
  const Eigen::MatrixXd asw = model.loadings * sw;  // D x p
  return sw - asw.transpose() * ldlt.solve(asw);
}

Eigen::MatrixXd conditional_covariance(const GaussianFactorModel& model) {
  check_psi(model);
  const int p = model.factor_count();
  const Eigen::MatrixXd direct = conditional_covariance_direct(model);
  const Eigen::MatrixXd api = model.loadings.array().colwise() / model.psi2.array();
  const Eigen::MatrixXd q = model.loadings.transpose() * api;
  Eigen::MatrixXd alt;
  if (model.kind != FactorKind::Oblique) {
    // I - (I + Q)^{-1} Q
    const Eigen::MatrixXd ipq = Eigen::MatrixXd::Identity(p, p) + q;
    alt = Eigen::MatrixXd::Identity(p, p) - ipq.ldlt().solve(q);
  } else {
    // Sigma_W - S (I + S Q S)^{-1} (S Q S) S with S = Sigma_W^{1/2}
    const Eigen::MatrixXd sw = model.latent_corr_or_identity();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sw);
    const Eigen::MatrixXd s = es.operatorSqrt();
    const Eigen::MatrixXd sqs = s * q * s;
    const Eigen::MatrixXd ipq = Eigen::MatrixXd::Identity(p, p) + sqs;
    alt = sw - s * ipq.ldlt().solve(sqs) * s;
  }
  if ((alt - direct).cwiseAbs().maxCoeff() > 1e-10)
    throw std::runtime_error("conditional covariance forms disagree beyond 1e-10");
  return alt;
}

VarianceDecomposition bifactor_variance_decomposition(const GaussianFactorModel& model,
                                                      int g) {
  if (model.kind != FactorKind::BiFactor)
    throw std::invalid_argument("variance decomposition needs a bi-factor model");
  const int lo = model.groups.begin(g), dg = model.groups.size(g);
  const Eigen::VectorXd b0 = model.loadings.col(0).segment(lo, dg);
  const Eigen::VectorXd bg = model.loadings.col(1 + g).segment(lo, dg);
  const Eigen::VectorXd ipsi = model.psi2.segment(lo, dg).cwiseInverse();
  const double qg = (bg.array().square() * ipsi.array()).sum();
  const double qtg = (bg.array() * b0.array() * ipsi.array()).sum();
  VarianceDecomposition out;
  out.term1 = 1.0 / (1.0 + qg);
  out.coeff = qtg * qtg / ((1.0 + qg) * (1.0 + qg));
  return out;
}

QCondition q_matrix_condition(const GaussianFactorModel& model) {
  QCondition out;
  const Eigen::MatrixXd api = model.loadings.array().colwise() / model.psi2.array();
  out.q_bar = model.loadings.transpose() * api / static_cast<double>(model.dim());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.q_bar);
  const auto& sv = svd.singularValues();
  const double smin = sv[sv.size() - 1];
  out.condition_number =
      (smin <= 0.0) ? std::numeric_limits<double>::infinity() : sv[0] / smin;
  return out;
}

// ---------------------------------------------------------------------------
// ML fitting
// ---------------------------------------------------------------------------

namespace {

Eigen::MatrixXd sample_correlation(const Eigen::MatrixXd& z) {
  const int n = static_cast<int>(z.rows());
  Eigen::MatrixXd c = z;
  c.rowwise() -= z.colwise().mean();
  Eigen::MatrixXd cov = c.transpose() * c / static_cast<double>(n - 1);
  const Eigen::VectorXd isd = cov.diagonal().cwiseSqrt().cwiseInverse();
  return isd.asDiagonal() * cov * isd.asDiagonal();
}

int n_angles(int g) { return g * (g - 1) / 2; }

// correlation matrix from hyperspherical angles (one row of the Cholesky
// factor per latent, angles in (0, pi) mapped from the real line)
Eigen::MatrixXd corr_from_angles(int g, const double* t) {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(g, g);
  l(0, 0) = 1.0;
  int idx = 0;
  for (int r = 1; r < g; ++r) {
    double sin_prod = 1.0;
    for (int k = 0; k < r; ++k) {
      const double theta = M_PI / (1.0 + std::exp(-t[idx++]));
      l(r, k) = std::cos(theta) * sin_prod;
      sin_prod *= std::sin(theta);
    }
    l(r, r) = sin_prod;
  }
  return l * l.transpose();
}

std::vector<double> angles_from_corr(const Eigen::MatrixXd& sw) {
  const int g = static_cast<int>(sw.rows());
  Eigen::LLT<Eigen::MatrixXd> llt(sw);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("latent correlation is not positive definite");
  const Eigen::MatrixXd l = llt.matrixL();
  std::vector<double> t;
  t.reserve(n_angles(g));
  for (int r = 1; r < g; ++r) {
    double sin_prod = 1.0;
    for (int k = 0; k < r; ++k) {
      double c = l(r, k) / sin_prod;
      c = std::min(std::max(c, -1.0 + 1e-12), 1.0 - 1e-12);
      const double theta = std::acos(c);
      t.push_back(-std::log(M_PI / theta - 1.0));
      sin_prod *= std::sin(theta);
    }
  }
  return t;
}

struct Parametrization {
  FactorKind kind;
  GroupStructure groups;
  int dim;

  int size() const {
    switch (kind) {
      case FactorKind::OneFactor: return dim;
      case FactorKind::BiFactor: return 2 * dim;
      case FactorKind::Oblique: return dim + n_angles(groups.group_count());
    }
    return 0;
  }

  GaussianFactorModel unpack(const Eigen::VectorXd& x) const {
    GaussianFactorModel m;
    m.kind = kind;
    m.groups = groups;
    const int gg = groups.group_count();
    switch (kind) {
      case FactorKind::OneFactor: {
        m.loadings = x.array().tanh().matrix();
        m.psi2 = (1.0 - m.loadings.array().square()).matrix();
        break;
      }
      case FactorKind::BiFactor: {
        m.loadings = Eigen::MatrixXd::Zero(dim, gg + 1);
        m.psi2.resize(dim);
        for (int j = 0; j < dim; ++j) {
          const double a0 = std::tanh(x[j]);
          const double tl = std::tanh(x[dim + j]);
          const double al = std::sqrt(1.0 - a0 * a0) * tl;
          m.loadings(j, 0) = a0;
          m.loadings(j, 1 + groups.group_of(j)) = al;
          m.psi2[j] = (1.0 - a0 * a0) * (1.0 - tl * tl);
        }
        break;
      }
      case FactorKind::Oblique: {
        m.loadings = Eigen::MatrixXd::Zero(dim, gg);
        m.psi2.resize(dim);
        for (int j = 0; j < dim; ++j) {
          const double a = std::tanh(x[j]);
          m.loadings(j, groups.group_of(j)) = a;
          m.psi2[j] = 1.0 - a * a;
        }
        m.latent_corr = corr_from_angles(gg, x.data() + dim);
        break;
      }
    }
    return m;
  }

  Eigen::VectorXd pack(const GaussianFactorModel& m) const {
    Eigen::VectorXd x(size());
    switch (kind) {
      case FactorKind::OneFactor:
        for (int j = 0; j < dim; ++j) x[j] = std::atanh(m.loadings(j, 0));
        break;
      case FactorKind::BiFactor:
        for (int j = 0; j < dim; ++j) {
          const double a0 = m.loadings(j, 0);
          const double al = m.loadings(j, 1 + groups.group_of(j));
          x[j] = std::atanh(a0);
          x[dim + j] = std::atanh(al / std::sqrt(1.0 - a0 * a0));
        }
        break;
      case FactorKind::Oblique: {
        for (int j = 0; j < dim; ++j) x[j] = std::atanh(m.loadings(j, groups.group_of(j)));
        const auto t = angles_from_corr(m.latent_corr);
        for (size_t i = 0; i < t.size(); ++i) x[dim + static_cast<int>(i)] = t[i];
        break;
      }
    }
    return x;
  }
};

double discrepancy(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& r) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) return 1e100;
  const Eigen::MatrixXd l = llt.matrixL();
  double logdet = 0.0;
  for (int i = 0; i < l.rows(); ++i) logdet += 2.0 * std::log(l(i, i));
  return logdet + llt.solve(r).trace();
}

void sign_normalize(GaussianFactorModel& m) {
  const int p = m.factor_count();
  for (int c = 0; c < p; ++c) {
    int arg = 0;
    double best = 0.0;
    for (int j = 0; j < m.dim(); ++j)
      if (std::fabs(m.loadings(j, c)) > best) {
        best = std::fabs(m.loadings(j, c));
        arg = j;
      }
    if (m.loadings(arg, c) < 0.0) {
      m.loadings.col(c) = -m.loadings.col(c);
      if (m.kind == FactorKind::Oblique && m.latent_corr.size() > 0) {
        m.latent_corr.row(c) = -m.latent_corr.row(c);
        m.latent_corr.col(c) = -m.latent_corr.col(c);
      }
    }
  }
}

Eigen::VectorXd initial_point(const Parametrization& par, const Eigen::MatrixXd& r) {
  const int d = par.dim;
  auto clip = [](double x, double lo, double hi) { return std::min(std::max(x, lo), hi); };
  Eigen::VectorXd x = Eigen::VectorXd::Zero(par.size());
  if (par.kind == FactorKind::OneFactor) {
    for (int j = 0; j < d; ++j) {
      const double s = (r.row(j).sum() - 1.0) / (d - 1);
      x[j] = std::atanh(std::copysign(std::sqrt(clip(std::fabs(s), 0.04, 0.81)), s));
    }
    return x;
  }
  const auto& groups = par.groups;
  const int gg = groups.group_count();
  double wsum = 0.0, bsum = 0.0;
  int wcnt = 0, bcnt = 0;
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      if (groups.group_of(j) == groups.group_of(k)) { wsum += r(j, k); ++wcnt; }
      else { bsum += r(j, k); ++bcnt; }
    }
  const double wbar = wcnt ? wsum / wcnt : 0.3;
  const double bbar = bcnt ? bsum / bcnt : 0.1;
  if (par.kind == FactorKind::BiFactor) {
    const double a0 = std::sqrt(clip(bbar, 0.04, 0.81));
    const double al = std::sqrt(clip(wbar - bbar, 0.04, 0.81));
    for (int j = 0; j < d; ++j) {
      x[j] = std::atanh(a0);
      x[d + j] = std::atanh(clip(al / std::sqrt(1.0 - a0 * a0), -0.95, 0.95));
    }
    return x;
  }
  // oblique: groupwise loadings from within-group means; latent correlation
  // starts at the identity (angles pi/2 <-> t = 0)
  for (int g = 0; g < gg; ++g) {
    double s = 0.0;
    int c = 0;
    const int lo = groups.begin(g), hi = lo + groups.size(g);
    for (int j = lo; j < hi; ++j)
      for (int k = j + 1; k < hi; ++k) { s += r(j, k); ++c; }
    const double a = std::sqrt(clip(c ? s / c : wbar, 0.04, 0.81));
    for (int j = lo; j < hi; ++j) x[j] = std::atanh(a);
  }
  return x;
}

}  // namespace

double gaussian_discrepancy(const GaussianFactorModel& model, const NormalScores& z) {
  const Eigen::MatrixXd r = sample_correlation(z.values);
  Eigen::LLT<Eigen::MatrixXd> llt(r);
  double logdet_r = 0.0;
  if (llt.info() == Eigen::Success) {
    const Eigen::MatrixXd l = llt.matrixL();
    for (int i = 0; i < l.rows(); ++i) logdet_r += 2.0 * std::log(l(i, i));
  }
  return discrepancy(model.implied_correlation(), r) - logdet_r - model.dim();
}

GaussianFactorModel fit_gaussian(FactorKind kind, const NormalScores& z,
                                 const GroupStructure& groups,
                                 const GaussianFitOptions& opts) {
  const int d = z.cols(), n = z.rows();
  if (d < 3) throw std::invalid_argument("at least 3 variables required per factor");
  const GroupStructure g_eff =
      (kind == FactorKind::OneFactor) ? GroupStructure::single(d) : groups;
  if (kind != FactorKind::OneFactor) {
    if (g_eff.total() != d) throw std::invalid_argument("group sizes do not match data");
    for (int g = 0; g < g_eff.group_count(); ++g)
      if (g_eff.size(g) < 3)
        throw std::invalid_argument("at least 3 variables required per factor");
  }
  if (n <= d) throw std::invalid_argument("sample size must exceed the number of variables");
  const Eigen::MatrixXd r = sample_correlation(z.values);
  {
    Eigen::LLT<Eigen::MatrixXd> llt(r);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("sample correlation matrix is not positive definite");
  }

  const Parametrization par{kind, g_eff, d};
  auto objective = [&](const Eigen::VectorXd& x) {
    return discrepancy(par.unpack(x).implied_correlation(), r);
  };
  BfgsOptions bopts;
  bopts.max_iter = opts.max_iter;
  bopts.grad_tol = opts.grad_tol;
  bopts.f_tol = 1e-13;
  bopts.fd_step = 1e-6;
  const BfgsResult res = bfgs_minimize(objective, initial_point(par, r), bopts);
  GaussianFactorModel m = par.unpack(res.x);
  sign_normalize(m);
  if (!res.converged)
    throw GaussianFitError("gaussian factor fit did not converge", std::move(m));
  return m;
}

// ---------------------------------------------------------------------------
// block estimation
// ---------------------------------------------------------------------------

namespace {

// balanced contiguous partition of n items into k parts: (offset, length)
std::vector<std::pair<int, int>> balanced_parts(int n, int k) {
  std::vector<std::pair<int, int>> parts;
  const int base = n / k, rem = n % k;
  int at = 0;
  for (int i = 0; i < k; ++i) {
    const int len = base + (i < rem ? 1 : 0);
    parts.emplace_back(at, len);
    at += len;
  }
  return parts;
}

NormalScores subset_scores(const NormalScores& z, const std::vector<int>& cols,
                           const GroupStructure& groups) {
  NormalScores out;
  out.groups = groups;
  out.values.resize(z.rows(), static_cast<Eigen::Index>(cols.size()));
  for (size_t i = 0; i < cols.size(); ++i)
    out.values.col(static_cast<Eigen::Index>(i)) = z.values.col(cols[i]);
  return out;
}

}  // namespace

GaussianFactorModel block_fit(FactorKind kind, const NormalScores& z,
                              const GroupStructure& groups, int block_size,
                              const GaussianFitOptions& opts, BlockFitInfo* info) {
  if (block_size <= 5) throw std::invalid_argument("block size must exceed 5");
  const int d = z.cols();
  const GroupStructure g_eff =
      (kind == FactorKind::OneFactor) ? GroupStructure::single(d) : groups;
  const int gg = g_eff.group_count();
  int k = std::max(1, (d + block_size / 2) / block_size);
  for (int g = 0; g < gg; ++g) k = std::min(k, g_eff.size(g) / 3);
  k = std::max(k, 1);
  if (info) {
    info->blocks = k;
    info->anchor_refits = 0;
  }
  if (k == 1) return fit_gaussian(kind, z, g_eff, opts);

  std::vector<std::vector<std::pair<int, int>>> parts(gg);
  for (int g = 0; g < gg; ++g) parts[g] = balanced_parts(g_eff.size(g), k);

  // anchors: first variable of each group (variable 0 for 1-factor)
  std::vector<int> anchor(gg);
  for (int g = 0; g < gg; ++g) anchor[g] = g_eff.begin(g);

  struct BlockResult {
    std::vector<int> cols;
    GaussianFactorModel model;
  };
  std::vector<BlockResult> fits(k);

  auto fit_block = [&](int blk, const std::vector<int>& use_anchor) -> BlockResult {
    BlockResult br;
    std::vector<int> sizes(gg);
    for (int g = 0; g < gg; ++g) {
      const auto [off, len] = parts[g][blk];
      for (int j = 0; j < len; ++j) br.cols.push_back(g_eff.begin(g) + off + j);
      int extra = 0;
      if (blk > 0) {
        br.cols.push_back(use_anchor[g]);
        extra = 1;
      }
      sizes[g] = len + extra;
    }
    const GroupStructure bg(sizes);
    br.model = fit_gaussian(kind, subset_scores(z, br.cols, bg), bg, opts);
    return br;
  };

  auto loading_of = [](const BlockResult& br, int orig, int col) {
    const auto it = std::find(br.cols.begin(), br.cols.end(), orig);
    return br.model.loadings(static_cast<int>(it - br.cols.begin()), col);
  };

  for (int blk = 0; blk < k; ++blk) {
    fits[blk] = fit_block(blk, anchor);
    if (blk == 0) continue;
    // anchor estimates near zero carry no sign information; retry once with
    // the next variable of each group as the anchor
    bool weak = false;
    for (int g = 0; g < gg; ++g) {
      const int col = (kind == FactorKind::BiFactor) ? 0 : fits[blk].model.local_column(g);
      if (std::fabs(loading_of(fits[blk], anchor[g], col)) < 0.05) weak = true;
    }
    if (weak) {
      std::vector<int> alt(gg);
      bool ok = true;
      for (int g = 0; g < gg; ++g) {
        if (parts[g][0].second < 2) { ok = false; break; }
        alt[g] = g_eff.begin(g) + 1;
      }
      if (ok) {
        if (info) ++info->anchor_refits;
        anchor = alt;
        for (int b2 = 1; b2 <= blk; ++b2) fits[b2] = fit_block(b2, anchor);
      }
    }
  }

  // align signs with block 0 via the anchors
  const int p = fits[0].model.factor_count();
  for (int blk = 1; blk < k; ++blk) {
    for (int c = 0; c < p; ++c) {
      int a;
      if (kind == FactorKind::BiFactor)
        a = (c == 0) ? anchor[0] : anchor[c - 1];
      else
        a = anchor[std::min(c, gg - 1)];
      const double ref = loading_of(fits[0], a, c);
      const double cur = loading_of(fits[blk], a, c);
      if (ref * cur < 0.0) {
        fits[blk].model.loadings.col(c) = -fits[blk].model.loadings.col(c);
        if (kind == FactorKind::Oblique && fits[blk].model.latent_corr.size() > 0) {
          fits[blk].model.latent_corr.row(c) = -fits[blk].model.latent_corr.row(c);
          fits[blk].model.latent_corr.col(c) = -fits[blk].model.latent_corr.col(c);
        }
      }
    }
  }

  const int p_full = (kind == FactorKind::OneFactor) ? 1
                     : (kind == FactorKind::BiFactor) ? gg + 1
                                                      : gg;
  Eigen::MatrixXd loadings = Eigen::MatrixXd::Zero(d, p_full);
  for (int g = 0; g < gg; ++g) {
    for (int blk = 0; blk < k; ++blk) {
      const auto [off, len] = parts[g][blk];
      for (int j = 0; j < len; ++j) {
        const int orig = g_eff.begin(g) + off + j;
        if (std::find(anchor.begin(), anchor.end(), orig) != anchor.end()) continue;
        if (kind == FactorKind::BiFactor) {
          loadings(orig, 0) = loading_of(fits[blk], orig, 0);
          loadings(orig, 1 + g) = loading_of(fits[blk], orig, 1 + g);
        } else {
          const int c = (kind == FactorKind::OneFactor) ? 0 : g;
          loadings(orig, c) = loading_of(fits[blk], orig, c);
        }
      }
    }
  }
  // anchors averaged over every block containing them (all of them)
  for (int g = 0; g < gg; ++g) {
    const int a = anchor[g];
    const int home = g_eff.group_of(a);
    if (kind == FactorKind::BiFactor) {
      double s0 = 0.0, sl = 0.0;
      for (int blk = 0; blk < k; ++blk) {
        s0 += loading_of(fits[blk], a, 0);
        sl += loading_of(fits[blk], a, 1 + home);
      }
      loadings(a, 0) = s0 / k;
      loadings(a, 1 + home) = sl / k;
    } else {
      const int c = (kind == FactorKind::OneFactor) ? 0 : home;
      double s = 0.0;
      for (int blk = 0; blk < k; ++blk) s += loading_of(fits[blk], a, c);
      loadings(a, c) = s / k;
    }
  }

  GaussianFactorModel out;
  out.kind = kind;
  out.groups = g_eff;
  out.loadings = loadings;
  out.psi2 = (1.0 - loadings.array().square().rowwise().sum()).matrix();
  if (kind == FactorKind::Oblique) {
    Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(gg, gg);
    for (int blk = 0; blk < k; ++blk) sw += fits[blk].model.latent_corr;
    sw /= k;
    sw.diagonal().setOnes();
    out.latent_corr = sw;
  }
  sign_normalize(out);
  out.validate();
  return out;
}

// ---------------------------------------------------------------------------
// simulation
// ---------------------------------------------------------------------------

Eigen::MatrixXd residual_correlation(const ResidualSpec& spec, int dim, Rng& rng) {
  if (spec.kind == ResidualKind::Iid) return Eigen::MatrixXd::Identity(dim, dim);
  if (!(spec.r1 > 0.0 && spec.r1 < spec.r2 && spec.r2 < 1.0))
    throw std::invalid_argument("residual spec needs 0 < r1 < r2 < 1");
  std::uniform_real_distribution<double> unif(spec.r1, spec.r2);
  for (int attempt = 0; attempt < 10; ++attempt) {
    Eigen::MatrixXd omega = Eigen::MatrixXd::Identity(dim, dim);
    if (spec.kind == ResidualKind::Antedep1) {
      for (int j = 0; j + 1 < dim; ++j) omega(j, j + 1) = omega(j + 1, j) = unif(rng);
      for (int j = 0; j < dim; ++j)
        for (int t = j + 2; t < dim; ++t)
          omega(j, t) = omega(t, j) = omega(j, t - 1) * omega(t - 1, t);
    } else {
      for (int j = 1; j < dim; ++j) omega(0, j) = omega(j, 0) = unif(rng);
      for (int j = 1; j < dim; ++j)
        for (int t = j + 1; t < dim; ++t)
          omega(j, t) = omega(t, j) = omega(0, j) * omega(0, t);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(omega);
    if (llt.info() == Eigen::Success) return omega;
  }
  throw std::runtime_error("residual correlation matrix not positive definite");
}

GaussianSample simulate_gaussian(const GaussianFactorModel& model, int n, Rng& rng,
                                 const ResidualSpec& residual) {
  model.validate();
  const int d = model.dim(), p = model.factor_count();
  GaussianSample out;
  out.w.resize(n, p);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < p; ++c) out.w(i, c) = std_normal(rng);
  if (model.kind == FactorKind::Oblique) {
    Eigen::LLT<Eigen::MatrixXd> llt(model.latent_corr_or_identity());
    out.w = out.w * Eigen::MatrixXd(llt.matrixL()).transpose();
  }
  Eigen::MatrixXd eps(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) eps(i, j) = std_normal(rng);
  if (residual.kind != ResidualKind::Iid) {
    const Eigen::MatrixXd omega = residual_correlation(residual, d, rng);
    Eigen::LLT<Eigen::MatrixXd> llt(omega);
    eps = eps * Eigen::MatrixXd(llt.matrixL()).transpose();
  }
  out.z.groups = model.groups;
  out.z.values =
      out.w * model.loadings.transpose() + eps * model.psi2.cwiseSqrt().asDiagonal();
  return out;
}

}  // namespace factorcop
