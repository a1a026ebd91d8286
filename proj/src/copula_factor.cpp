#include "factorcop/copula_factor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace factorcop {

namespace {

double logsumexp(const double* x, int n) {
  double m = x[0];
  for (int i = 1; i < n; ++i) m = std::max(m, x[i]);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::exp(x[i] - m);
  return m + std::log(s);
}

void check_in_box(const BivariateCopula& c) {
  const ParamBox box = param_box(c.family());
  for (int i = 0; i < c.n_params(); ++i)
    if (c.param(i) < box.lower[i] - 1e-9 || c.param(i) > box.upper[i] + 1e-9)
      throw std::invalid_argument("link parameter outside its optimization box: " +
                                  c.to_string());
}

}  // namespace

void CopulaFactorModel::validate() const {
  const size_t d = static_cast<size_t>(groups.total());
  const size_t gg = static_cast<size_t>(groups.group_count());
  switch (kind) {
    case FactorKind::OneFactor:
      if (global_links.size() != d)
        throw std::invalid_argument("1-factor model needs one link per variable");
      break;
    case FactorKind::BiFactor:
      if (global_links.size() != d || local_links.size() != d)
        throw std::invalid_argument("bi-factor model needs global and local links");
      break;
    case FactorKind::Oblique:
      if (local_links.size() != d)
        throw std::invalid_argument("oblique model needs one link per variable");
      if (!latent_links.empty() && latent_links.size() != gg)
        throw std::invalid_argument("nested latent copula needs one link per group");
      break;
  }
  for (const auto& c : global_links) check_in_box(c);
  for (const auto& c : local_links) check_in_box(c);
  for (const auto& c : latent_links) check_in_box(c);
}

double log_density_1factor_given_v(const CopulaFactorModel& model, RowRef u, double v) {
  double s = 0.0;
  for (int j = 0; j < model.dim(); ++j) s += model.global_links[j].log_pdf(u[j], v);
  return s;
}

void node_log_densities_1factor(const CopulaFactorModel& model, RowRef u,
                                const QuadratureRule& rule, double* out) {
  const int n = rule.size();
  for (int k = 0; k < n; ++k) out[k] = 0.0;
  for (int j = 0; j < model.dim(); ++j) {
    const auto& link = model.global_links[j];
    const double uj = u[j];
    for (int k = 0; k < n; ++k) out[k] += link.log_pdf(uj, rule.nodes[k]);
  }
}

double loglik_1factor(const CopulaFactorModel& model, RowRef u, const QuadratureRule& rule) {
  const int n = rule.size();
  std::vector<double> terms(n);
  node_log_densities_1factor(model, u, rule, terms.data());
  for (int k = 0; k < n; ++k) terms[k] += std::log(rule.weights[k]);
  return logsumexp(terms.data(), n);
}

double log_group_inner_integral(const CopulaFactorModel& model, int g, RowRef u_group,
                                double v0, const QuadratureRule& rule) {
  const int n = rule.size();
  const int lo = model.groups.begin(g), dg = model.groups.size(g);
  std::vector<double> terms(n);
  for (int k = 0; k < n; ++k) terms[k] = std::log(rule.weights[k]);
  for (int j = 0; j < dg; ++j) {
    const double h = model.global_links[lo + j].hfunc(u_group[j], v0);
    const auto& loc = model.local_links[lo + j];
    for (int k = 0; k < n; ++k) terms[k] += loc.log_pdf(h, rule.nodes[k]);
  }
  return logsumexp(terms.data(), n);
}

double log_marginal_bifactor_v0(const CopulaFactorModel& model, RowRef u, double v0,
                                const QuadratureRule& rule) {
  double s = 0.0;
  for (int j = 0; j < model.dim(); ++j) s += model.global_links[j].log_pdf(u[j], v0);
  for (int g = 0; g < model.groups.group_count(); ++g) {
    const int lo = model.groups.begin(g), dg = model.groups.size(g);
    s += log_group_inner_integral(model, g, u.segment(lo, dg), v0, rule);
  }
  return s;
}

double loglik_bifactor(const CopulaFactorModel& model, RowRef u, const QuadratureRule& rule) {
  const int n = rule.size();
  std::vector<double> terms(n);
  for (int k = 0; k < n; ++k)
    terms[k] = std::log(rule.weights[k]) +
               log_marginal_bifactor_v0(model, u, rule.nodes[k], rule);
  return logsumexp(terms.data(), n);
}

double loglik_oblique_nested(const CopulaFactorModel& model, RowRef u,
                             const QuadratureRule& rule) {
  if (model.latent_links.empty())
    throw std::invalid_argument("oblique log-likelihood needs the nested latent copula");
  const int n = rule.size();
  const int gg = model.groups.group_count();
  // per-group data terms are independent of the outer variable; cache them
  std::vector<std::vector<double>> data_terms(gg, std::vector<double>(n, 0.0));
  for (int g = 0; g < gg; ++g) {
    const int lo = model.groups.begin(g), dg = model.groups.size(g);
    for (int j = 0; j < dg; ++j) {
      const auto& link = model.local_links[lo + j];
      const double uj = u[lo + j];
      for (int m = 0; m < n; ++m) data_terms[g][m] += link.log_pdf(uj, rule.nodes[m]);
    }
  }
  std::vector<double> outer(n), inner(n);
  for (int k = 0; k < n; ++k) {
    const double v00 = rule.nodes[k];
    outer[k] = std::log(rule.weights[k]);
    for (int g = 0; g < gg; ++g) {
      for (int m = 0; m < n; ++m)
        inner[m] = std::log(rule.weights[m]) +
                   model.latent_links[g].log_pdf(rule.nodes[m], v00) + data_terms[g][m];
      outer[k] += logsumexp(inner.data(), n);
    }
  }
  return logsumexp(outer.data(), n);
}

double loglik(const CopulaFactorModel& model, const UniformData& u,
              const QuadratureRule& rule) {
  double total = 0.0;
  for (int i = 0; i < u.rows(); ++i) {
    const RowRef row = u.values.row(i);
    switch (model.kind) {
      case FactorKind::OneFactor: total += loglik_1factor(model, row, rule); break;
      case FactorKind::BiFactor: total += loglik_bifactor(model, row, rule); break;
      case FactorKind::Oblique: total += loglik_oblique_nested(model, row, rule); break;
    }
  }
  return total;
}

CopulaSample simulate(const CopulaFactorModel& model, int n, Rng& rng) {
  model.validate();
  const int d = model.dim(), gg = model.groups.group_count();
  CopulaSample out;
  Eigen::MatrixXd u(n, d);
  switch (model.kind) {
    case FactorKind::OneFactor: {
      out.latent.v.resize(n, 1);
      for (int i = 0; i < n; ++i) {
        const double v = uniform01(rng);
        out.latent.v(i, 0) = v;
        for (int j = 0; j < d; ++j)
          u(i, j) = model.global_links[j].hfunc_inverse(uniform01(rng), v);
      }
      break;
    }
    case FactorKind::BiFactor: {
      out.latent.v0.resize(n);
      out.latent.v.resize(n, gg);
      for (int i = 0; i < n; ++i) {
        const double v0 = uniform01(rng);
        out.latent.v0[i] = v0;
        for (int g = 0; g < gg; ++g) out.latent.v(i, g) = uniform01(rng);
        for (int j = 0; j < d; ++j) {
          const int g = model.groups.group_of(j);
          // invert the cdf composition C_{U|Vg;V0}(C_{U|V0}(.|v0) | vg)
          const double t =
              model.local_links[j].hfunc_inverse(uniform01(rng), out.latent.v(i, g));
          u(i, j) = model.global_links[j].hfunc_inverse(t, v0);
        }
      }
      break;
    }
    case FactorKind::Oblique: {
      if (model.latent_links.empty())
        throw std::invalid_argument("oblique simulation needs the nested latent copula");
      out.latent.v0.resize(n);
      out.latent.v.resize(n, gg);
      for (int i = 0; i < n; ++i) {
        const double v00 = uniform01(rng);
        out.latent.v0[i] = v00;
        for (int g = 0; g < gg; ++g)
          out.latent.v(i, g) = model.latent_links[g].hfunc_inverse(uniform01(rng), v00);
        for (int j = 0; j < d; ++j) {
          const int g = model.groups.group_of(j);
          u(i, j) = model.local_links[j].hfunc_inverse(uniform01(rng), out.latent.v(i, g));
        }
      }
      break;
    }
  }
  out.u = UniformData(std::move(u), model.groups);
  return out;
}

}  // namespace factorcop
