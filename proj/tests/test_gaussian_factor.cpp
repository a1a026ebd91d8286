#include <Eigen/Dense>
#include <cmath>
#include <initializer_list>

#include "doctest.h"
#include "factorcop/gaussian_factor.hpp"
#include "factorcop/rng.hpp"

using namespace factorcop;

namespace {

GaussianFactorModel random_model(FactorKind kind, const GroupStructure& groups, Rng& rng) {
  const int d = groups.total(), gg = groups.group_count();
  std::uniform_real_distribution<double> u(0.3, 0.8);
  switch (kind) {
    case FactorKind::OneFactor: {
      Eigen::VectorXd a(d);
      for (int j = 0; j < d; ++j) a[j] = u(rng);
      return make_one_factor(a);
    }
    case FactorKind::BiFactor: {
      Eigen::VectorXd a0(d), al(d);
      std::uniform_real_distribution<double> ub(0.3, 0.6);
      for (int j = 0; j < d; ++j) {
        a0[j] = ub(rng);
        al[j] = ub(rng);
      }
      return make_bifactor(groups, a0, al);
    }
    case FactorKind::Oblique: {
      Eigen::VectorXd a(d);
      for (int j = 0; j < d; ++j) a[j] = u(rng);
      Eigen::MatrixXd sw = Eigen::MatrixXd::Identity(gg, gg);
      std::uniform_real_distribution<double> us(0.2, 0.5);
      for (int i = 0; i < gg; ++i)
        for (int j = i + 1; j < gg; ++j) sw(i, j) = sw(j, i) = us(rng);
      Eigen::LLT<Eigen::MatrixXd> llt(sw);
      if (llt.info() != Eigen::Success)
        sw = 0.5 * (sw + Eigen::MatrixXd::Identity(gg, gg));
      return make_oblique(groups, a, sw);
    }
  }
  throw std::logic_error("unreachable");
}

// direct D x D solve oracle for E(W|Z)
Eigen::MatrixXd direct_scores(const GaussianFactorModel& m, const NormalScores& z) {
  const Eigen::MatrixXd sw = m.latent_corr_or_identity();
  const Eigen::MatrixXd sigma = m.implied_correlation();
  return (sw * m.loadings.transpose() * sigma.ldlt().solve(z.values.transpose()))
      .transpose();
}

}  // namespace

TEST_CASE("zero loadings carry no information") {
  GaussianFactorModel m;
  m.kind = FactorKind::OneFactor;
  m.groups = GroupStructure::single(6);
  m.loadings = Eigen::MatrixXd::Zero(6, 1);
  m.psi2 = Eigen::VectorXd::Ones(6);
  NormalScores z;
  z.groups = m.groups;
  z.values = Eigen::MatrixXd::Random(5, 6);
  auto s = regression_scores(m, z);
  CHECK(s.w.cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK((conditional_covariance(m) - Eigen::MatrixXd::Identity(1, 1)).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("woodbury form equals direct solve (oracle)") {
  Rng rng = make_stream(21, 0);
  auto m = random_model(FactorKind::OneFactor, GroupStructure::single(8), rng);
  NormalScores z;
  z.groups = m.groups;
  z.values = Eigen::MatrixXd::Random(7, 8);
  auto s = regression_scores(m, z);
  CHECK((s.w - direct_scores(m, z)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("scalar closed form of the 1-factor score") {
  const int d = 10;
  auto m = make_one_factor(Eigen::VectorXd::Constant(d, 0.6));
  NormalScores z;
  z.groups = m.groups;
  z.values = Eigen::MatrixXd::Ones(1, d);
  const double q = d * 0.36 / 0.64;
  const double want = (1.0 / (1.0 + q)) * d * (0.6 / 0.64);
  auto s = regression_scores(m, z);
  CHECK(s.w(0, 0) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("two-stage bi-factor scores equal joint regression scores") {
  Rng rng = make_stream(22, 0);
  for (int rep = 0; rep < 20; ++rep) {
    std::uniform_int_distribution<int> gsize(3, 8);
    const int gg = 2 + rep % 3;
    std::vector<int> sizes(gg);
    for (auto& s : sizes) s = gsize(rng);
    GroupStructure groups(sizes);
    auto m = random_model(FactorKind::BiFactor, groups, rng);
    NormalScores z;
    z.groups = groups;
    z.values = Eigen::MatrixXd::Random(4, groups.total());
    auto joint = regression_scores(m, z);
    auto two = bifactor_scores_two_stage(m, z);
    CHECK((joint.w - two.w).cwiseAbs().maxCoeff() < 1e-9);
    // z = 0 -> scores 0 by linearity
    NormalScores z0;
    z0.groups = groups;
    z0.values = Eigen::MatrixXd::Zero(2, groups.total());
    CHECK(bifactor_scores_two_stage(m, z0).w.cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("two-stage with zero global loadings reduces to group 1-factor scores") {
  GroupStructure groups({4, 5});
  Eigen::VectorXd al = Eigen::VectorXd::Constant(9, 0.55);
  GaussianFactorModel m;
  m.kind = FactorKind::BiFactor;
  m.groups = groups;
  m.loadings = Eigen::MatrixXd::Zero(9, 3);
  for (int j = 0; j < 9; ++j) m.loadings(j, 1 + groups.group_of(j)) = al[j];
  m.psi2 = (1.0 - al.array().square()).matrix();
  NormalScores z;
  z.groups = groups;
  z.values = Eigen::MatrixXd::Random(6, 9);
  auto two = bifactor_scores_two_stage(m, z);
  CHECK(two.w.col(0).cwiseAbs().maxCoeff() < 1e-14);
  for (int g = 0; g < 2; ++g) {
    const int lo = groups.begin(g), dg = groups.size(g);
    const double psi2 = 1.0 - 0.55 * 0.55;
    const double q = dg * 0.55 * 0.55 / psi2;
    for (int i = 0; i < 6; ++i) {
      const double zsum = z.values.row(i).segment(lo, dg).sum();
      const double want = zsum * (0.55 / psi2) / (1.0 + q);
      CHECK(two.w(i, 1 + g) == doctest::Approx(want).epsilon(1e-10));
    }
  }
}

TEST_CASE("conditional covariance closed form for exchangeable 1-factor") {
  const int d = 16;
  auto m = make_one_factor(Eigen::VectorXd::Constant(d, 0.6));
  const double q = d * 0.36 / 0.64;
  CHECK(conditional_covariance(m)(0, 0) == doctest::Approx(1.0 / (1.0 + q)).epsilon(1e-12));
  CHECK(conditional_covariance(m)(0, 0) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("conditional covariance two forms agree for random models") {
  Rng rng = make_stream(23, 0);
  for (int rep = 0; rep < 10; ++rep) {
    GroupStructure groups({4, 6, 5});
    for (FactorKind kind :
         {FactorKind::OneFactor, FactorKind::BiFactor, FactorKind::Oblique}) {
      auto m = random_model(kind, groups, rng);
      auto cov = conditional_covariance(m);  // throws if the forms disagree
      CHECK((cov - conditional_covariance_direct(m)).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("bi-factor variance decomposition") {
  Rng rng = make_stream(24, 0);
  GroupStructure groups({6, 6});
  auto m = random_model(FactorKind::BiFactor, groups, rng);
  auto cov = conditional_covariance(m);
  for (int g = 0; g < 2; ++g) {
    auto dec = bifactor_variance_decomposition(m, g);
    CHECK(dec.term1 + dec.coeff * cov(0, 0) ==
          doctest::Approx(cov(1 + g, 1 + g)).epsilon(1e-10));
  }
  // zero local loadings: term1 = 1, coeff = 0
  GaussianFactorModel m0;
  m0.kind = FactorKind::BiFactor;
  m0.groups = groups;
  m0.loadings = Eigen::MatrixXd::Zero(12, 3);
  m0.loadings.col(0).setConstant(0.5);
  m0.psi2 = Eigen::VectorXd::Constant(12, 0.75);
  auto dec0 = bifactor_variance_decomposition(m0, 0);
  CHECK(dec0.term1 == doctest::Approx(1.0));
  CHECK(dec0.coeff == doctest::Approx(0.0));
  // vanishing global loadings in group g: coeff = 0, term1 = (1+q_g)^{-1}
  GaussianFactorModel m1 = m0;
  for (int j = 0; j < 12; ++j) m1.loadings(j, 1 + groups.group_of(j)) = 0.4;
  for (int j = groups.begin(0); j < groups.begin(0) + 6; ++j) m1.loadings(j, 0) = 0.0;
  m1.psi2 = (1.0 - m1.loadings.array().square().rowwise().sum()).matrix();
  auto dec1 = bifactor_variance_decomposition(m1, 0);
  CHECK(dec1.coeff == doctest::Approx(0.0));
  CHECK(dec1.term1 ==
        doctest::Approx(1.0 / (1.0 + 6.0 * 0.16 / (1.0 - 0.16))).epsilon(1e-12));
}

TEST_CASE("condition number diagnostic") {
  auto m1 = make_one_factor(Eigen::VectorXd::Constant(8, 0.5));
  CHECK(q_matrix_condition(m1).condition_number == doctest::Approx(1.0));

  // global loadings equal to the stacked local loadings: rank deficient
  GroupStructure groups({5, 5});
  Eigen::VectorXd al = Eigen::VectorXd::Constant(10, 0.5);
  GaussianFactorModel bad;
  bad.kind = FactorKind::BiFactor;
  bad.groups = groups;
  bad.loadings = Eigen::MatrixXd::Zero(10, 3);
  bad.loadings.col(0) = al;
  for (int j = 0; j < 10; ++j) bad.loadings(j, 1 + groups.group_of(j)) = al[j];
  bad.psi2 = (1.0 - bad.loadings.array().square().rowwise().sum()).matrix();
  CHECK(q_matrix_condition(bad).condition_number > 1e12);
}

TEST_CASE("1-factor simulation recovers pairwise correlation") {
  Rng rng = make_stream(25, 0);
  auto m = make_one_factor(Eigen::VectorXd::Constant(2, 0.7));
  auto sim = simulate_gaussian(m, 100000, rng);
  Eigen::VectorXd c0 = sim.z.values.col(0).array() - sim.z.values.col(0).mean();
  Eigen::VectorXd c1 = sim.z.values.col(1).array() - sim.z.values.col(1).mean();
  const double corr = c0.dot(c1) / std::sqrt(c0.squaredNorm() * c1.squaredNorm());
  CHECK(corr == doctest::Approx(0.49).epsilon(0.025));
}

TEST_CASE("pure-noise simulation has near-identity correlation") {
  Rng rng = make_stream(26, 0);
  GaussianFactorModel m;
  m.kind = FactorKind::OneFactor;
  m.groups = GroupStructure::single(4);
  m.loadings = Eigen::MatrixXd::Zero(4, 1);
  m.psi2 = Eigen::VectorXd::Ones(4);
  const int n = 20000;
  auto sim = simulate_gaussian(m, n, rng);
  Eigen::MatrixXd c = sim.z.values;
  c.rowwise() -= sim.z.values.colwise().mean();
  Eigen::MatrixXd corr = c.transpose() * c / double(n - 1);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) CHECK(std::fabs(corr(i, j)) < 3.0 / std::sqrt(double(n)));
}

TEST_CASE("residual correlation structures") {
  Rng rng = make_stream(27, 0);
  ResidualSpec ante{ResidualKind::Antedep1, 0.3, 0.6};
  for (int d : {25, 100, 500}) {
    auto omega = residual_correlation(ante, d, rng);
    const double stat = omega.sum() / d;  // E(S_D^2)/D
    CHECK(stat > 0.0);
    CHECK(stat < 5.0);
  }
  // dominating: row sums O(D), statistic grows with D
  ResidualSpec dom{ResidualKind::Dominating, 0.3, 0.6};
  auto om100 = residual_correlation(dom, 100, rng);
  auto om400 = residual_correlation(dom, 400, rng);
  CHECK(om400.sum() / 400.0 > 2.0 * (om100.sum() / 100.0));
  CHECK_THROWS(residual_correlation(ResidualSpec{ResidualKind::Antedep1, 0.6, 0.3}, 10, rng));
}

TEST_CASE("fit recovers a 1-factor model") {
  Rng rng = make_stream(28, 0);
  const int d = 20;
  std::uniform_real_distribution<double> u(0.4, 0.8);
  Eigen::VectorXd a(d);
  for (int j = 0; j < d; ++j) a[j] = u(rng);
  auto truth = make_one_factor(a);
  auto sim = simulate_gaussian(truth, 4000, rng);
  auto fit = fit_gaussian(FactorKind::OneFactor, sim.z, truth.groups);
  CHECK((fit.loadings.col(0) - a).cwiseAbs().maxCoeff() < 0.08);
  // refit from the optimum moves the objective by < 1e-8
  const double f1 = gaussian_discrepancy(fit, sim.z);
  auto refit = fit_gaussian(FactorKind::OneFactor, sim.z, truth.groups);
  CHECK(std::fabs(gaussian_discrepancy(refit, sim.z) - f1) < 1e-8);
}

TEST_CASE("fit rejects undersized problems") {
  NormalScores z;
  z.groups = GroupStructure::single(1);
  z.values = Eigen::MatrixXd::Random(50, 1);
  CHECK_THROWS_WITH_AS(fit_gaussian(FactorKind::OneFactor, z, z.groups),
                       doctest::Contains("at least 3 variables"), std::invalid_argument);
}

TEST_CASE("fit recovers a bi-factor model and the diagnostic flags rank deficiency") {
  Rng rng = make_stream(29, 0);
  GroupStructure groups({6, 6, 6});
  auto truth = random_model(FactorKind::BiFactor, groups, rng);
  auto sim = simulate_gaussian(truth, 4000, rng);
  auto fit = fit_gaussian(FactorKind::BiFactor, sim.z, groups);
  CHECK((fit.loadings - truth.loadings).cwiseAbs().maxCoeff() < 0.12);
  CHECK(q_matrix_condition(fit).condition_number < 1e3);

  // generator with a_0 equal to the stacked local loadings: fit output still
  // usable, diagnostic reports a condition number above threshold
  Eigen::VectorXd al = Eigen::VectorXd::Constant(18, 0.55);
  GaussianFactorModel bad;
  bad.kind = FactorKind::BiFactor;
  bad.groups = groups;
  bad.loadings = Eigen::MatrixXd::Zero(18, 4);
  bad.loadings.col(0) = al;
  for (int j = 0; j < 18; ++j) bad.loadings(j, 1 + groups.group_of(j)) = al[j];
  bad.psi2 = (1.0 - bad.loadings.array().square().rowwise().sum()).matrix();
  auto sim2 = simulate_gaussian(bad, 3000, rng);
  GaussianFactorModel fit2;
  try {
    fit2 = fit_gaussian(FactorKind::BiFactor, sim2.z, groups);
  } catch (const GaussianFitError& e) {
    fit2 = e.best;  // flat directions may stall; the diagnostic still applies
  }
  CHECK(q_matrix_condition(fit2).condition_number > 1e3);
}

TEST_CASE("fit recovers an oblique model") {
  Rng rng = make_stream(30, 0);
  GroupStructure groups({7, 7});
  Eigen::VectorXd a(14);
  std::uniform_real_distribution<double> u(0.5, 0.8);
  for (int j = 0; j < 14; ++j) a[j] = u(rng);
  Eigen::MatrixXd sw(2, 2);
  sw << 1.0, 0.45, 0.45, 1.0;
  auto truth = make_oblique(groups, a, sw);
  auto sim = simulate_gaussian(truth, 4000, rng);
  auto fit = fit_gaussian(FactorKind::Oblique, sim.z, groups);
  CHECK((fit.loadings - truth.loadings).cwiseAbs().maxCoeff() < 0.1);
  CHECK(fit.latent_corr(0, 1) == doctest::Approx(0.45).epsilon(0.2));
}

TEST_CASE("block fit with a single block equals the full fit") {
  Rng rng = make_stream(31, 0);
  auto truth = random_model(FactorKind::OneFactor, GroupStructure::single(10), rng);
  auto sim = simulate_gaussian(truth, 2000, rng);
  auto full = fit_gaussian(FactorKind::OneFactor, sim.z, truth.groups);
  BlockFitInfo info;
  auto blocked = block_fit(FactorKind::OneFactor, sim.z, truth.groups, 10, {}, &info);
  CHECK(info.blocks == 1);
  CHECK((full.loadings - blocked.loadings).cwiseAbs().maxCoeff() < 1e-9);
  CHECK_THROWS(block_fit(FactorKind::OneFactor, sim.z, truth.groups, 5));
}

TEST_CASE("block fit concatenates per-block estimates near the truth") {
  Rng rng = make_stream(32, 0);
  const int d = 40;
  std::uniform_real_distribution<double> u(0.4, 0.8);
  Eigen::VectorXd a(d);
  for (int j = 0; j < d; ++j) a[j] = u(rng);
  auto truth = make_one_factor(a);
  auto sim = simulate_gaussian(truth, 4000, rng);
  BlockFitInfo info;
  auto fit = block_fit(FactorKind::OneFactor, sim.z, truth.groups, 10, {}, &info);
  CHECK(info.blocks == 4);
  CHECK((fit.loadings.col(0) - a).cwiseAbs().maxCoeff() < 0.1);

  // negating the generator's loadings gives the same sign-normalized output
  auto truth_neg = make_one_factor((-a).eval());
  Rng rng2 = make_stream(32, 1);
  auto sim2 = simulate_gaussian(truth_neg, 4000, rng2);
  auto fit2 = block_fit(FactorKind::OneFactor, sim2.z, truth.groups, 10);
  int positives = 0;
  for (int j = 0; j < d; ++j) positives += fit2.loadings(j, 0) > 0.0;
  CHECK(positives == d);
}

TEST_CASE("block fit for bi-factor and oblique structures") {
  Rng rng = make_stream(33, 0);
  GroupStructure groups({10, 10});
  auto truth = random_model(FactorKind::BiFactor, groups, rng);
  auto sim = simulate_gaussian(truth, 4000, rng);
  auto fit = block_fit(FactorKind::BiFactor, sim.z, groups, 10);
  CHECK((fit.loadings - truth.loadings).cwiseAbs().maxCoeff() < 0.15);

  Eigen::VectorXd a = Eigen::VectorXd::Constant(20, 0.65);
  Eigen::MatrixXd sw(2, 2);
  sw << 1.0, 0.4, 0.4, 1.0;
  auto otruth = make_oblique(groups, a, sw);
  auto osim = simulate_gaussian(otruth, 4000, rng);
  auto ofit = block_fit(FactorKind::Oblique, osim.z, groups, 10);
  CHECK((ofit.loadings - otruth.loadings).cwiseAbs().maxCoeff() < 0.1);
  CHECK(ofit.latent_corr(0, 1) == doctest::Approx(0.4).epsilon(0.25));
}
