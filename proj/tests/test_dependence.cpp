#include <cmath>
#include <initializer_list>

#include "doctest.h"
#include "factorcop/dependence.hpp"

using namespace factorcop;

TEST_CASE("empirical tau basics") {
  std::vector<double> x{0.1, 0.4, 0.2, 0.9, 0.5};
  CHECK(empirical_tau(x, x).tau == doctest::Approx(1.0));
  std::vector<double> nx;
  for (double v : x) nx.push_back(-v);
  CHECK(empirical_tau(x, nx).tau == doctest::Approx(-1.0));
  auto deg = empirical_tau(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3});
  CHECK(deg.degenerate);
  CHECK(deg.tau == 0.0);
  CHECK_THROWS(empirical_tau(std::vector<double>{1.0}, std::vector<double>{2.0}));
}

TEST_CASE("empirical tau invariant under increasing transforms") {
  Rng rng = make_stream(41, 0);
  std::vector<double> x(200), y(200);
  BivariateCopula c(CopulaFamily::Frank, {5.0});
  for (int i = 0; i < 200; ++i) std::tie(x[i], y[i]) = c.sample_pair(rng);
  const double t0 = empirical_tau(x, y).tau;
  std::vector<double> xt(200), yt(200);
  for (int i = 0; i < 200; ++i) {
    xt[i] = std::exp(5.0 * x[i]);
    yt[i] = std::atan(10.0 * y[i] - 3.0);
  }
  CHECK(empirical_tau(xt, yt).tau == doctest::Approx(t0).epsilon(1e-14));
}

TEST_CASE("empirical tau against a quadratic-count oracle") {
  Rng rng = make_stream(42, 0);
  std::vector<double> x(300), y(300);
  BivariateCopula c(CopulaFamily::Gumbel, {2.0}, Reflection::Deg90);
  for (int i = 0; i < 300; ++i) std::tie(x[i], y[i]) = c.sample_pair(rng);
  double s = 0.0;
  for (int i = 0; i < 300; ++i)
    for (int j = i + 1; j < 300; ++j) {
      const double p = (x[i] - x[j]) * (y[i] - y[j]);
      s += (p > 0) - (p < 0);
    }
  const double want = s / (0.5 * 300 * 299);
  CHECK(empirical_tau(x, y).tau == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("closed-form tau matches simulation for every family") {
  // three parameter points per family; 10^6 pairs within 0.005
  const char* cases[] = {
      "gaussian:0.3", "gaussian:0.59", "gaussian:0.9",
      "frank:2.0",    "frank:4.2",     "frank:11.5",
      "gumbel:1.3",   "gumbel:2.0",    "gumbel:5.0",
      "t:0.3",        "t:0.6",         "t:0.9",
      "bb1:0.3,1.2",  "bb1:0.8,1.8",   "bb1:2.0,1.1",
      "indep",
  };
  int idx = 0;
  for (const char* spec : cases) {
    auto c = BivariateCopula::parse(spec);
    Rng rng = make_stream(43, idx++);
    const int n = 1000000;
    std::vector<double> u(n), v(n);
    for (int i = 0; i < n; ++i) std::tie(u[i], v[i]) = c.sample_pair(rng);
    CHECK_MESSAGE(std::fabs(empirical_tau(u, v).tau - c.kendall_tau()) < 0.005, spec);
  }
}

TEST_CASE("model summary") {
  Rng rng = make_stream(44, 0);
  auto ind = model_summary(BivariateCopula(), 200000, rng);
  CHECK(std::fabs(ind.tau) < 1e-12);
  CHECK(std::fabs(ind.zeta_upper) < 0.01);
  CHECK(std::fabs(ind.zeta_lower) < 0.01);

  auto como = model_summary(BivariateCopula(CopulaFamily::Gaussian, {0.999}), 200000, rng);
  CHECK(como.zeta_upper > 0.95);
  CHECK(como.zeta_lower > 0.95);

  // Gumbel has upper tail dependence: zeta_U clearly above zeta_L
  auto gum = model_summary(BivariateCopula(CopulaFamily::Gumbel, {2.0}), 200000, rng);
  CHECK(gum.zeta_upper > gum.zeta_lower + 0.05);

  // 180-degree reflection swaps the tails
  Rng r1 = make_stream(44, 1), r2 = make_stream(44, 2);
  auto base = model_summary(BivariateCopula(CopulaFamily::Gumbel, {2.5}), 200000, r1);
  auto surv =
      model_summary(BivariateCopula(CopulaFamily::Gumbel, {2.5}, Reflection::Deg180),
                    200000, r2);
  CHECK(surv.zeta_upper == doctest::Approx(base.zeta_lower).epsilon(0.08));
  CHECK(surv.zeta_lower == doctest::Approx(base.zeta_upper).epsilon(0.08));

  // summary tau consistent with the empirical tau of its own mechanism
  Rng r3 = make_stream(44, 3);
  BivariateCopula fr(CopulaFamily::Frank, {7.0});
  std::vector<double> u(100000), v(100000);
  for (int i = 0; i < 100000; ++i) std::tie(u[i], v[i]) = fr.sample_pair(r3);
  CHECK(std::fabs(empirical_tau(u, v).tau - fr.kendall_tau()) < 0.01);
}

TEST_CASE("mae and rmse metrics") {
  Eigen::MatrixXd a(2, 3), b(2, 3);
  a << 1, 2, 3, 4, 5, 6;
  b = a;
  CHECK(mae_params(a, b) == doctest::Approx(0.0));
  CHECK(rmse_proxies(a, b) == doctest::Approx(0.0));
  b.array() += 1.0;
  CHECK(mae_params(a, b) == doctest::Approx(1.0));
  CHECK(rmse_proxies(a, b) == doctest::Approx(1.0));
  b = a;
  b(0, 0) += 0.01;
  CHECK(rmse_proxies(a.topRows(1), b.topRows(1)) ==
        doctest::Approx(0.01 / std::sqrt(3.0)).epsilon(1e-9));
  Eigen::MatrixXd c(3, 2);
  CHECK_THROWS(mae_params(a, c));
  CHECK_THROWS(rmse_proxies(a, c));
}

TEST_CASE("dependence-measure differences between link sets") {
  std::vector<BivariateCopula> truth, fitted;
  for (int j = 0; j < 10; ++j) {
    truth.emplace_back(CopulaFamily::Frank, std::vector<double>{6.0});
    fitted.emplace_back(CopulaFamily::Frank, std::vector<double>{6.0});
  }
  CHECK(depmeas_diff(fitted, truth, DepMeasure::Tau, 1000, 7) == doctest::Approx(0.0));
  // identical links, independent MC streams: difference below MC noise
  CHECK(depmeas_diff(fitted, truth, DepMeasure::ZetaUpper, 200000, 7) < 0.005);

  // one link off by tau 0.1 among 10 -> mean diff 0.01
  auto tau_to_frank = [](double target) {
    double best = 1.0, berr = 1e9;
    for (double th = 0.5; th < 30.0; th += 0.01) {
      BivariateCopula c(CopulaFamily::Frank, {th});
      const double e = std::fabs(c.kendall_tau() - target);
      if (e < berr) { berr = e; best = th; }
    }
    return best;
  };
  const double tau0 = truth[0].kendall_tau();
  fitted[3] = BivariateCopula(CopulaFamily::Frank, {tau_to_frank(tau0 - 0.1)});
  CHECK(depmeas_diff(fitted, truth, DepMeasure::Tau, 1000, 7) ==
        doctest::Approx(0.01).epsilon(0.01));
}
