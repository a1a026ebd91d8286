#include <cmath>

#include "doctest.h"
#include <Eigen/Dense>

#include "factorcop/optimize.hpp"

using namespace factorcop;

TEST_CASE("brent finds interior minimum") {
  auto res = brent_minimize([](double x) { return (x - 0.3) * (x - 0.3) + 1.0; }, 0.0, 1.0);
  CHECK(res.converged);
  CHECK(res.x == doctest::Approx(0.3).epsilon(1e-8));

  // minimum at the boundary
  auto res2 = brent_minimize([](double x) { return x; }, 0.0, 1.0);
  CHECK(res2.x == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
}

TEST_CASE("golden section agrees with brent") {
  auto f = [](double x) { return std::cos(3.0 * x) + 0.5 * x; };
  auto g = golden_section(f, 0.0, 2.0, 1e-10);
  auto b = brent_minimize(f, 0.0, 2.0, 1e-12);
  CHECK(g.x == doctest::Approx(b.x).epsilon(1e-6));
}

TEST_CASE("bfgs minimizes rosenbrock") {
  auto rosen = [](const Eigen::VectorXd& x) {
    double s = 0.0;
    for (int i = 0; i + 1 < x.size(); ++i)
      s += 100.0 * std::pow(x[i + 1] - x[i] * x[i], 2) + std::pow(1.0 - x[i], 2);
    return s;
  };
  Eigen::VectorXd x0 = Eigen::VectorXd::Constant(4, -0.5);
  BfgsOptions opts;
  opts.max_iter = 500;
  opts.fd_step = 1e-6;
  auto res = bfgs_minimize(rosen, x0, opts);
  CHECK(res.f < 1e-8);
  for (int i = 0; i < 4; ++i) CHECK(res.x[i] == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("bfgs with analytic gradient on a quadratic") {
  Eigen::MatrixXd a(3, 3);
  a << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
  Eigen::VectorXd b(3);
  b << 1, -2, 0.5;
  auto f = [&](const Eigen::VectorXd& x) { return 0.5 * x.dot(a * x) - b.dot(x); };
  auto g = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return a * x - b; };
  auto res = bfgs_minimize(f, Eigen::VectorXd::Zero(3), {}, g);
  CHECK(res.converged);
  Eigen::VectorXd want = a.ldlt().solve(b);
  CHECK((res.x - want).norm() < 1e-6);
}
