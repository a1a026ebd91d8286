#include "factorcop/optimize.hpp"

#include <cmath>
#include <limits>

namespace factorcop {

BrentResult brent_minimize(const std::function<double(double)>& f, double lo,
                           double hi, double tol, int max_iter) {
  const double gold = 0.3819660112501051;
  double a = lo, b = hi;
  double x = a + gold * (b - a), w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  BrentResult res;
  for (int it = 0; it < max_iter; ++it) {
    const double xm = 0.5 * (a + b);
    const double tol1 = tol * std::fabs(x) + 1e-12;
    const double tol2 = 2.0 * tol1;
    if (std::fabs(x - xm) <= tol2 - 0.5 * (b - a)) {
      res.converged = true;
      res.iterations = it;
      break;
    }
    bool parabolic = false;
    if (std::fabs(e) > tol1) {
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::fabs(q);
      const double e_old = e;
      e = d;
      if (std::fabs(p) < std::fabs(0.5 * q * e_old) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (xm > x) ? tol1 : -tol1;
        parabolic = true;
      }
    }
    if (!parabolic) {
      e = (x >= xm) ? a - x : b - x;
      d = gold * e;
    }
    const double u = (std::fabs(d) >= tol1) ? x + d : x + ((d > 0.0) ? tol1 : -tol1);
    const double fu = f(u);
    if (fu <= fx) {
      if (u >= x) a = x; else b = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) { v = w; fv = fw; w = u; fw = fu; }
      else if (fu <= fv || v == x || v == w) { v = u; fv = fu; }
    }
    res.iterations = it + 1;
  }
  res.x = x;
  res.f = fx;
  return res;
}

GoldenResult golden_section(const std::function<double(double)>& f, double lo,
                            double hi, double tol, int max_iter) {
  const double invphi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return (fc < fd) ? GoldenResult{c, fc} : GoldenResult{d, fd};
}

Eigen::VectorXd numerical_gradient(const ObjectiveFn& f, const Eigen::VectorXd& x,
                                   double step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xt = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = step * std::max(1.0, std::fabs(x[i]));
    xt[i] = x[i] + h;
    const double fp = f(xt);
    xt[i] = x[i] - h;
    const double fm = f(xt);
    xt[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

BfgsResult bfgs_minimize(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                         const BfgsOptions& opts, const GradientFn& grad) {
  const Eigen::Index n = x0.size();
  auto eval_grad = [&](const Eigen::VectorXd& x) {
    return grad ? grad(x) : numerical_gradient(f, x, opts.fd_step);
  };

  BfgsResult res;
  Eigen::VectorXd x = x0;
  double fx = f(x);
  Eigen::VectorXd g = eval_grad(x);
  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);

  for (int it = 0; it < opts.max_iter; ++it) {
    res.iterations = it;
    if (g.lpNorm<Eigen::Infinity>() < opts.grad_tol) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd dir = -(hinv * g);
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {  // non-descent; reset to steepest descent
      hinv.setIdentity();
      dir = -g;
      slope = g.dot(dir);
    }
    // Armijo backtracking
    double alpha = 1.0;
    double f_new = fx;
    Eigen::VectorXd x_new = x;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = x + alpha * dir;
      f_new = f(x_new);
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * alpha * slope) {
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) {
      res.converged = g.lpNorm<Eigen::Infinity>() < 10.0 * opts.grad_tol;
      break;
    }
    Eigen::VectorXd g_new = eval_grad(x_new);
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      // hinv <- (I - rho s y^T) hinv (I - rho y s^T) + rho s s^T
      const Eigen::VectorXd hy = hinv * y;
      const double yhy = y.dot(hy);
      hinv += ((sy + yhy) * rho * rho) * (s * s.transpose());
      const Eigen::MatrixXd cross = rho * (hy * s.transpose());
      hinv -= cross + cross.transpose();
    }
    const double f_change = std::fabs(fx - f_new) / std::max(1.0, std::fabs(fx));
    x = x_new;
    fx = f_new;
    g = g_new;
    if (f_change < opts.f_tol) {
      res.converged = true;
      res.iterations = it + 1;
      break;
    }
  }
  res.x = x;
  res.f = fx;
  res.grad = g;
  return res;
}

}  // namespace factorcop
