#include "factorcop/dependence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace factorcop {

namespace {

// inversion count by bottom-up merge sort
std::uint64_t count_inversions(std::vector<double>& v) {
  const size_t n = v.size();
  std::vector<double> buf(n);
  std::uint64_t swaps = 0;
  for (size_t width = 1; width < n; width *= 2) {
    for (size_t lo = 0; lo + width < n; lo += 2 * width) {
      const size_t mid = lo + width, hi = std::min(lo + 2 * width, n);
      size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (v[j] < v[i]) {
          swaps += mid - i;
          buf[k++] = v[j++];
        } else {
          buf[k++] = v[i++];
        }
      }
      while (i < mid) buf[k++] = v[i++];
      while (j < hi) buf[k++] = v[j++];
      std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
    }
  }
  return swaps;
}

std::uint64_t tie_pairs(const std::vector<double>& sorted) {
  std::uint64_t total = 0;
  size_t run = 1;
  for (size_t i = 1; i <= sorted.size(); ++i) {
    if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

}  // namespace

TauResult empirical_tau(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  if (n != y.size() || n < 2) throw std::invalid_argument("empirical_tau: need N >= 2 pairs");
  TauResult out;
  const bool x_const = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
  const bool y_const = std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
  if (x_const || y_const) {
    out.degenerate = true;
    return out;
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });
  std::vector<double> xs(n), ys(n);
  for (size_t i = 0; i < n; ++i) {
    xs[i] = x[order[i]];
    ys[i] = y[order[i]];
  }
  // joint ties and x ties from the sorted order
  std::uint64_t n3 = 0, n1 = 0;
  {
    size_t run = 1, jrun = 1;
    for (size_t i = 1; i <= n; ++i) {
      if (i < n && xs[i] == xs[i - 1]) {
        ++run;
        if (ys[i] == ys[i - 1]) ++jrun;
        else { n3 += jrun * (jrun - 1) / 2; jrun = 1; }
      } else {
        n1 += run * (run - 1) / 2;
        n3 += jrun * (jrun - 1) / 2;
        run = jrun = 1;
      }
    }
  }
  std::vector<double> ymerge = ys;
  const std::uint64_t swaps = count_inversions(ymerge);
  const std::uint64_t n2 = tie_pairs(ymerge);
  const double n0 = 0.5 * double(n) * double(n - 1);
  const double concordant_minus_discordant =
      n0 - double(n1) - double(n2) + double(n3) - 2.0 * double(swaps);
  out.tau = concordant_minus_discordant / n0;
  return out;
}

double empirical_tau(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  std::vector<double> xv(x.data(), x.data() + x.size());
  std::vector<double> yv(y.data(), y.data() + y.size());
  return empirical_tau(xv, yv).tau;
}

DependenceSummary model_summary(const BivariateCopula& c, int mc_n, Rng& rng,
                                int alpha_power) {
  if (mc_n < 2) throw std::invalid_argument("model_summary: mc_n too small");
  DependenceSummary out;
  out.alpha_power = alpha_power;
  out.tau = c.kendall_tau();
  const double a = static_cast<double>(alpha_power);
  double su = 0, sv = 0, suu = 0, svv = 0, suv = 0;
  double tu = 0, tv = 0, tuu = 0, tvv = 0, tuv = 0;
  for (int i = 0; i < mc_n; ++i) {
    const auto [u, v] = c.sample_pair(rng);
    const double pu = std::pow(u, a), pv = std::pow(v, a);
    su += pu; sv += pv; suu += pu * pu; svv += pv * pv; suv += pu * pv;
    const double qu = std::pow(1.0 - u, a), qv = std::pow(1.0 - v, a);
    tu += qu; tv += qv; tuu += qu * qu; tvv += qv * qv; tuv += qu * qv;
  }
  const double n = static_cast<double>(mc_n);
  auto corr = [n](double sx, double sy, double sxx, double syy, double sxy) {
    const double cov = sxy / n - (sx / n) * (sy / n);
    const double vx = sxx / n - (sx / n) * (sx / n);
    const double vy = syy / n - (sy / n) * (sy / n);
    return (vx > 0 && vy > 0) ? cov / std::sqrt(vx * vy) : 0.0;
  };
  out.zeta_upper = corr(su, sv, suu, svv, suv);
  out.zeta_lower = corr(tu, tv, tuu, tvv, tuv);
  return out;
}

double mae_params(const Eigen::MatrixXd& est, const Eigen::MatrixXd& truth) {
  if (est.rows() != truth.rows() || est.cols() != truth.cols())
    throw std::invalid_argument("mae_params: shape mismatch");
  return (est - truth).cwiseAbs().mean();
}

double tau_diff(const std::vector<BivariateCopula>& a, const std::vector<BivariateCopula>& b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("tau_diff: link lists must have equal nonzero length");
  double s = 0.0;
  for (size_t j = 0; j < a.size(); ++j)
    s += std::fabs(a[j].kendall_tau() - b[j].kendall_tau());
  return s / static_cast<double>(a.size());
}

double depmeas_diff(const std::vector<BivariateCopula>& fitted,
                    const std::vector<BivariateCopula>& truth, DepMeasure measure,
                    int mc_n, std::uint64_t seed) {
  if (fitted.size() != truth.size() || fitted.empty())
    throw std::invalid_argument("depmeas_diff: link lists must have equal nonzero length");
  if (measure == DepMeasure::Tau) return tau_diff(fitted, truth);
  double s = 0.0;
  for (size_t j = 0; j < fitted.size(); ++j) {
    Rng r1 = make_stream(seed, 2 * j);
    Rng r2 = make_stream(seed, 2 * j + 1);
    const auto mf = model_summary(fitted[j], mc_n, r1);
    const auto mt = model_summary(truth[j], mc_n, r2);
    s += (measure == DepMeasure::ZetaUpper) ? std::fabs(mf.zeta_upper - mt.zeta_upper)
                                            : std::fabs(mf.zeta_lower - mt.zeta_lower);
  }
  return s / static_cast<double>(fitted.size());
}

double rmse_proxies(const Eigen::MatrixXd& proxy, const Eigen::MatrixXd& truth) {
  if (proxy.rows() != truth.rows() || proxy.cols() != truth.cols())
    throw std::invalid_argument("rmse_proxies: shape mismatch");
  return std::sqrt((proxy - truth).array().square().mean());
}

}  // namespace factorcop
