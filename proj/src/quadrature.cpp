#include "factorcop/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace factorcop {

// Newton iteration on P_n with the three-term recurrence.
QuadratureRule gauss_legendre(int n) {
  if (n < 2) throw std::invalid_argument("gauss_legendre: need n >= 2");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::fabs(z - z1) < 1e-15) break;
    }
    // on (-1,1): nodes +-z, weight 2/((1-z^2) pp^2); halve for (0,1)
    const double w = 1.0 / ((1.0 - z * z) * pp * pp);
    rule.nodes[i] = 0.5 * (1.0 - z);
    rule.nodes[n - 1 - i] = 0.5 * (1.0 + z);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

}  // namespace factorcop
