#pragma once

#include <vector>

namespace factorcop {

// Gauss-Legendre rule mapped from (-1,1) to (0,1): nodes strictly
// increasing, weights positive and summing to 1.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  int size() const { return static_cast<int>(nodes.size()); }
};

QuadratureRule gauss_legendre(int n);

}  // namespace factorcop
