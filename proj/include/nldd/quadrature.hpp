#pragma once

#include <vector>

namespace nldd {

/// Rule on the reference triangle {(0,0), (1,0), (0,1)}; weights sum to 1/2.
struct QuadratureRule {
  struct Node {
    double xi;
    double eta;
    double weight;
  };
  int degree = 0;
  std::vector<Node> nodes;
};

/// Exact for polynomials of the given total degree. Supported: 1, 2, 4.
[[nodiscard]] QuadratureRule quadrature_rule(int degree);

}  // namespace nldd
