#pragma once

#include <vector>

namespace kbte {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [a, b].
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// n-point Gauss-Hermite rule for the weight exp(-x^2/2) on the real line.
QuadratureRule gauss_hermite_probabilist(int n);

}  // namespace kbte
