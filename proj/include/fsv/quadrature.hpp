#pragma once

#include <vector>

namespace fsv {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1].
const QuadratureRule& gauss_legendre(int n);

// n-point Gauss-Jacobi rule on [-1, 1] for the weight (1-x)^a (1+x)^b, a, b > -1.
// Built by Golub-Welsch.
QuadratureRule gauss_jacobi(int n, double a, double b);

}  // namespace fsv
