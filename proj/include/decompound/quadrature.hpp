#pragma once

#include <vector>

namespace decompound {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss–Legendre rule mapped to [a, b]. Exact for polynomials of degree < 2n.
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

}  // namespace decompound
