#pragma once

#include <vector>

namespace delaydecay {

// Gauss-Legendre rule on [-1, 1], nodes in ascending order.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// n-point rule, n in [1, 64]. Exact for polynomials up to degree 2n - 1.
GaussLegendre gauss_legendre(int n);

} // namespace delaydecay
