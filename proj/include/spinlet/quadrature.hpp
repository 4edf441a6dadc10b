#ifndef SPINLET_QUADRATURE_HPP
#define SPINLET_QUADRATURE_HPP

#include <cstddef>
#include <vector>

namespace spinlet {

// Gauss-Legendre rule on [-1,1]: n nodes (ascending) and positive weights.
// Exact for polynomials of degree <= 2n-1. Nodes found by Newton iteration on
// P_n; accurate to a few ulp for the n <= O(10^3) used here.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussLegendre gauss_legendre(std::size_t n);

} // namespace spinlet

#endif
