#pragma once

#include <array>
#include <vector>

namespace vmsns {

/// Quadrature on the reference simplex. Points are barycentric coordinates
/// (dim+1 entries used), weights are volume fractions summing to 1.
struct QuadratureRule {
  int dim = 2;
  int order = 0;
  std::vector<std::array<double, 4>> points;
  std::vector<double> weights;

  int size() const { return static_cast<int>(weights.size()); }

  /// Collapsed (Duffy) tensor Gauss-Legendre rule, exact for polynomials of
  /// total degree <= order. All weights are positive.
  static QuadratureRule simplex(int dim, int order);
};

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace vmsns
