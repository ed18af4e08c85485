#include "vmsns/quadrature.hpp"

#include "vmsns/errors.hpp"

#include <cmath>
#include <numbers>

namespace vmsns {

void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    // Newton on P_n starting from the Chebyshev-like guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = 0.5 * (1.0 - x);
    weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

QuadratureRule QuadratureRule::simplex(int dim, int order) {
  if (dim != 2 && dim != 3) throw ConfigError("quadrature dimension must be 2 or 3");
  if (order < 0) throw ConfigError("quadrature order must be nonnegative");
  QuadratureRule rule;
  rule.dim = dim;
  rule.order = order;

  // The collapsed map raises the degree in the first variable by dim-1.
  const int m = (order + dim + 1) / 2;
  std::vector<double> x, w;
  gauss_legendre_unit(m, x, w);

  if (dim == 2) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        const double u = x[i], v = x[j];
        const double px = u, py = v * (1.0 - u);
        rule.points.push_back({1.0 - px - py, px, py, 0.0});
        rule.weights.push_back(2.0 * w[i] * w[j] * (1.0 - u));
      }
    }
  } else {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        for (int k = 0; k < m; ++k) {
          const double u = x[i], v = x[j], s = x[k];
          const double px = u, py = v * (1.0 - u), pz = s * (1.0 - u) * (1.0 - v);
          rule.points.push_back({1.0 - px - py - pz, px, py, pz});
          rule.weights.push_back(6.0 * w[i] * w[j] * w[k] * (1.0 - u) * (1.0 - u) * (1.0 - v));
        }
      }
    }
  }
  return rule;
}

}  // namespace vmsns
