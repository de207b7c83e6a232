#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace nvent {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1] from the Golub-Welsch eigenproblem.
QuadratureRule gauss_legendre(int n);

/// Gauss-Legendre rule mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

/// Composite Gauss-Legendre integral of f over [a, b].
template <typename F>
double integrate(F&& f, double a, double b, int panels, int order = 16) {
  if (a == b) return 0.0;
  const QuadratureRule ref = gauss_legendre(order);
  const double width = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    const double mid = lo + 0.5 * width;
    double panel = 0.0;
    for (std::size_t k = 0; k < ref.nodes.size(); ++k) {
      panel += ref.weights[k] * f(mid + 0.5 * width * ref.nodes[k]);
    }
    sum += 0.5 * width * panel;
  }
  return sum;
}

}  // namespace nvent
