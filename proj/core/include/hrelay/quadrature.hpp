#pragma once

#include <functional>
#include <vector>

namespace hrelay {

struct QuadNode {
  double x;
  double w;
};

// Ten-point Gauss-Legendre rule mapped to [a, b], appended to out.
void gauss_legendre_10(double a, double b, std::vector<QuadNode>& out);

// Composite Gauss-Legendre over consecutive panel edges.
std::vector<QuadNode> composite_gauss_legendre(const std::vector<double>& edges);

// Adaptive Gauss-Kronrod (15 points) with relative tolerance; thin wrapper
// so callers do not depend on the quadrature library directly.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double* error_estimate = nullptr, unsigned max_depth = 12);

// Four-point Lagrange interpolation on a uniform grid starting at x0 with
// step h. Indices are clamped so the stencil stays inside [0, n).
double cubic_uniform(const double* y, std::size_t n, double x0, double h, double x);

}  // namespace hrelay
