#include "hrelay/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

namespace hrelay {

void gauss_legendre_10(double a, double b, std::vector<QuadNode>& out) {
  using rule = boost::math::quadrature::gauss<double, 10>;
  const auto& x = rule::abscissa();
  const auto& w = rule::weights();
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  for (std::size_t i = x.size(); i-- > 0;) out.push_back({c - h * x[i], h * w[i]});
  for (std::size_t i = 0; i < x.size(); ++i) out.push_back({c + h * x[i], h * w[i]});
}

std::vector<QuadNode> composite_gauss_legendre(const std::vector<double>& edges) {
  std::vector<QuadNode> out;
  out.reserve(edges.size() * 10);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
    if (edges[i + 1] > edges[i]) gauss_legendre_10(edges[i], edges[i + 1], out);
  return out;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double* error_estimate, unsigned max_depth) {
  if (!(b > a)) {
    if (error_estimate) *error_estimate = 0.0;
    return 0.0;
  }
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, max_depth,
                                                                                  rel_tol, &err);
  if (error_estimate) *error_estimate = err;
  return v;
}

double cubic_uniform(const double* y, std::size_t n, double x0, double h, double x) {
  const double t = (x - x0) / h;
  long i = static_cast<long>(std::floor(t)) - 1;
  i = std::clamp<long>(i, 0, static_cast<long>(n) - 4);
  const double s = t - static_cast<double>(i);
  const double y0 = y[i], y1 = y[i + 1], y2 = y[i + 2], y3 = y[i + 3];
  const double l0 = -(s - 1) * (s - 2) * (s - 3) / 6.0;
  const double l1 = s * (s - 2) * (s - 3) / 2.0;
  const double l2 = -s * (s - 1) * (s - 3) / 2.0;
  const double l3 = s * (s - 1) * (s - 2) / 6.0;
  return y0 * l0 + y1 * l1 + y2 * l2 + y3 * l3;
}

}  // namespace hrelay
