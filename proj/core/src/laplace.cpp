#include "hrelay/laplace.hpp"

#include <boost/math/special_functions/binomial.hpp>
#include <cmath>
#include <numbers>

#include "hrelay/errors.hpp"

namespace hrelay {

std::vector<EulerNode> euler_nodes(int m) {
  if (m < 2 || m > 40) throw DomainError("Euler inversion needs between 2 and 40 terms");
  std::vector<double> xi(2 * m + 1, 1.0);
  xi[0] = 0.5;
  xi[2 * m] = std::ldexp(1.0, -m);
  for (int k = 1; k < m; ++k)
    xi[2 * m - k] = xi[2 * m - k + 1] + std::ldexp(1.0, -m) * boost::math::binomial_coefficient<double>(m, k);
  std::vector<EulerNode> nodes(2 * m + 1);
  const double re = m * std::log(10.0) / 3.0;
  for (int k = 0; k <= 2 * m; ++k) {
    nodes[k].beta = {re, std::numbers::pi * k};
    nodes[k].eta = (k % 2 == 0 ? 1.0 : -1.0) * xi[k];
  }
  return nodes;
}

double euler_sum(const std::vector<EulerNode>& nodes, const std::vector<std::complex<double>>& values, double t,
                 int m) {
  double s = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) s += nodes[k].eta * values[k].real();
  return std::pow(10.0, m / 3.0) / t * s;
}

double invert_laplace(const std::function<std::complex<double>(std::complex<double>)>& F, double t, int m) {
  const auto nodes = euler_nodes(m);
  std::vector<std::complex<double>> v(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) v[k] = F(nodes[k].beta / t);
  return euler_sum(nodes, v, t, m);
}

}  // namespace hrelay
