#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace hrelay {

// Euler-summation inversion of a Laplace transform on the Bromwich line.
// All abscissas have positive real part.
struct EulerNode {
  std::complex<double> beta;
  double eta;
};

std::vector<EulerNode> euler_nodes(int terms);

// f(t) from its transform F(s), t > 0.
double invert_laplace(const std::function<std::complex<double>(std::complex<double>)>& F, double t,
                      int terms = 16);

// Inverts several transforms that share the abscissas s_k = beta_k / t.
// values[k] must hold the transform evaluated at beta_k / t.
double euler_sum(const std::vector<EulerNode>& nodes, const std::vector<std::complex<double>>& values,
                 double t, int terms);

}  // namespace hrelay
