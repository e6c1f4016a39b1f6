#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "hrelay/model.hpp"

namespace hrelay {

struct QDistributionOptions {
  int euler_terms = 16;
  int points_per_decade = 24;
  double lower_tail = 1e-7;  // F(q_lo) below this
  double upper_tail = 1e-5;  // 1 - F(q_hi) below this
};

// Distribution of the ambient power at the relay, tabulated on a uniform
// grid in log q. Density values are interpolated through q f(q).
struct QDistribution {
  std::vector<double> q;
  std::vector<double> pdf;
  std::vector<double> cdf;
  double log_q0 = 0.0;
  double log_step = 0.0;
  double tail_exponent = 2.0 / 3.0;  // P[Q > q] ~ q^-tail_exponent for large q
  int euler_terms = 16;
  std::string config_hash;

  double q_lo() const { return q.front(); }
  double q_hi() const { return q.back(); }
  double pdf_at(double q) const;
  double cdf_at(double q) const;
  // q f(q) as a function of x = ln q.
  double weighted_density(double x) const;
};

// L(s) = E exp(-s Q_R) for the ambient field of cfg.
std::complex<double> ambient_laplace(const SystemConfig& cfg, std::complex<double> s);

QDistribution q_distribution(const SystemConfig& cfg, const QDistributionOptions& opt = {});

// Memoized by the emitter-field parameters and options.
std::shared_ptr<const QDistribution> cached_q_distribution(const SystemConfig& cfg,
                                                           const QDistributionOptions& opt = {});

constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Integral of g(q) f_Q(q) over (a, b). b = infinity adds the mass above the
// grid weighted by g(q_hi); a at or below the grid start adds the mass below.
double partial_expectation(const QDistribution& dist, const std::function<double(double)>& g, double a,
                           double b, double rel_tol = 1e-6);

std::string emitter_field_hash(const SystemConfig& cfg);

}  // namespace hrelay
