#include "hrelay/qdist.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "hrelay/errors.hpp"
#include "hrelay/fredholm.hpp"
#include "hrelay/laplace.hpp"
#include "hrelay/quadrature.hpp"

namespace hrelay {

namespace {

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 1469598103934665603ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) h = (h ^ p[i]) * 1099511628211ULL;
  return h;
}

std::shared_ptr<const RadialModeTable> emitter_table(const SystemConfig& c) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const RadialModeTable>> cache;
  const auto key = emitter_field_hash(c);
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto t = std::make_shared<const RadialModeTable>(c.emitter_density, c.emitter_repulsion, c.window_radius,
                                                   c.pathloss_ambient);
  std::lock_guard<std::mutex> lock(mu);
  if (cache.size() > 32) cache.clear();
  return cache.emplace(key, t).first->second;
}

}  // namespace

std::string emitter_field_hash(const SystemConfig& c) {
  const double v[] = {c.emitter_density, c.emitter_repulsion.ppp ? 1.0 : 0.0, c.emitter_repulsion.alpha,
                      c.window_radius, c.pathloss_ambient, c.emitter_power};
  std::ostringstream os;
  os << std::hex << fnv1a(v, sizeof(v));
  return os.str();
}

std::complex<double> ambient_laplace(const SystemConfig& c, std::complex<double> s) {
  return std::exp(emitter_table(c)->log_laplace(s * c.emitter_power));
}

double QDistribution::weighted_density(double x) const {
  const double t = (x - log_q0) / log_step;
  if (t < 0.0 || t > static_cast<double>(q.size() - 1)) return 0.0;
  const std::size_t n = q.size();
  long i = std::clamp<long>(static_cast<long>(std::floor(t)) - 1, 0, static_cast<long>(n) - 4);
  double y[4];
  for (int k = 0; k < 4; ++k) y[k] = pdf[i + k] * q[i + k];
  return cubic_uniform(y, 4, log_q0 + i * log_step, log_step, x);
}

double QDistribution::pdf_at(double qq) const {
  if (qq <= 0.0) return 0.0;
  if (qq > q_hi()) {
    // Power-law tail continuing 1 - F beyond the grid.
    const double surv = (1.0 - cdf.back()) * std::pow(q_hi() / qq, tail_exponent);
    return tail_exponent * surv / qq;
  }
  if (qq < q_lo()) return 0.0;
  return weighted_density(std::log(qq)) / qq;
}

double QDistribution::cdf_at(double qq) const {
  if (qq <= 0.0) return 0.0;
  if (qq >= q_hi()) return 1.0 - (1.0 - cdf.back()) * std::pow(q_hi() / qq, tail_exponent);
  if (qq <= q_lo()) return cdf.front() * qq / q_lo();
  return std::clamp(cubic_uniform(cdf.data(), cdf.size(), log_q0, log_step, std::log(qq)), 0.0, 1.0);
}

QDistribution q_distribution(const SystemConfig& c, const QDistributionOptions& opt) {
  const auto table = emitter_table(c);
  const int m = opt.euler_terms;
  const auto nodes = euler_nodes(m);
  const double pt = c.emitter_power;
  auto eval = [&](double q, double& f, double& F) {
    std::vector<std::complex<double>> vf(nodes.size()), vF(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const std::complex<double> s = nodes[k].beta / q;
      const auto L = std::exp(table->log_laplace(s * pt));
      vf[k] = L;
      vF[k] = L / s;
    }
    f = euler_sum(nodes, vf, q, m);
    F = euler_sum(nodes, vF, q, m);
  };

  const double qc = pt * std::pow(std::numbers::pi * c.emitter_density, c.pathloss_ambient / 2.0);
  double f = 0.0, F = 0.0;
  int lo = static_cast<int>(std::floor(std::log10(qc))) - 1;
  for (int it = 0; it < 60; ++it, --lo) {
    eval(std::pow(10.0, lo), f, F);
    if (F < opt.lower_tail) break;
  }
  int hi = static_cast<int>(std::ceil(std::log10(qc))) + 1;
  for (int it = 0; it < 60; ++it, ++hi) {
    eval(std::pow(10.0, hi), f, F);
    if (1.0 - F < opt.upper_tail) break;
  }

  QDistribution d;
  d.euler_terms = m;
  d.tail_exponent = 2.0 / c.pathloss_ambient;
  d.config_hash = emitter_field_hash(c);
  d.log_step = std::log(10.0) / opt.points_per_decade;
  d.log_q0 = lo * std::log(10.0);
  const int n = (hi - lo) * opt.points_per_decade + 1;
  d.q.resize(n);
  d.pdf.resize(n);
  d.cdf.resize(n);
  double fmax = 0.0;
  for (int i = 0; i < n; ++i) {
    d.q[i] = std::exp(d.log_q0 + i * d.log_step);
    eval(d.q[i], d.pdf[i], d.cdf[i]);
    fmax = std::max(fmax, d.pdf[i] * d.q[i]);
  }
  for (int i = 0; i < n; ++i) {
    if (d.pdf[i] * d.q[i] < -1e-6 * fmax)
      throw NumericalError("inverse transform produced a negative density; increase the Euler terms");
    if (i > 0 && d.cdf[i] < d.cdf[i - 1] - 1e-6)
      throw NumericalError("inverse transform produced a decreasing distribution function");
  }
  return d;
}

std::shared_ptr<const QDistribution> cached_q_distribution(const SystemConfig& c, const QDistributionOptions& opt) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const QDistribution>> cache;
  std::ostringstream os;
  os << emitter_field_hash(c) << '|' << opt.euler_terms << '|' << opt.points_per_decade << '|' << opt.lower_tail
     << '|' << opt.upper_tail;
  const auto key = os.str();
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto d = std::make_shared<const QDistribution>(q_distribution(c, opt));
  std::lock_guard<std::mutex> lock(mu);
  if (cache.size() > 64) cache.clear();
  return cache.emplace(key, d).first->second;
}

double partial_expectation(const QDistribution& d, const std::function<double(double)>& g, double a, double b,
                           double rel_tol) {
  if (!(b > a)) return 0.0;
  const bool to_inf = std::isinf(b);
  if (!to_inf && b <= d.q_lo()) throw SupportError("integration range lies below the tabulated support");
  if (a >= d.q_hi()) {
    if (!to_inf) throw SupportError("integration range lies above the tabulated support");
    return g(a) * (1.0 - d.cdf_at(a));
  }
  double total = 0.0;
  if (a <= d.q_lo()) total += g(d.q_lo()) * d.cdf.front();
  if (to_inf) total += g(d.q_hi()) * (1.0 - d.cdf.back());
  const double xa = std::max(std::log(std::max(a, 1e-300)), d.log_q0);
  const double xb = to_inf ? d.log_q0 + (d.q.size() - 1) * d.log_step : std::min(std::log(b), d.log_q0 + (d.q.size() - 1) * d.log_step);
  auto h = [&](double x) { return g(std::exp(x)) * d.weighted_density(x); };
  // Panels of four grid cells, aligned with the grid.
  const double panel = 4.0 * d.log_step;
  double x = xa;
  while (x < xb) {
    const double k = std::floor((x - d.log_q0) / panel + 1e-12);
    const double next = std::min(xb, d.log_q0 + (k + 1.0) * panel);
    if (next > x) total += integrate_adaptive(h, x, next, rel_tol, nullptr, 6);
    x = next;
  }
  return total;
}

}  // namespace hrelay
