#include "hrelay/surface.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>

#include "hrelay/quadrature.hpp"

namespace hrelay {

InterferenceGeometry interference_geometry(const SystemConfig& c) {
  return {c.interferer_density, c.interferer_repulsion, c.window_radius, c.pathloss_active, c.d_rd};
}

struct InterferenceSurface::Impl {
  InterferenceGeometry g;
  Options opt;
  double h = 0.0;
  std::unique_ptr<RadialModeTable> relay;
  std::unique_ptr<NystromEvaluator> joint;

  mutable std::shared_mutex mu;
  mutable std::unordered_map<long, double> relay_nodes;
  mutable std::unordered_map<std::uint64_t, double> joint_nodes;

  static std::uint64_t key(long i, long j) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) |
           static_cast<std::uint32_t>(j);
  }

  double relay_direct(double a) const {
    if (a <= 0.0) return 0.0;
    return relay->log_laplace({a, 0.0}).real();
  }

  double joint_direct(double a, double b) const {
    const double c[2] = {a, b};
    return joint->log_laplace(c);
  }

  // Translation of the relay-only value to the destination. Both single
  // factors bound the joint value from above.
  double bound(double a, double b) const { return std::min(relay_cached(a), relay_cached(b)); }

  double relay_node(long i) const {
    {
      std::shared_lock lock(mu);
      auto it = relay_nodes.find(i);
      if (it != relay_nodes.end()) return it->second;
    }
    const double v = relay_direct(std::exp(i * h));
    std::unique_lock lock(mu);
    relay_nodes.emplace(i, v);
    return v;
  }

  double relay_cached(double a) const {
    if (a <= 0.0) return 0.0;
    const double x = std::log(a) / h;
    const long i0 = static_cast<long>(std::floor(x)) - 1;
    double y[4];
    for (int k = 0; k < 4; ++k) y[k] = relay_node(i0 + k);
    return cubic_uniform(y, 4, static_cast<double>(i0), 1.0, x);
  }

  double joint_node(long i, long j) const {
    const auto k = key(i, j);
    {
      std::shared_lock lock(mu);
      auto it = joint_nodes.find(k);
      if (it != joint_nodes.end()) return it->second;
    }
    const double a = std::exp(i * h), b = std::exp(j * h);
    const double bd = bound(a, b);
    // Far below the pruning level the node only has to be small.
    const double v = bd < opt.prune_log - 40.0 ? bd : joint_direct(a, b);
    std::unique_lock lock(mu);
    joint_nodes.emplace(k, v);
    return v;
  }

  double joint_cached(double a, double b) const {
    const double x = std::log(a) / h, y = std::log(b) / h;
    const long i0 = static_cast<long>(std::floor(x)) - 1;
    const long j0 = static_cast<long>(std::floor(y)) - 1;
    double col[4];
    for (int p = 0; p < 4; ++p) {
      double row[4];
      for (int q = 0; q < 4; ++q) row[q] = joint_node(i0 + p, j0 + q);
      col[p] = cubic_uniform(row, 4, static_cast<double>(j0), 1.0, y);
    }
    return cubic_uniform(col, 4, static_cast<double>(i0), 1.0, x);
  }
};

InterferenceSurface::InterferenceSurface(InterferenceGeometry g) : InterferenceSurface(g, Options{}) {}

InterferenceSurface::InterferenceSurface(InterferenceGeometry g, Options opt) : impl_(std::make_unique<Impl>()) {
  auto& s = *impl_;
  s.g = g;
  s.opt = opt;
  s.h = std::log(10.0) / opt.nodes_per_decade;
  s.relay = std::make_unique<RadialModeTable>(g.intensity, g.repulsion, g.window_radius, g.exponent);
  NystromEvaluator::Geometry geo{g.intensity, g.repulsion, g.window_radius, {{0.0, 0.0}, {g.d_rd, 0.0}},
                                 {g.exponent, g.exponent}};
  s.joint = std::make_unique<NystromEvaluator>(geo, opt.nystrom);
}

InterferenceSurface::~InterferenceSurface() = default;

double InterferenceSurface::log_relay(double a) const {
  if (!impl_->opt.interpolate) return impl_->relay_direct(a);
  return impl_->relay_cached(a);
}

double InterferenceSurface::log_joint(double a, double b) const {
  const auto& s = *impl_;
  if (b <= 0.0) return log_relay(a);
  if (a <= 0.0) return s.opt.interpolate ? s.relay_cached(b) : s.relay_direct(b);
  const double bd = s.bound(a, b);
  if (bd < s.opt.prune_log) return bd;
  if (!s.opt.interpolate) return s.joint_direct(a, b);
  return s.joint_cached(a, b);
}

double InterferenceSurface::direct_log_relay(double a) const { return impl_->relay_direct(a); }
double InterferenceSurface::direct_log_joint(double a, double b) const {
  if (b <= 0.0) return impl_->relay_direct(a);
  return impl_->joint_direct(a, b);
}

std::size_t InterferenceSurface::joint_nodes_evaluated() const {
  std::shared_lock lock(impl_->mu);
  return impl_->joint_nodes.size();
}

const InterferenceGeometry& InterferenceSurface::geometry() const { return impl_->g; }

std::shared_ptr<const InterferenceSurface> cached_interference_surface(const SystemConfig& c, bool interpolate) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const InterferenceSurface>> cache;
  const auto g = interference_geometry(c);
  std::ostringstream os;
  os.precision(17);
  os << g.intensity << '|' << g.repulsion.ppp << '|' << g.repulsion.alpha << '|' << g.window_radius << '|'
     << g.exponent << '|' << g.d_rd << '|' << interpolate;
  const auto key = os.str();
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  InterferenceSurface::Options opt;
  opt.interpolate = interpolate;
  auto s = std::make_shared<const InterferenceSurface>(g, opt);
  std::lock_guard<std::mutex> lock(mu);
  if (cache.size() > 32) cache.clear();
  return cache.emplace(key, s).first->second;
}

}  // namespace hrelay
