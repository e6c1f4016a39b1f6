#pragma once

#include <cstddef>
#include <memory>

#include "hrelay/fredholm.hpp"
#include "hrelay/model.hpp"

namespace hrelay {

// Interferer field seen from the relay at the origin and the destination at
// (d_rd, 0).
struct InterferenceGeometry {
  double intensity = 2e-3;
  Repulsion repulsion = Repulsion::ginibre(-0.5);
  double window_radius = 500.0;
  double exponent = 3.5;
  double d_rd = 5.0;
};

InterferenceGeometry interference_geometry(const SystemConfig& cfg);

// Log Laplace values of the interferer field for the relay-only modulation
// 1 - (1 + a r^-mu)^-1 and the joint relay/destination modulation with
// coefficients (a, b). Lookups interpolate a lazily filled lattice in
// (ln a, ln b); the direct_* members bypass it.
class InterferenceSurface {
 public:
  struct Options {
    int nodes_per_decade = 8;
    // Below this log value the joint term is replaced by its upper bound.
    double prune_log = -60.0;
    bool interpolate = true;
    NystromOptions nystrom;
  };

  explicit InterferenceSurface(InterferenceGeometry g);
  InterferenceSurface(InterferenceGeometry g, Options opt);
  ~InterferenceSurface();

  double log_relay(double a) const;
  double log_joint(double a, double b) const;

  double direct_log_relay(double a) const;
  double direct_log_joint(double a, double b) const;

  std::size_t joint_nodes_evaluated() const;
  const InterferenceGeometry& geometry() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Shared surface for the interferer parameters of cfg.
std::shared_ptr<const InterferenceSurface> cached_interference_surface(const SystemConfig& cfg,
                                                                       bool interpolate = true);

}  // namespace hrelay
