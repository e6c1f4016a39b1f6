#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hrelay/model.hpp"
#include "hrelay/rng.hpp"

namespace hrelay {

struct SamplerSpec {
  double intensity = 2e-3;
  Repulsion repulsion = Repulsion::ginibre(-1.0);
  double window_radius = 500.0;
  std::uint64_t seed = 0;
  // Leading Ginibre modes drawn jointly as eigenvalues of a random matrix.
  // The remaining modes use independent Gamma moduli and uniform angles,
  // which is exact for every radial functional but not for angular ones.
  int exact_modes = 32;
  // Whole patterns with a point closer than exclusion_radius to one of these
  // centers are redrawn.
  std::vector<Point> exclusion_centers;
  double exclusion_radius = 0.0;
};

struct PointPattern {
  std::vector<Point> points;
  double intensity = 0.0;
  Repulsion repulsion;
  double window_radius = 0.0;
};

// Number of Ginibre modes kept for a window holding u = pi zeta R^2 points on average.
int ginibre_truncation(double mean_count);

PointPattern sample_ppp(const SamplerSpec& spec);
PointPattern sample_ginibre(const SamplerSpec& spec);
PointPattern sample_alpha_gpp(const SamplerSpec& spec);
// Dispatches on spec.repulsion.
PointPattern sample_field(const SamplerSpec& spec);

// Stream-driven variant used by the simulator; spec.seed is ignored.
void sample_field(const SamplerSpec& spec, Rng& rng, std::vector<Point>& out);

struct PairCorrelation {
  std::vector<double> r_lo;
  std::vector<double> r_hi;
  std::vector<double> g;
  std::vector<double> pair_count;
  std::string warning;
};

// Binned estimator with translation edge correction on the disc. Uses the
// nominal intensity of the patterns, which must share a common spec.
PairCorrelation pair_correlation_estimate(std::span<const PointPattern> patterns,
                                          std::span<const double> edges);

// Area of the intersection of two discs of radius R whose centers are h apart.
double disc_overlap_area(double radius, double h);

}  // namespace hrelay
