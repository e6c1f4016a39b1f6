#pragma once

#include <complex>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hrelay/model.hpp"

namespace hrelay {

// One factor (1 + coeff * |z - center|^-exponent)^-1 of a modulation.
struct PathlossFactor {
  double coeff = 0.0;
  Point center;
  double exponent = 4.0;
};

// Modulation m(z) in [0, 1]. Either 1 - prod_i of pathloss factors, or the
// indicator of an origin-centered disc. Centers must lie on the x axis.
struct Modulation {
  enum class Kind { Pathloss, DiscIndicator };
  Kind kind = Kind::Pathloss;
  std::vector<PathlossFactor> factors;
  double indicator_radius = 0.0;

  static Modulation pathloss(std::vector<PathlossFactor> f);
  static Modulation disc(double radius);

  double value(Point z) const;
  double complement(Point z) const;
  bool radial() const;
};

struct KernelSpec {
  double intensity = 2e-3;
  Repulsion repulsion = Repulsion::ginibre(-1.0);
  double window_radius = 500.0;
  Modulation modulation;
};

struct NystromOptions {
  // Radial panel width in units of 1/sqrt(pi zeta).
  double panel_scale = 0.5;
  int min_angles = 32;
  int max_angles = 512;
  // Re-evaluate on a grid with halved panels and doubled angles and compare.
  bool refinement_check = false;
  double refinement_tol = 1e-6;
};

// Evaluator for a fixed field and modulation geometry; the factor
// coefficients vary between calls. Thread safe for concurrent calls.
class NystromEvaluator {
 public:
  struct Geometry {
    double intensity;
    Repulsion repulsion;
    double window_radius;
    std::vector<Point> centers;
    std::vector<double> exponents;
    double indicator_radius = 0.0;  // > 0 selects the disc indicator
  };

  NystromEvaluator(Geometry g, NystromOptions opt = {});
  ~NystromEvaluator();
  NystromEvaluator(NystromEvaluator&&) noexcept;

  // log of Det(Id + alpha K)^(-1/alpha), or -zeta * integral of m for PPP.
  double log_laplace(std::span<const double> coeffs) const;

  std::size_t mode_count() const;
  std::size_t radial_node_count() const;
  std::size_t angular_node_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Det(Id + alpha K)^(-1/alpha) through the Nystrom discretization.
double fredholm_det(const KernelSpec& kernel, const NystromOptions& opt = {});
double fredholm_log_det(const KernelSpec& kernel, const NystromOptions& opt = {});

// Product over Ginibre modes for origin-centered radial modulations; each
// factor integrates the modulation against a Gamma density on its own grid.
double radial_fredholm_det(const KernelSpec& kernel);
double radial_fredholm_log_det(const KernelSpec& kernel);

// Mode tables for the ambient-power transform: the modulation
// m_s(r) = s c r^-mu / (1 + s c r^-mu) with complex s.
class RadialModeTable {
 public:
  RadialModeTable(double intensity, Repulsion repulsion, double window_radius, double exponent,
                  std::vector<double> breakpoints = {});
  ~RadialModeTable();
  RadialModeTable(RadialModeTable&&) noexcept;

  // log Laplace value for the single-factor pathloss modulation with complex coefficient.
  std::complex<double> log_laplace(std::complex<double> coeff) const;
  // log Laplace value for a real radial modulation given as (m, 1 - m) at radius r.
  double log_laplace_real(double (*m)(double, const void*), double (*mbar)(double, const void*),
                          const void* ctx) const;

  std::size_t mode_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hrelay
