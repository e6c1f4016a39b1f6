#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace hrelay {

// Repulsion parameter of an alpha-Ginibre field. The Poisson field is the
// alpha -> 0 limit and is kept as an explicit marker.
struct Repulsion {
  double alpha = -1.0;
  bool ppp = false;

  static Repulsion poisson() { return {0.0, true}; }
  static Repulsion ginibre(double a) { return {a, false}; }
  bool is_ppp() const { return ppp; }
  bool operator==(const Repulsion&) const = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

double norm(Point p);
double distance(Point a, Point b);

// All quantities in SI units.
struct SystemConfig {
  double emitter_density = 2e-3;     // per m^2
  double interferer_density = 2e-3;  // per m^2
  Repulsion emitter_repulsion = Repulsion::ginibre(-1.0);
  Repulsion interferer_repulsion = Repulsion::ginibre(-0.5);
  double emitter_power = 10.0;     // W
  double interferer_power = 0.1;   // W
  double source_power = 0.1;       // W
  double pathloss_ambient = 3.0;
  double pathloss_active = 3.5;
  double noise_ambient = 2e-8;     // W
  double noise_active = 5e-11;     // W
  double conversion_efficiency = 0.5;
  double reflection_fraction = 0.375;
  double backscatter_efficiency = 0.25;
  double harvest_fraction = 0.4;
  double slot_duration = 1.0;      // s
  double capacitor_energy = 0.02;  // J
  double wpr_circuit_energy = 50e-6;
  double abr_circuit_energy = 5e-6;
  double sinr_threshold_active = 1.0;
  double snr_threshold_backscatter = 100.0;
  double backscatter_capacity = 50e3;  // bit/s
  double bandwidth_active = 50e3;      // Hz
  double d_sr = 5.0;
  double d_rd = 5.0;
  double window_radius = 500.0;
  int etcp_exploration = 5;
};

// Returns every violated invariant; empty when the configuration is valid.
std::vector<std::string> validate(const SystemConfig& cfg);
void require_valid(const SystemConfig& cfg);

// Power-rate forms of the energy budget: rho = E / T and varrho = rho / (omega beta).
struct EnergyRates {
  double rho_w, rho_a, rho_c;
  double varrho_w, varrho_a, varrho_c;
};
EnergyRates energy_rates(const SystemConfig& cfg);

// kappa(v) = d_SR^mu v / P_S.
double kappa(const SystemConfig& cfg, double v);
// ell(v, p) = d_RD^mu v (1 - omega) / (2 p).
double ell(const SystemConfig& cfg, double v, double p);
// Probability that the backscatter hop clears tau_A given ambient power q.
double delta(const SystemConfig& cfg, double q);

double received_ambient_power(std::span<const Point> emitters, std::span<const double> gains,
                              const SystemConfig& cfg);
double harvest(double q, const SystemConfig& cfg);
double wpr_transmit_power(double q, const SystemConfig& cfg);
double abr_transmit_power(double q, const SystemConfig& cfg);

enum class Mode { WPR, ABR, Idle };
const char* to_string(Mode m);

struct LinkFading {
  double source_relay = 1.0;
  double relay_dest = 1.0;
  double relay_dest_backscatter = 1.0;
};

struct Sinr {
  double relay = 0.0;
  double dest_wpr = 0.0;
  double dest_abr = 0.0;
  double interference_relay = 0.0;
  double interference_dest = 0.0;
};

// Interference at R (origin) and D (d_RD, 0) from a common set of interferer
// locations with independent fading on each link.
Sinr sinr_values(const LinkFading& fading, std::span<const Point> interferers,
                 std::span<const double> gains_at_relay, std::span<const double> gains_at_dest,
                 double q, const SystemConfig& cfg);

double end_to_end_capacity(double nu_relay, double nu_dest_wpr, Mode mode, bool abr_success,
                           const SystemConfig& cfg);

struct SlotOutcome {
  double harvested_energy = 0.0;
  Mode mode = Mode::Idle;
  double sinr_relay = 0.0;
  double sinr_dest_wpr = 0.0;
  double snr_dest_abr = 0.0;
  bool success = false;
  double capacity = 0.0;
};

struct Estimate {
  double value = 0.0;
  double standard_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct PerformanceReport {
  Estimate success_probability;
  Estimate ergodic_capacity;
  double energy_efficiency = 0.0;
  std::map<std::string, double> mode_fractions;
  std::uint64_t slots = 0;
  std::uint64_t seed = 0;
};

}  // namespace hrelay
