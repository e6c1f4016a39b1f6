#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hrelay/analytics.hpp"
#include "hrelay/model.hpp"

namespace hrelay {

struct DesignPoint {
  double omega = 0.0;
  double source_power = 0.0;  // W
  double capacity = 0.0;      // bit/s
  double success = 0.0;
  double efficiency = 0.0;    // bit/J
};

struct OptimizationResult {
  double omega_star = 0.0;
  double p_s_star = 0.0;  // W
  double objective = 0.0; // W for P1, bit/J for P2
  bool feasible = false;
  std::map<std::string, double> constraint_values;
  std::vector<DesignPoint> trace;
  std::size_t evaluations = 0;
};

struct OptimizerOptions {
  // Power search range is [p_max * 10^(-power_decades), p_max].
  double power_decades = 3.0;
  int seed_grid = 11;
  double omega_tol = 1e-4;
  double log_power_tol = 1e-4;  // decades
  bool use_simulator = false;
  std::uint64_t simulator_slots = 20000;
  std::uint64_t simulator_seed = 1;
  int simulator_threads = 1;
};

// Largest time split that keeps the relay transmit ceiling 2 rho_C / (1 - omega)
// at or below p_max. Non-positive when no split qualifies.
double omega_upper_bound(const SystemConfig& cfg, double p_max);

// Memoized metric evaluation over (omega, P_S) for a fixed template.
class DesignEvaluator {
 public:
  DesignEvaluator(SystemConfig tmpl, Protocol protocol, OptimizerOptions opt = {});
  DesignPoint operator()(double omega, double source_power);
  std::size_t evaluations() const { return cache_.size(); }
  const std::vector<DesignPoint>& history() const { return history_; }
  Protocol protocol() const { return protocol_; }
  const SystemConfig& config() const { return tmpl_; }
  const OptimizerOptions& options() const { return opt_; }

 private:
  SystemConfig tmpl_;
  Protocol protocol_;
  OptimizerOptions opt_;
  std::map<std::pair<double, double>, DesignPoint> cache_;
  std::vector<DesignPoint> history_;
};

// P1: least source power whose best time split reaches c_target.
OptimizationResult solve_p1(DesignEvaluator& eval, double c_target, double p_max);
OptimizationResult solve_p1(const SystemConfig& tmpl, double c_target, double p_max, Protocol protocol,
                            const OptimizerOptions& opt = {});

// P2: largest capacity per unit source power with success at least s_target.
OptimizationResult solve_p2(DesignEvaluator& eval, double s_target, double p_max);
OptimizationResult solve_p2(const SystemConfig& tmpl, double s_target, double p_max, Protocol protocol,
                            const OptimizerOptions& opt = {});

// Uniform grid in omega over (0, omega_max] and in dBm over the power range.
struct DesignGrid {
  std::vector<double> omegas;
  std::vector<double> powers;  // W
  std::vector<DesignPoint> points;  // omega-major
  double omega_step = 0.0;
  double log_power_step = 0.0;  // decades
  const DesignPoint& at(std::size_t i, std::size_t j) const { return points[i * powers.size() + j]; }
};
DesignGrid design_grid(DesignEvaluator& eval, double p_max, int n_omega, int n_power);

}  // namespace hrelay
