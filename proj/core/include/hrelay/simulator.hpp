#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hrelay/analytics.hpp"
#include "hrelay/model.hpp"

namespace hrelay {

struct SimulationPlan {
  SystemConfig cfg;
  Protocol protocol = Protocol::ESAP;
  std::uint64_t slots = 100000;
  std::uint64_t seed = 1;
  int threads = 1;
  // ETCP runs sessions of 2n exploration slots followed by this many
  // committed slots; plan.slots is split into whole sessions.
  std::uint64_t etcp_steady_slots = 100;
  bool etcp_include_exploration = false;
  // Leading Ginibre modes drawn exactly for each field.
  int emitter_exact_modes = 0;
  int interferer_exact_modes = 24;
  // Sampled fields with a point this close to R or D are redrawn.
  double exclusion_radius = 0.1;  // m
  // Fixed locations replace the sampled fields (fading is still drawn).
  std::optional<std::vector<Point>> fixed_emitters;
  std::optional<std::vector<Point>> fixed_interferers;
  // Optional per-slot CSV log.
  std::string slot_log_path;
};

// Everything random in one slot.
struct SlotDraw {
  std::vector<Point> interferers;
  std::vector<double> gains_relay;
  std::vector<double> gains_dest;
  LinkFading fading;
  double q = 0.0;
  bool urms_picks_wpr = false;
};

// Per-slot quantities shared by every protocol.
struct SlotState {
  double q = 0.0;
  double energy = 0.0;
  Sinr sinr;
  bool urms_picks_wpr = false;
};

SlotDraw draw_slot(const SimulationPlan& plan, std::uint64_t slot_index);
SlotState slot_state(const SlotDraw& draw, const SystemConfig& cfg);

// Outcome of a slot run in a fixed mode (WPR or ABR attempted whenever the
// energy allows it) or under the ESAP / URMS rules.
SlotOutcome attempt_wpr(const SlotState& s, const SystemConfig& cfg);
SlotOutcome attempt_abr(const SlotState& s, const SystemConfig& cfg);
SlotOutcome esap_slot(const SlotState& s, const SystemConfig& cfg);
SlotOutcome protocol_slot(const SlotState& s, Protocol p, const SystemConfig& cfg);

// ESAP, PureABR, PureWPR or URMS. ETCP slots depend on their session.
SlotOutcome run_slot(const SimulationPlan& plan, std::uint64_t slot_index);

PerformanceReport run_etcp_session(const SimulationPlan& plan);

PerformanceReport estimate(const SimulationPlan& plan);

// One pass over shared slot draws evaluated under every protocol. ETCP uses
// the same slots grouped into sessions.
std::map<Protocol, PerformanceReport> estimate_all(const SimulationPlan& plan);

Estimate wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.96);

}  // namespace hrelay
