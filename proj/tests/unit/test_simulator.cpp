#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "hrelay/analytics.hpp"
#include "hrelay/simulator.hpp"

using namespace hrelay;

namespace {

double mode_total(const PerformanceReport& r) {
  double s = 0.0;
  for (const char* k : {"WPR", "ABR", "Idle"}) {
    auto it = r.mode_fractions.find(k);
    if (it != r.mode_fractions.end()) s += it->second;
  }
  return s;
}

// Two emitters and one interferer at fixed places: only fading is random.
SimulationPlan fixture(Protocol p) {
  SimulationPlan plan;
  plan.protocol = p;
  plan.slots = 40000;
  plan.seed = 17;
  plan.fixed_emitters = std::vector<Point>{{10.0, 0.0}, {0.0, -25.0}};
  plan.fixed_interferers = std::vector<Point>{{0.0, 10.0}};
  return plan;
}

// E over the two unit-exponential emitter gains of g(Q).
template <class G>
double over_emitter_gains(const SimulationPlan& plan, G g) {
  const auto& c = plan.cfg;
  const auto& e = *plan.fixed_emitters;
  const double k1 = c.emitter_power * std::pow(norm(e[0]), -c.pathloss_ambient);
  const double k2 = c.emitter_power * std::pow(norm(e[1]), -c.pathloss_ambient);
  using boost::math::quadrature::gauss_kronrod;
  const double inf = std::numeric_limits<double>::infinity();
  return gauss_kronrod<double, 61>::integrate(
      [&](double h1) {
        return std::exp(-h1) * gauss_kronrod<double, 61>::integrate(
                                   [&](double h2) { return std::exp(-h2) * g(k1 * h1 + k2 * h2); }, 0.0, inf, 10,
                                   1e-12);
      },
      0.0, inf, 10, 1e-12);
}

// P[nu_R > tau_W] for the fixture: exponential source fading against one
// exponentially faded interferer.
double relay_hop(const SimulationPlan& plan) {
  const auto& c = plan.cfg;
  const double a = c.sinr_threshold_active / (c.source_power * std::pow(c.d_sr, -c.pathloss_active));
  const double b = c.interferer_power * std::pow(norm((*plan.fixed_interferers)[0]), -c.pathloss_active);
  return std::exp(-a * c.noise_active) / (1.0 + a * b);
}

}  // namespace

TEST(Simulator, ThreadCountDoesNotChangeResults) {
  SimulationPlan plan;
  plan.slots = 1500;
  plan.seed = 5;
  plan.threads = 1;
  const auto a = estimate_all(plan);
  plan.threads = 4;
  const auto b = estimate_all(plan);
  for (const auto& [p, r] : a) {
    EXPECT_EQ(r.success_probability.value, b.at(p).success_probability.value);
    EXPECT_EQ(r.ergodic_capacity.value, b.at(p).ergodic_capacity.value);
    EXPECT_EQ(r.mode_fractions, b.at(p).mode_fractions);
  }
  plan.protocol = Protocol::ESAP;
  const auto single = estimate(plan);
  EXPECT_EQ(single.success_probability.value, a.at(Protocol::ESAP).success_probability.value);
}

TEST(Simulator, WilsonInterval) {
  const auto all = wilson_interval(100, 100);
  EXPECT_EQ(all.value, 1.0);
  EXPECT_NEAR(all.ci_high, 1.0, 1e-12);
  EXPECT_NEAR(all.ci_low, 100.0 / (100.0 + 1.96 * 1.96), 1e-12);
  const auto half = wilson_interval(50, 100);
  EXPECT_NEAR(half.ci_low + half.ci_high, 1.0, 1e-12);
  EXPECT_NEAR(half.standard_error, 0.05, 1e-12);
}

TEST(Simulator, ModeFractionsSumToOne) {
  SimulationPlan plan;
  plan.slots = 1100;
  for (const auto& [p, r] : estimate_all(plan)) EXPECT_NEAR(mode_total(r), 1.0, 1e-12) << to_string(p);
}

TEST(Simulator, NoHarvestMeansIdle) {
  SimulationPlan plan;
  plan.cfg.conversion_efficiency = 1e-12;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const auto o = run_slot(plan, i);
    EXPECT_EQ(o.mode, Mode::Idle);
    EXPECT_FALSE(o.success);
  }
}

TEST(Simulator, SuccessfulSlotsSatisfyEventConditions) {
  SimulationPlan plan;
  const auto& c = plan.cfg;
  const auto r = energy_rates(c);
  int wpr = 0, abr = 0;
  for (std::uint64_t i = 0; i < 600; ++i) {
    const auto o = run_slot(plan, i);
    if (!o.success) continue;
    if (o.mode == Mode::WPR) {
      ++wpr;
      EXPECT_GT(o.sinr_relay, c.sinr_threshold_active);
      EXPECT_GT(o.sinr_dest_wpr, c.sinr_threshold_active);
      EXPECT_GT(o.harvested_energy, r.rho_w * c.slot_duration);
    } else {
      ++abr;
      EXPECT_EQ(o.mode, Mode::ABR);
      EXPECT_GT(o.sinr_relay, c.sinr_threshold_active);
      EXPECT_GT(o.snr_dest_abr, c.snr_threshold_backscatter);
      EXPECT_GT(o.harvested_energy, c.abr_circuit_energy);
    }
  }
  EXPECT_GT(wpr, 0);
  EXPECT_GT(abr, 0);
}

TEST(Simulator, BothHopsSeeTheSameInterferers) {
  SimulationPlan plan;
  const auto d = draw_slot(plan, 3);
  const auto s = slot_state(d, plan.cfg);
  const auto ref = sinr_values(d.fading, d.interferers, d.gains_relay, d.gains_dest, d.q, plan.cfg);
  EXPECT_EQ(s.sinr.interference_relay, ref.interference_relay);
  EXPECT_EQ(s.sinr.interference_dest, ref.interference_dest);
  EXPECT_GT(d.interferers.size(), 100u);
  EXPECT_EQ(d.gains_relay.size(), d.interferers.size());
  EXPECT_EQ(d.gains_dest.size(), d.interferers.size());
}

TEST(Simulator, FixedFieldAbrMatchesFadingQuadrature) {
  const auto plan = fixture(Protocol::PureABR);
  const auto& c = plan.cfg;
  const double floor = energy_rates(c).varrho_a;
  const double scale = std::pow(c.d_rd, c.pathloss_active) * c.noise_ambient * c.snr_threshold_backscatter /
                       (c.reflection_fraction * c.backscatter_efficiency);
  const double exact =
      relay_hop(plan) * over_emitter_gains(plan, [&](double q) { return q > floor ? std::exp(-scale / q) : 0.0; });
  const auto r = estimate(plan);
  EXPECT_LT(std::abs(r.success_probability.value - exact), 3.0 * r.success_probability.standard_error)
      << "mc " << r.success_probability.value << " exact " << exact;
}

TEST(Simulator, FixedFieldWprMatchesFadingQuadrature) {
  const auto plan = fixture(Protocol::PureWPR);
  const auto& c = plan.cfg;
  const double interferer =
      c.interferer_power * std::pow(distance((*plan.fixed_interferers)[0], {c.d_rd, 0.0}), -c.pathloss_active);
  const double floor = energy_rates(c).varrho_w;
  auto dest = [&](double q) {
    if (q <= floor) return 0.0;
    const double b = c.sinr_threshold_active / (wpr_transmit_power(q, c) * std::pow(c.d_rd, -c.pathloss_active));
    return std::exp(-b * c.noise_active) / (1.0 + b * interferer);
  };
  const double exact = relay_hop(plan) * over_emitter_gains(plan, dest);
  const auto r = estimate(plan);
  EXPECT_LT(std::abs(r.success_probability.value - exact), 3.0 * r.success_probability.standard_error)
      << "mc " << r.success_probability.value << " exact " << exact;
}

TEST(Simulator, EtcpCommitsFollowExplorationCounts) {
  // WPR can never fire, so ABR is committed unless it also scored zero, in
  // which case the coin decides.
  SimulationPlan plan;
  plan.cfg.etcp_exploration = 1;
  plan.cfg.wpr_circuit_energy = plan.cfg.capacitor_energy = 1e3;
  plan.protocol = Protocol::ETCP;
  plan.etcp_steady_slots = 2;
  plan.slots = 4 * 3000;
  const auto r = estimate(plan);
  const double s_abr = AnalyticEngine(plan.cfg).success_abr().value;
  const double expected_wpr = 0.5 * (1.0 - s_abr);
  const double se = std::sqrt(expected_wpr * (1.0 - expected_wpr) / 3000.0);
  EXPECT_NEAR(r.mode_fractions.at("commit_WPR"), expected_wpr, 3.0 * se);
  EXPECT_NEAR(r.mode_fractions.at("commit_WPR") + r.mode_fractions.at("commit_ABR"), 1.0, 1e-12);
}

TEST(Simulator, EtcpNeedsCompleteExploration) {
  SimulationPlan plan;
  plan.protocol = Protocol::ETCP;
  plan.slots = 10;
  EXPECT_ANY_THROW(estimate(plan));
}
