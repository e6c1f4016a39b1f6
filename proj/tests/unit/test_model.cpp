#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hrelay/errors.hpp"
#include "hrelay/model.hpp"

using namespace hrelay;

namespace {

SystemConfig default_profile() { return SystemConfig{}; }

}  // namespace

TEST(ReceivedPower, EmptyPatternGivesZero) {
  EXPECT_EQ(received_ambient_power({}, {}, default_profile()), 0.0);
}

TEST(ReceivedPower, UnitDistanceUnitGain) {
  const std::vector<Point> pts{{1.0, 0.0}};
  const std::vector<double> g{1.0};
  EXPECT_DOUBLE_EQ(received_ambient_power(pts, g, default_profile()), 10.0);
}

TEST(ReceivedPower, TwoPointsAtTwoMeters) {
  const std::vector<Point> pts{{2.0, 0.0}, {0.0, -2.0}};
  const std::vector<double> g{1.0, 2.0};
  EXPECT_NEAR(received_ambient_power(pts, g, default_profile()), 3.75, 1e-12);
}

TEST(Harvest, LinearInPower) {
  const auto c = default_profile();
  EXPECT_EQ(harvest(0.0, c), 0.0);
  EXPECT_NEAR(harvest(1e-3, c), 2e-4, 1e-18);
  auto lossless = c;
  lossless.conversion_efficiency = 1.0;
  lossless.harvest_fraction = 1.0 - 1e-12;
  EXPECT_NEAR(harvest(0.7, lossless), 0.7, 1e-9);
}

TEST(WprPower, ThreeRegimes) {
  const auto c = default_profile();
  const auto r = energy_rates(c);
  EXPECT_NEAR(r.varrho_w, 2.5e-4, 1e-18);
  EXPECT_NEAR(r.varrho_c, 0.1, 1e-15);
  EXPECT_EQ(wpr_transmit_power(r.varrho_w, c), 0.0);
  EXPECT_NEAR(wpr_transmit_power(1e-3, c), 5e-4, 1e-15);
  EXPECT_NEAR(wpr_transmit_power(1.0, c), 0.04 / 0.6, 1e-15);
}

TEST(WprPower, ContinuousAndNondecreasing) {
  const auto c = default_profile();
  const auto r = energy_rates(c);
  const double top = r.varrho_w + r.varrho_c;
  EXPECT_NEAR(wpr_transmit_power(top * (1 - 1e-12), c), wpr_transmit_power(top * (1 + 1e-12), c), 1e-12);
  EXPECT_NEAR(wpr_transmit_power(r.varrho_w * (1 + 1e-12), c), 0.0, 1e-12);
  double prev = 0.0;
  for (double q = 1e-6; q < 10.0; q *= 1.1) {
    const double p = wpr_transmit_power(q, c);
    EXPECT_GE(p, prev);
    EXPECT_LE(p, 2.0 * r.rho_c / (1.0 - c.harvest_fraction) + 1e-15);
    prev = p;
  }
}

TEST(AbrPower, ReflectedFraction) {
  const auto c = default_profile();
  EXPECT_EQ(abr_transmit_power(0.0, c), 0.0);
  EXPECT_NEAR(abr_transmit_power(1e-3, c), 93.75e-6, 1e-18);
  auto perfect = c;
  perfect.reflection_fraction = perfect.backscatter_efficiency = 1.0;
  EXPECT_EQ(abr_transmit_power(0.3, perfect), 0.3);
}

TEST(Auxiliary, KappaEllDelta) {
  const auto c = default_profile();
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  EXPECT_EQ(kappa(c, 0.0), 0.0);
  for (int i = 0; i < 20; ++i) {
    const double v = u(gen), p = u(gen);
    EXPECT_NEAR(kappa(c, 2.0 * v), 2.0 * kappa(c, v), 1e-12 * kappa(c, v));
    EXPECT_NEAR(kappa(c, v), std::pow(5.0, 3.5) * v / 0.1, 1e-9 * kappa(c, v));
    EXPECT_NEAR(ell(c, v, 2.0 * p), 0.5 * ell(c, v, p), 1e-12 * ell(c, v, p));
    EXPECT_GT(ell(c, v, p), 0.0);
  }
  double prev = 0.0;
  for (double q = 1e-8; q < 1e3; q *= 1.5) {
    const double d = delta(c, q);
    if (prev > 0.0) EXPECT_GT(d, prev);
    EXPECT_GE(d, prev);
    EXPECT_LT(d, 1.0);
    prev = d;
  }
  EXPECT_GT(prev, 0.9);
  EXPECT_NEAR(delta(c, 1e12), 1.0, 1e-9);
}

TEST(Sinr, NoInterferersUnitValues) {
  auto c = default_profile();
  c.noise_active = 1.0;
  c.source_power = 1.0;
  c.d_sr = 1.0;
  const auto s = sinr_values(LinkFading{}, {}, {}, {}, 1e-3, c);
  EXPECT_DOUBLE_EQ(s.relay, 1.0);
}

TEST(Sinr, SingleInterfererAtUnitDistance) {
  auto c = default_profile();
  c.noise_active = 0.0;
  c.interferer_power = 1.0;
  const std::vector<Point> pts{{0.0, 1.0}};
  const std::vector<double> g{1.0};
  LinkFading f{0.7, 1.0, 1.0};
  const auto s = sinr_values(f, pts, g, g, 1e-3, c);
  EXPECT_NEAR(s.relay, c.source_power * 0.7 * std::pow(c.d_sr, -c.pathloss_active), 1e-15);
}

TEST(Sinr, MatchesDirectEvaluation) {
  const auto c = default_profile();
  std::mt19937_64 gen(11);
  std::exponential_distribution<double> ex(1.0);
  std::uniform_real_distribution<double> u(-300.0, 300.0);
  std::vector<Point> pts(50);
  std::vector<double> gr(50), gd(50);
  for (int i = 0; i < 50; ++i) {
    pts[i] = {u(gen), u(gen)};
    gr[i] = ex(gen);
    gd[i] = ex(gen);
  }
  LinkFading f{ex(gen), ex(gen), ex(gen)};
  const double q = 3e-3;
  const auto s = sinr_values(f, pts, gr, gd, q, c);
  double ir = 0.0, id = 0.0;
  for (int i = 0; i < 50; ++i) {
    ir += c.interferer_power * gr[i] / std::pow(std::hypot(pts[i].x, pts[i].y), 3.5);
    id += c.interferer_power * gd[i] / std::pow(std::hypot(pts[i].x - 5.0, pts[i].y), 3.5);
  }
  const double pw = 2.0 * (0.4 * 0.5 * q - 50e-6) / 0.6;
  const double nu_r = 0.1 * f.source_relay / std::pow(5.0, 3.5) / (ir + 5e-11);
  const double nu_d = pw * f.relay_dest / std::pow(5.0, 3.5) / (id + 5e-11);
  const double nu_a = 0.375 * 0.25 * q * f.relay_dest_backscatter / std::pow(5.0, 3.5) / 2e-8;
  EXPECT_NEAR(s.relay / nu_r, 1.0, 1e-12);
  EXPECT_NEAR(s.dest_wpr / nu_d, 1.0, 1e-12);
  EXPECT_NEAR(s.dest_abr / nu_a, 1.0, 1e-12);
}

TEST(Sinr, JointScaleInvariance) {
  const auto c = default_profile();
  const std::vector<Point> pts{{3.0, 4.0}, {-20.0, 7.0}};
  const std::vector<double> g{0.5, 1.7};
  const auto a = sinr_values(LinkFading{1.3, 1, 1}, pts, g, g, 1e-3, c);
  auto scaled = c;
  scaled.source_power *= 7.0;
  scaled.interferer_power *= 7.0;
  scaled.noise_active *= 7.0;
  const auto b = sinr_values(LinkFading{1.3, 1, 1}, pts, g, g, 1e-3, scaled);
  EXPECT_NEAR(a.relay / b.relay, 1.0, 1e-12);
}

TEST(Capacity, ThresholdAndLogRate) {
  const auto c = default_profile();
  EXPECT_EQ(end_to_end_capacity(1.0 - 1e-9, 5.0, Mode::WPR, false, c), 0.0);
  EXPECT_NEAR(end_to_end_capacity(3.0, 3.0, Mode::WPR, false, c), 30000.0, 1e-9);
  EXPECT_NEAR(end_to_end_capacity(0.0, 0.0, Mode::ABR, true, c), 15000.0, 1e-9);
  EXPECT_EQ(end_to_end_capacity(9.0, 9.0, Mode::Idle, true, c), 0.0);
  double prev = 0.0;
  for (double nu = 0.5; nu < 100.0; nu *= 1.3) {
    const double cap = end_to_end_capacity(nu, nu, Mode::WPR, false, c);
    EXPECT_GE(cap, prev);
    prev = cap;
  }
}

TEST(Validate, CollectsEveryProblem) {
  auto c = default_profile();
  EXPECT_TRUE(validate(c).empty());
  c.harvest_fraction = 1.2;
  c.pathloss_active = 2.0;
  c.abr_circuit_energy = 1.0;
  c.emitter_repulsion = Repulsion::ginibre(-1.5);
  const auto p = validate(c);
  EXPECT_EQ(p.size(), 4u);
  EXPECT_THROW(require_valid(c), ConfigError);
}
