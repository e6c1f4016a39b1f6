#include "hrelay/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hrelay/errors.hpp"

namespace hrelay {

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "invalid configuration:";
        for (const auto& p : problems) os << "\n  - " << p;
        return os.str();
      }()),
      problems_(std::move(problems)) {}

double norm(Point p) { return std::hypot(p.x, p.y); }
double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

namespace {

void positive(std::vector<std::string>& out, const char* name, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) out.push_back(std::string(name) + " must be positive and finite");
}

void unit_interval(std::vector<std::string>& out, const char* name, double v) {
  if (!(v > 0.0 && v <= 1.0)) out.push_back(std::string(name) + " must lie in (0, 1]");
}

void repulsion(std::vector<std::string>& out, const char* name, Repulsion r) {
  if (r.is_ppp()) return;
  if (!(r.alpha >= -1.0 && r.alpha < 0.0))
    out.push_back(std::string(name) + " must be PPP or lie in [-1, 0)");
}

}  // namespace

std::vector<std::string> validate(const SystemConfig& c) {
  std::vector<std::string> out;
  positive(out, "emitter_density", c.emitter_density);
  positive(out, "interferer_density", c.interferer_density);
  repulsion(out, "emitter_repulsion", c.emitter_repulsion);
  repulsion(out, "interferer_repulsion", c.interferer_repulsion);
  positive(out, "emitter_power", c.emitter_power);
  positive(out, "interferer_power", c.interferer_power);
  positive(out, "source_power", c.source_power);
  if (!(c.pathloss_ambient > 2.0)) out.push_back("pathloss_ambient must exceed 2");
  if (!(c.pathloss_active > 2.0)) out.push_back("pathloss_active must exceed 2");
  positive(out, "noise_ambient", c.noise_ambient);
  positive(out, "noise_active", c.noise_active);
  unit_interval(out, "conversion_efficiency", c.conversion_efficiency);
  unit_interval(out, "reflection_fraction", c.reflection_fraction);
  unit_interval(out, "backscatter_efficiency", c.backscatter_efficiency);
  if (!(c.harvest_fraction > 0.0 && c.harvest_fraction < 1.0))
    out.push_back("harvest_fraction must satisfy 0 < omega < 1 (time allocation bound)");
  positive(out, "slot_duration", c.slot_duration);
  positive(out, "capacitor_energy", c.capacitor_energy);
  positive(out, "wpr_circuit_energy", c.wpr_circuit_energy);
  positive(out, "abr_circuit_energy", c.abr_circuit_energy);
  if (!(c.abr_circuit_energy <= c.wpr_circuit_energy && c.wpr_circuit_energy <= c.capacitor_energy))
    out.push_back("energies must satisfy E_A <= E_W <= E_C");
  positive(out, "sinr_threshold_active", c.sinr_threshold_active);
  positive(out, "snr_threshold_backscatter", c.snr_threshold_backscatter);
  positive(out, "backscatter_capacity", c.backscatter_capacity);
  positive(out, "bandwidth_active", c.bandwidth_active);
  positive(out, "d_sr", c.d_sr);
  positive(out, "d_rd", c.d_rd);
  positive(out, "window_radius", c.window_radius);
  if (c.window_radius <= c.d_rd) out.push_back("window_radius must exceed d_rd");
  if (c.etcp_exploration < 1) out.push_back("etcp_exploration must be a positive integer");
  return out;
}

void require_valid(const SystemConfig& cfg) {
  auto problems = validate(cfg);
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

EnergyRates energy_rates(const SystemConfig& c) {
  EnergyRates r{};
  r.rho_w = c.wpr_circuit_energy / c.slot_duration;
  r.rho_a = c.abr_circuit_energy / c.slot_duration;
  r.rho_c = c.capacitor_energy / c.slot_duration;
  const double ob = c.harvest_fraction * c.conversion_efficiency;
  r.varrho_w = r.rho_w / ob;
  r.varrho_a = r.rho_a / ob;
  r.varrho_c = r.rho_c / ob;
  return r;
}

double kappa(const SystemConfig& c, double v) {
  return std::pow(c.d_sr, c.pathloss_active) * v / c.source_power;
}

double ell(const SystemConfig& c, double v, double p) {
  return std::pow(c.d_rd, c.pathloss_active) * v * (1.0 - c.harvest_fraction) / (2.0 * p);
}

double delta(const SystemConfig& c, double q) {
  if (q <= 0.0) return 0.0;
  const double num = std::pow(c.d_rd, c.pathloss_active) * c.noise_ambient * c.snr_threshold_backscatter;
  return std::exp(-num / (c.reflection_fraction * c.backscatter_efficiency * q));
}

double received_ambient_power(std::span<const Point> emitters, std::span<const double> gains,
                              const SystemConfig& c) {
  double sum = 0.0;
  for (std::size_t k = 0; k < emitters.size(); ++k)
    sum += gains[k] * std::pow(norm(emitters[k]), -c.pathloss_ambient);
  return c.emitter_power * sum;
}

double harvest(double q, const SystemConfig& c) {
  return c.harvest_fraction * c.slot_duration * c.conversion_efficiency * q;
}

double wpr_transmit_power(double q, const SystemConfig& c) {
  const auto r = energy_rates(c);
  const double w = c.harvest_fraction;
  if (q <= r.varrho_w) return 0.0;
  if (q <= r.varrho_w + r.varrho_c) return 2.0 * (w * c.conversion_efficiency * q - r.rho_w) / (1.0 - w);
  return 2.0 * r.rho_c / (1.0 - w);
}

double abr_transmit_power(double q, const SystemConfig& c) {
  return c.reflection_fraction * c.backscatter_efficiency * q;
}

const char* to_string(Mode m) {
  switch (m) {
    case Mode::WPR: return "WPR";
    case Mode::ABR: return "ABR";
    case Mode::Idle: return "Idle";
  }
  return "?";
}

Sinr sinr_values(const LinkFading& f, std::span<const Point> interferers,
                 std::span<const double> gains_at_relay, std::span<const double> gains_at_dest,
                 double q, const SystemConfig& c) {
  const double mu = c.pathloss_active;
  const Point dest{c.d_rd, 0.0};
  double ir = 0.0, id = 0.0;
  for (std::size_t j = 0; j < interferers.size(); ++j) {
    ir += gains_at_relay[j] * std::pow(norm(interferers[j]), -mu);
    id += gains_at_dest[j] * std::pow(distance(interferers[j], dest), -mu);
  }
  ir *= c.interferer_power;
  id *= c.interferer_power;
  Sinr s;
  s.interference_relay = ir;
  s.interference_dest = id;
  s.relay = c.source_power * f.source_relay * std::pow(c.d_sr, -mu) / (ir + c.noise_active);
  const double pw = wpr_transmit_power(q, c);
  s.dest_wpr = pw * f.relay_dest * std::pow(c.d_rd, -mu) / (id + c.noise_active);
  s.dest_abr = abr_transmit_power(q, c) * f.relay_dest_backscatter * std::pow(c.d_rd, -mu) / c.noise_ambient;
  return s;
}

double end_to_end_capacity(double nu_relay, double nu_dest_wpr, Mode mode, bool abr_success,
                           const SystemConfig& c) {
  const double hop = 0.5 * (1.0 - c.harvest_fraction);
  if (mode == Mode::WPR) {
    const double nu = std::min(nu_relay, nu_dest_wpr);
    if (nu < c.sinr_threshold_active) return 0.0;
    return hop * c.bandwidth_active * std::log2(1.0 + nu);
  }
  if (mode == Mode::ABR && abr_success) return hop * c.backscatter_capacity;
  return 0.0;
}

}  // namespace hrelay
