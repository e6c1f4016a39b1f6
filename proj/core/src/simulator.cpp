#include "hrelay/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <thread>

#include "hrelay/errors.hpp"
#include "hrelay/rng.hpp"
#include "hrelay/sampler.hpp"

namespace hrelay {

namespace {

enum StreamTag : std::uint64_t { kEmitters = 1, kInterferers = 2, kFading = 3, kCoin = 4, kTieBreak = 5 };

double exp1(Rng& rng) { return -std::log(rng.uniform_pos()); }

struct SlotRecord {
  SlotOutcome wpr, abr, esap;
  bool urms_picks_wpr = false;
};

SlotRecord record_for(const SimulationPlan& plan, std::uint64_t i) {
  const auto s = slot_state(draw_slot(plan, i), plan.cfg);
  SlotRecord r;
  r.wpr = attempt_wpr(s, plan.cfg);
  r.abr = attempt_abr(s, plan.cfg);
  r.esap = esap_slot(s, plan.cfg);
  r.urms_picks_wpr = s.urms_picks_wpr;
  return r;
}

std::vector<SlotRecord> run_records(const SimulationPlan& plan, std::uint64_t n) {
  std::vector<SlotRecord> recs(n);
  const int threads = std::max(1, plan.threads);
  if (threads == 1 || n < 2) {
    for (std::uint64_t i = 0; i < n; ++i) recs[i] = record_for(plan, i);
    return recs;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::uint64_t i = t; i < n; i += threads) recs[i] = record_for(plan, i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return recs;
}

// Accumulates iid slot outcomes.
struct Tally {
  std::uint64_t n = 0, wins = 0;
  double cap_sum = 0.0, cap_sq = 0.0;
  std::map<std::string, double> modes;

  void add(const SlotOutcome& o) {
    ++n;
    wins += o.success ? 1 : 0;
    cap_sum += o.capacity;
    cap_sq += o.capacity * o.capacity;
    modes[to_string(o.mode)] += 1.0;
  }

  PerformanceReport report(const SimulationPlan& plan) const {
    PerformanceReport r;
    r.slots = n;
    r.seed = plan.seed;
    r.success_probability = wilson_interval(wins, n);
    const double mean = n ? cap_sum / n : 0.0;
    const double var = n > 1 ? std::max(0.0, (cap_sq - n * mean * mean) / (n - 1)) : 0.0;
    const double se = n ? std::sqrt(var / n) : 0.0;
    r.ergodic_capacity = {mean, se, mean - 1.96 * se, mean + 1.96 * se};
    r.energy_efficiency = mean / plan.cfg.source_power;
    for (const auto& [k, v] : modes) r.mode_fractions[k] = v / std::max<std::uint64_t>(n, 1);
    return r;
  }
};

void write_log(const std::string& path, const std::vector<std::pair<std::uint64_t, SlotOutcome>>& rows) {
  std::ofstream os(path);
  if (!os) throw ConfigError({"cannot open slot log '" + path + "' for writing"});
  os << "slot,mode,E_R_J,nu_R,nu_D,success,capacity_bps\n";
  os.precision(10);
  for (const auto& [i, o] : rows) {
    const double nu_d = o.mode == Mode::ABR ? o.snr_dest_abr : o.sinr_dest_wpr;
    os << i << ',' << to_string(o.mode) << ',' << o.harvested_energy << ',' << o.sinr_relay << ',' << nu_d << ','
       << (o.success ? 1 : 0) << ',' << o.capacity << '\n';
  }
}

struct EtcpResult {
  PerformanceReport report;
  std::vector<std::pair<std::uint64_t, SlotOutcome>> log;
};

EtcpResult etcp_from_records(const SimulationPlan& plan, const std::vector<SlotRecord>& recs, bool want_log) {
  const int n = plan.cfg.etcp_exploration;
  const std::uint64_t len = 2 * static_cast<std::uint64_t>(n) + plan.etcp_steady_slots;
  const std::uint64_t sessions = recs.size() / len;
  if (sessions == 0) throw DomainError("ETCP needs at least one full session of 2n + steady slots");
  std::vector<double> sess_success, sess_cap;
  std::uint64_t total = 0, commit_w = 0, commit_a = 0;
  std::map<std::string, double> modes;
  EtcpResult out;
  for (std::uint64_t s = 0; s < sessions; ++s) {
    const std::uint64_t base = s * len;
    int wins_w = 0, wins_a = 0;
    double succ = 0.0, cap = 0.0;
    std::uint64_t counted = 0;
    auto count = [&](std::uint64_t i, const SlotOutcome& o) {
      succ += o.success ? 1.0 : 0.0;
      cap += o.capacity;
      ++counted;
      modes[to_string(o.mode)] += 1.0;
      if (want_log) out.log.emplace_back(i, o);
    };
    for (int k = 0; k < n; ++k) {
      const auto& a = recs[base + 2 * k].abr;
      const auto& w = recs[base + 2 * k + 1].wpr;
      wins_a += a.success ? 1 : 0;
      wins_w += w.success ? 1 : 0;
      if (plan.etcp_include_exploration) {
        count(base + 2 * k, a);
        count(base + 2 * k + 1, w);
      }
    }
    bool use_wpr;
    if (wins_w != wins_a) {
      use_wpr = wins_w > wins_a;
    } else {
      auto coin = Rng::for_stream(plan.seed, s, kTieBreak);
      use_wpr = coin.uniform() < 0.5;
    }
    (use_wpr ? commit_w : commit_a) += 1;
    for (std::uint64_t i = base + 2 * n; i < base + len; ++i) count(i, use_wpr ? recs[i].wpr : recs[i].abr);
    sess_success.push_back(succ / counted);
    sess_cap.push_back(cap / counted);
    total += counted;
  }
  auto cluster = [](const std::vector<double>& x) {
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    double v = 0.0;
    for (double e : x) v += (e - m) * (e - m);
    v = x.size() > 1 ? v / (x.size() - 1) : 0.0;
    const double se = std::sqrt(v / x.size());
    return Estimate{m, se, m - 1.96 * se, m + 1.96 * se};
  };
  auto& r = out.report;
  r.slots = total;
  r.seed = plan.seed;
  r.success_probability = cluster(sess_success);
  r.success_probability.ci_low = std::max(0.0, r.success_probability.ci_low);
  r.success_probability.ci_high = std::min(1.0, r.success_probability.ci_high);
  r.ergodic_capacity = cluster(sess_cap);
  r.energy_efficiency = r.ergodic_capacity.value / plan.cfg.source_power;
  for (const auto& [k, v] : modes) r.mode_fractions[k] = v / std::max<std::uint64_t>(total, 1);
  r.mode_fractions["commit_WPR"] = static_cast<double>(commit_w) / sessions;
  r.mode_fractions["commit_ABR"] = static_cast<double>(commit_a) / sessions;
  return out;
}

}  // namespace

Estimate wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  Estimate e;
  if (trials == 0) return e;
  const double n = static_cast<double>(trials);
  const double p = successes / n;
  e.value = p;
  e.standard_error = std::sqrt(p * (1.0 - p) / n);
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  e.ci_low = std::max(0.0, centre - half);
  e.ci_high = std::min(1.0, centre + half);
  return e;
}

SlotDraw draw_slot(const SimulationPlan& plan, std::uint64_t i) {
  const auto& c = plan.cfg;
  SlotDraw d;
  std::vector<Point> emitters;
  if (plan.fixed_emitters) {
    emitters = *plan.fixed_emitters;
  } else {
    SamplerSpec spec;
    spec.intensity = c.emitter_density;
    spec.repulsion = c.emitter_repulsion;
    spec.window_radius = c.window_radius;
    spec.exact_modes = plan.emitter_exact_modes;
    spec.exclusion_centers = {{0.0, 0.0}, {c.d_rd, 0.0}};
    spec.exclusion_radius = plan.exclusion_radius;
    auto rng = Rng::for_stream(plan.seed, i, kEmitters);
    sample_field(spec, rng, emitters);
  }
  if (plan.fixed_interferers) {
    d.interferers = *plan.fixed_interferers;
  } else {
    SamplerSpec spec;
    spec.intensity = c.interferer_density;
    spec.repulsion = c.interferer_repulsion;
    spec.window_radius = c.window_radius;
    spec.exact_modes = plan.interferer_exact_modes;
    spec.exclusion_centers = {{0.0, 0.0}, {c.d_rd, 0.0}};
    spec.exclusion_radius = plan.exclusion_radius;
    auto rng = Rng::for_stream(plan.seed, i, kInterferers);
    sample_field(spec, rng, d.interferers);
  }
  auto rng = Rng::for_stream(plan.seed, i, kFading);
  double sum = 0.0;
  for (const auto& e : emitters) sum += exp1(rng) * std::pow(norm(e), -c.pathloss_ambient);
  d.q = c.emitter_power * sum;
  d.gains_relay.resize(d.interferers.size());
  d.gains_dest.resize(d.interferers.size());
  for (std::size_t j = 0; j < d.interferers.size(); ++j) {
    d.gains_relay[j] = exp1(rng);
    d.gains_dest[j] = exp1(rng);
  }
  d.fading.source_relay = exp1(rng);
  d.fading.relay_dest = exp1(rng);
  d.fading.relay_dest_backscatter = exp1(rng);
  auto coin = Rng::for_stream(plan.seed, i, kCoin);
  d.urms_picks_wpr = coin.uniform() < 0.5;
  return d;
}

SlotState slot_state(const SlotDraw& d, const SystemConfig& c) {
  SlotState s;
  s.q = d.q;
  s.energy = harvest(d.q, c);
  s.sinr = sinr_values(d.fading, d.interferers, d.gains_relay, d.gains_dest, d.q, c);
  s.urms_picks_wpr = d.urms_picks_wpr;
  return s;
}

namespace {

SlotOutcome base_outcome(const SlotState& s) {
  SlotOutcome o;
  o.harvested_energy = s.energy;
  o.sinr_relay = s.sinr.relay;
  o.sinr_dest_wpr = s.sinr.dest_wpr;
  o.snr_dest_abr = s.sinr.dest_abr;
  return o;
}

}  // namespace

SlotOutcome attempt_wpr(const SlotState& s, const SystemConfig& c) {
  SlotOutcome o = base_outcome(s);
  if (!(s.energy > c.wpr_circuit_energy)) return o;
  o.mode = Mode::WPR;
  const double tau = c.sinr_threshold_active;
  o.success = s.sinr.relay > tau && s.sinr.dest_wpr > tau;
  o.capacity = o.success ? end_to_end_capacity(s.sinr.relay, s.sinr.dest_wpr, Mode::WPR, true, c) : 0.0;
  return o;
}

SlotOutcome attempt_abr(const SlotState& s, const SystemConfig& c) {
  SlotOutcome o = base_outcome(s);
  if (!(s.energy > c.abr_circuit_energy)) return o;
  o.mode = Mode::ABR;
  o.success = s.sinr.relay > c.sinr_threshold_active && s.sinr.dest_abr > c.snr_threshold_backscatter;
  o.capacity = end_to_end_capacity(s.sinr.relay, 0.0, Mode::ABR, o.success, c);
  return o;
}

SlotOutcome esap_slot(const SlotState& s, const SystemConfig& c) {
  const double tau = c.sinr_threshold_active;
  if (s.energy > c.wpr_circuit_energy && s.sinr.relay > tau && s.sinr.dest_wpr > tau) return attempt_wpr(s, c);
  return attempt_abr(s, c);
}

SlotOutcome protocol_slot(const SlotState& s, Protocol p, const SystemConfig& c) {
  switch (p) {
    case Protocol::ESAP: return esap_slot(s, c);
    case Protocol::PureABR: return attempt_abr(s, c);
    case Protocol::PureWPR: return attempt_wpr(s, c);
    case Protocol::URMS: return s.urms_picks_wpr ? attempt_wpr(s, c) : attempt_abr(s, c);
    case Protocol::ETCP: break;
  }
  throw DomainError("ETCP slots depend on their session; use run_etcp_session");
}

SlotOutcome run_slot(const SimulationPlan& plan, std::uint64_t slot_index) {
  return protocol_slot(slot_state(draw_slot(plan, slot_index), plan.cfg), plan.protocol, plan.cfg);
}

PerformanceReport run_etcp_session(const SimulationPlan& plan) {
  if (plan.protocol != Protocol::ETCP) throw DomainError("run_etcp_session needs an ETCP plan");
  require_valid(plan.cfg);
  const auto recs = run_records(plan, plan.slots);
  auto res = etcp_from_records(plan, recs, !plan.slot_log_path.empty());
  if (!plan.slot_log_path.empty()) write_log(plan.slot_log_path, res.log);
  return res.report;
}

PerformanceReport estimate(const SimulationPlan& plan) {
  if (plan.slots < 1) throw DomainError("a simulation needs at least one slot");
  if (plan.protocol == Protocol::ETCP) {
    if (plan.slots <= 2 * static_cast<std::uint64_t>(plan.cfg.etcp_exploration))
      throw DomainError("ETCP needs more than 2n slots");
    return run_etcp_session(plan);
  }
  return estimate_all(plan).at(plan.protocol);
}

std::map<Protocol, PerformanceReport> estimate_all(const SimulationPlan& plan) {
  require_valid(plan.cfg);
  if (plan.slots < 1) throw DomainError("a simulation needs at least one slot");
  const auto recs = run_records(plan, plan.slots);
  Tally esap, abr, wpr, urms;
  std::vector<std::pair<std::uint64_t, SlotOutcome>> log;
  const bool want_log = !plan.slot_log_path.empty();
  for (std::uint64_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    esap.add(r.esap);
    abr.add(r.abr);
    wpr.add(r.wpr);
    const auto& u = r.urms_picks_wpr ? r.wpr : r.abr;
    urms.add(u);
    if (want_log && plan.protocol != Protocol::ETCP) {
      const SlotOutcome& o = plan.protocol == Protocol::ESAP      ? r.esap
                             : plan.protocol == Protocol::PureABR ? r.abr
                             : plan.protocol == Protocol::PureWPR ? r.wpr
                                                                  : u;
      log.emplace_back(i, o);
    }
  }
  std::map<Protocol, PerformanceReport> out;
  out[Protocol::ESAP] = esap.report(plan);
  out[Protocol::PureABR] = abr.report(plan);
  out[Protocol::PureWPR] = wpr.report(plan);
  out[Protocol::URMS] = urms.report(plan);
  const std::uint64_t len = 2 * static_cast<std::uint64_t>(plan.cfg.etcp_exploration) + plan.etcp_steady_slots;
  if (recs.size() >= len) {
    auto res = etcp_from_records(plan, recs, want_log && plan.protocol == Protocol::ETCP);
    out[Protocol::ETCP] = res.report;
    if (want_log && plan.protocol == Protocol::ETCP) log = std::move(res.log);
  }
  if (want_log) write_log(plan.slot_log_path, log);
  return out;
}

}  // namespace hrelay
