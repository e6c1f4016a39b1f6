#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "hrelay/analytics.hpp"
#include "hrelay/config.hpp"
#include "hrelay/errors.hpp"
#include "hrelay/optimizer.hpp"
#include "hrelay/simulator.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hrelay;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitConfig = 4;

const std::vector<Protocol> kAllProtocols = {Protocol::ESAP, Protocol::ETCP, Protocol::PureABR, Protocol::PureWPR,
                                             Protocol::URMS};

struct Common {
  std::string config_path;
  std::string protocol;
  std::uint64_t slots = 100000;
  std::uint64_t seed = 1;
  std::vector<std::string> sweep;
  std::string out = "out";
  int threads = 1;
  bool strict = false;
};

struct Sweep {
  std::string key;
  double start, stop;
  int points;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open configuration file '" + path + "'"});
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Document the run is based on: the file, or the built-in default profile.
std::string base_document(const Common& c) {
  return c.config_path.empty() ? config_to_json(SystemConfig{}) : read_text(c.config_path);
}

std::vector<Protocol> protocols(const Common& c, std::vector<Protocol> fallback) {
  if (c.protocol.empty()) return fallback;
  return {parse_protocol(c.protocol)};
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

double to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

json estimate_json(const Estimate& e) {
  return {{"value", e.value}, {"standard_error", e.standard_error}, {"ci_low", e.ci_low}, {"ci_high", e.ci_high}};
}

json report_json(const PerformanceReport& r) {
  return {{"success_probability", estimate_json(r.success_probability)},
          {"ergodic_capacity_bps", estimate_json(r.ergodic_capacity)},
          {"energy_efficiency_bit_per_j", r.energy_efficiency},
          {"mode_fractions", r.mode_fractions},
          {"slots", r.slots},
          {"seed", r.seed}};
}

class Run {
 public:
  Run(std::string command, const Common& c, SystemConfig cfg) : c_(c), start_(std::chrono::steady_clock::now()) {
    m_.command = std::move(command);
    m_.cfg = cfg;
    m_.seed = c.seed;
    m_.options["config_path"] = c.config_path.empty() ? "builtin" : c.config_path;
    if (!c.protocol.empty()) m_.options["protocol"] = c.protocol;
    fs::create_directories(c.out);
  }
  void option(const std::string& k, const std::string& v) { m_.options[k] = v; }
  // Names relative to the output directory, so the hash does not depend on where files land.
  void output(const std::string& name) { m_.outputs.push_back(name); }
  // Must be called after every option and output has been declared.
  std::string hash() const { return manifest_hash(m_); }
  void write(const std::string& name, const std::string& text) const {
    std::ofstream((fs::path(c_.out) / name).string()) << text;
  }
  void finish() {
    m_.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write("manifest.json", manifest_to_json(m_) + "\n");
  }
  std::string path(const std::string& name) const { return (fs::path(c_.out) / name).string(); }

 private:
  const Common& c_;
  RunManifest m_;
  std::chrono::steady_clock::time_point start_;
};

json analytic_protocol(const AnalyticEngine& e, Protocol p) {
  const auto s = e.success(p);
  const auto cap = e.capacity(p);
  json j;
  j["success_probability"] = s.value;
  j["ergodic_capacity_bps"] = cap.value;
  j["energy_efficiency_bit_per_j"] = cap.value / e.config().source_power;
  j["success_breakdown"] = s.breakdown;
  j["capacity_breakdown"] = cap.breakdown;
  json numerics = s.numerics;
  for (const auto& [k, v] : cap.numerics) numerics[k] = v;
  j["numerics"] = numerics;
  return j;
}

int cmd_analyze(const Common& c) {
  const std::string doc = base_document(c);
  const SystemConfig cfg = parse_config(doc);
  const auto protos = protocols(c, kAllProtocols);
  Run run("analyze", c, cfg);
  run.output("metrics.json");
  run.output("breakdown.csv");
  const std::string hash = run.hash();

  AnalyticEngine e(cfg);
  json out;
  out["manifest_hash"] = hash;
  out["config_hash"] = config_hash(cfg);
  std::ostringstream csv;
  csv << "protocol,quantity,term,value,manifest\n";
  for (Protocol p : protos) {
    const auto j = analytic_protocol(e, p);
    out["protocols"][to_string(p)] = j;
    const std::string name = to_string(p);
    csv << name << ",success,total," << num(j["success_probability"].get<double>()) << "," << hash << "\n";
    for (const auto& [k, v] : j["success_breakdown"].items())
      csv << name << ",success," << k << "," << num(v.get<double>()) << "," << hash << "\n";
    csv << name << ",capacity,total," << num(j["ergodic_capacity_bps"].get<double>()) << "," << hash << "\n";
    for (const auto& [k, v] : j["capacity_breakdown"].items())
      csv << name << ",capacity," << k << "," << num(v.get<double>()) << "," << hash << "\n";
    std::printf("%-5s success %.6f  capacity %.2f bit/s  efficiency %.6g bit/J\n", name.c_str(),
                j["success_probability"].get<double>(), j["ergodic_capacity_bps"].get<double>(),
                j["energy_efficiency_bit_per_j"].get<double>());
  }
  const auto g = e.gains();
  out["gains"] = {{"over_abr", g.over_abr},
                  {"over_wpr", g.over_wpr},
                  {"over_abr_difference", g.over_abr_difference},
                  {"over_wpr_difference", g.over_wpr_difference}};
  try {
    const auto closed = success_abr_ppp_closed(cfg);
    const double general = e.success_abr().value;
    out["abr_closed_form"] = {{"value", closed.value},
                              {"general_engine", general},
                              {"relative_difference", std::abs(general - closed.value) / closed.value}};
    std::printf("abr closed form %.6f  general engine %.6f  relative difference %.2e\n", closed.value, general,
                std::abs(general - closed.value) / closed.value);
  } catch (const DomainError&) {
  }
  run.write("metrics.json", out.dump(2) + "\n");
  run.write("breakdown.csv", csv.str());
  run.finish();
  return kExitOk;
}

int cmd_simulate(const Common& c, bool slot_log, std::uint64_t steady_slots) {
  const SystemConfig cfg = parse_config(base_document(c));
  SimulationPlan plan;
  plan.cfg = cfg;
  plan.protocol = c.protocol.empty() ? Protocol::ESAP : parse_protocol(c.protocol);
  plan.slots = c.slots;
  plan.seed = c.seed;
  plan.threads = c.threads;
  plan.etcp_steady_slots = steady_slots;
  Run run("simulate", c, cfg);
  run.option("protocol", to_string(plan.protocol));
  run.option("slots", std::to_string(c.slots));
  run.option("etcp_steady_slots", std::to_string(steady_slots));
  run.output("report.json");
  if (slot_log) run.output("slots.csv");
  const std::string hash = run.hash();
  if (slot_log) plan.slot_log_path = run.path("slots.csv");
  const auto rep = estimate(plan);
  json out = report_json(rep);
  out["protocol"] = to_string(plan.protocol);
  out["manifest_hash"] = hash;
  run.write("report.json", out.dump(2) + "\n");
  run.finish();
  std::printf("%s success %.5f +- %.5f  capacity %.2f +- %.2f bit/s\n", to_string(plan.protocol),
              rep.success_probability.value, rep.success_probability.standard_error, rep.ergodic_capacity.value,
              rep.ergodic_capacity.standard_error);
  return kExitOk;
}

std::vector<Sweep> parse_sweeps(const std::vector<std::string>& specs) {
  const auto keys = config_keys();
  std::vector<Sweep> out;
  std::vector<std::string> problems;
  for (const auto& group : specs) {
    std::stringstream ss(group);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      Sweep s{};
      char tail = 0;
      if (eq == std::string::npos ||
          std::sscanf(item.c_str() + eq + 1, "%lf:%lf:%d%c", &s.start, &s.stop, &s.points, &tail) != 3 ||
          s.points < 1) {
        problems.push_back("sweep '" + item + "' is not FIELD=START:STOP:POINTS");
        continue;
      }
      s.key = item.substr(0, eq);
      if (std::find(keys.begin(), keys.end(), s.key) == keys.end()) {
        problems.push_back("sweep field '" + s.key + "' is not a configuration key");
        continue;
      }
      out.push_back(s);
    }
  }
  if (!problems.empty()) throw ConfigError(problems);
  if (out.empty()) throw ConfigError({"sweep needs at least one --sweep FIELD=START:STOP:POINTS"});
  return out;
}

double sweep_value(const Sweep& s, int k) {
  return s.points == 1 ? s.start : s.start + (s.stop - s.start) * k / (s.points - 1);
}

int cmd_sweep(const Common& c, const std::string& engine) {
  if (engine != "analytic" && engine != "simulate") throw DomainError("--engine must be analytic or simulate");
  const std::string doc = base_document(c);
  const SystemConfig base = parse_config(doc);
  const auto sweeps = parse_sweeps(c.sweep);
  const auto protos = protocols(c, kAllProtocols);

  // Cartesian product, last sweep varying fastest. Every point is validated
  // before any work starts.
  std::size_t total = 1;
  for (const auto& s : sweeps) total *= static_cast<std::size_t>(s.points);
  std::vector<std::map<std::string, double>> overrides(total);
  std::vector<SystemConfig> cfgs(total);
  std::vector<std::string> problems;
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t rem = i;
    for (auto it = sweeps.rbegin(); it != sweeps.rend(); ++it) {
      overrides[i][it->key] = sweep_value(*it, static_cast<int>(rem % it->points));
      rem /= it->points;
    }
    try {
      cfgs[i] = parse_config(doc, overrides[i]);
    } catch (const ConfigError& e) {
      for (const auto& p : e.problems()) problems.push_back("point " + std::to_string(i) + ": " + p);
    }
  }
  if (!problems.empty()) throw ConfigError(problems);

  Run run("sweep", c, base);
  std::string spec;
  for (const auto& s : c.sweep) spec += (spec.empty() ? "" : ",") + s;
  run.option("sweep", spec);
  run.option("engine", engine);
  if (engine == "simulate") run.option("slots", std::to_string(c.slots));
  run.output("sweep.csv");
  const std::string hash = run.hash();

  std::vector<std::string> rows(total);
  auto work = [&](std::size_t i) {
    std::string coords;
    for (const auto& [k, v] : overrides[i]) coords += (coords.empty() ? "" : ";") + k + "=" + num(v);
    std::ostringstream out;
    auto row = [&](Protocol p, const char* metric, double value, double se) {
      out << i << "," << coords << "," << to_string(p) << "," << engine << "," << metric << "," << num(value) << ","
          << num(se) << "," << hash << "\n";
    };
    if (engine == "analytic") {
      AnalyticEngine e(cfgs[i]);
      for (Protocol p : protos) {
        const double s = e.success(p).value, cap = e.capacity(p).value;
        row(p, "success_probability", s, 0.0);
        row(p, "ergodic_capacity_bps", cap, 0.0);
        row(p, "energy_efficiency_bit_per_j", cap / cfgs[i].source_power, 0.0);
      }
    } else {
      SimulationPlan plan;
      plan.cfg = cfgs[i];
      plan.slots = c.slots;
      plan.seed = c.seed;
      plan.threads = c.threads;
      const auto reps = estimate_all(plan);
      for (Protocol p : protos) {
        const auto& r = reps.at(p);
        row(p, "success_probability", r.success_probability.value, r.success_probability.standard_error);
        row(p, "ergodic_capacity_bps", r.ergodic_capacity.value, r.ergodic_capacity.standard_error);
        row(p, "energy_efficiency_bit_per_j", r.energy_efficiency,
            r.ergodic_capacity.standard_error / cfgs[i].source_power);
      }
    }
    rows[i] = out.str();
  };
  // Analytic points fan out over threads; the simulator parallelizes inside.
  const int t = engine == "analytic" ? std::max(1, c.threads) : 1;
  std::mutex err_mu;
  std::exception_ptr err;
  std::vector<std::thread> pool;
  for (int k = 0; k < t; ++k) {
    pool.emplace_back([&, k] {
      try {
        for (std::size_t i = k; i < total; i += t) work(i);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);

  std::string csv = "point,coordinates,protocol,engine,metric,value,standard_error,manifest\n";
  for (const auto& r : rows) csv += r;
  run.write("sweep.csv", csv);
  run.finish();
  std::printf("%zu points, %zu rows written to %s\n", total, total * protos.size() * 3, run.path("sweep.csv").c_str());
  return kExitOk;
}

struct OptimizeArgs {
  std::string problem = "p2";
  std::vector<double> targets;
  double power_budget_w = 1.0;
  bool use_simulator = false;
};

int cmd_optimize(const Common& c, const OptimizeArgs& a) {
  if (a.problem != "p1" && a.problem != "p2") throw DomainError("--problem must be p1 or p2");
  if (a.targets.empty()) throw DomainError("--target is required");
  const SystemConfig cfg = parse_config(base_document(c));
  const Protocol protocol = c.protocol.empty() ? Protocol::ESAP : parse_protocol(c.protocol);
  OptimizerOptions opt;
  opt.use_simulator = a.use_simulator;
  opt.simulator_slots = c.slots;
  opt.simulator_seed = c.seed;
  opt.simulator_threads = c.threads;

  Run run("optimize", c, cfg);
  run.option("problem", a.problem);
  run.option("protocol", to_string(protocol));
  run.option("power_budget_w", num(a.power_budget_w));
  std::string ts;
  for (double t : a.targets) ts += (ts.empty() ? "" : ",") + num(t);
  run.option("targets", ts);
  run.option("engine", a.use_simulator ? "simulate" : "analytic");
  run.output("result.json");
  run.output("trace.csv");
  const std::string hash = run.hash();

  DesignEvaluator eval(cfg, protocol, opt);
  json results = json::array();
  std::string trace = "target,omega,source_power_w,capacity_bps,success,efficiency_bit_per_j,manifest\n";
  std::size_t seen = 0;
  bool all_feasible = true;
  for (double target : a.targets) {
    const auto r = a.problem == "p1" ? solve_p1(eval, target, a.power_budget_w) : solve_p2(eval, target, a.power_budget_w);
    const double slack =
        a.problem == "p1" ? r.constraint_values.at("capacity_slack") : r.constraint_values.at("success_slack");
    json j = {{"target", target},
              {"omega_star", r.omega_star},
              {"p_s_star_w", r.p_s_star},
              {"p_s_star_dbm", to_dbm(r.p_s_star)},
              {"objective", r.objective},
              {"feasible", r.feasible},
              {"constraint_slack", slack},
              {"constraint_values", r.constraint_values},
              {"evaluations", r.evaluations}};
    results.push_back(j);
    all_feasible = all_feasible && r.feasible;
    // The evaluator is shared across targets; the trace lists each point once.
    for (; seen < r.trace.size(); ++seen) {
      const auto& d = r.trace[seen];
      trace += num(target) + "," + num(d.omega) + "," + num(d.source_power) + "," + num(d.capacity) + "," +
               num(d.success) + "," + num(d.efficiency) + "," + hash + "\n";
    }
    std::printf("%s target %g: feasible %d  omega* %.4f  P_S* %.4g W (%.2f dBm)  objective %.6g\n", a.problem.c_str(),
                target, r.feasible ? 1 : 0, r.omega_star, r.p_s_star, to_dbm(r.p_s_star), r.objective);
  }
  json out = {{"problem", a.problem},
              {"protocol", to_string(protocol)},
              {"power_budget_w", a.power_budget_w},
              {"objective_unit", a.problem == "p1" ? "W" : "bit/J"},
              {"results", results},
              {"manifest_hash", hash}};
  run.write("result.json", out.dump(2) + "\n");
  run.write("trace.csv", trace);
  run.finish();
  return (!all_feasible && c.strict) ? kExitInfeasible : kExitOk;
}

int cmd_validate(const Common& c, double sigmas, std::uint64_t steady_slots) {
  const SystemConfig cfg = parse_config(base_document(c));
  const auto protos = protocols(c, kAllProtocols);
  SimulationPlan plan;
  plan.cfg = cfg;
  plan.slots = c.slots;
  plan.seed = c.seed;
  plan.threads = c.threads;
  plan.etcp_steady_slots = steady_slots;
  Run run("validate", c, cfg);
  run.option("slots", std::to_string(c.slots));
  run.option("sigmas", num(sigmas));
  run.option("etcp_steady_slots", std::to_string(steady_slots));
  run.output("validate.csv");
  run.output("validate.json");
  const std::string hash = run.hash();

  AnalyticEngine e(cfg);
  const auto reps = estimate_all(plan);
  std::string csv = "protocol,metric,analytic,monte_carlo,standard_error,z,pass,manifest\n";
  json rows = json::array();
  bool ok = true;
  std::printf("%-5s %-9s %14s %14s %12s %8s\n", "proto", "metric", "analytic", "monte_carlo", "se", "z");
  for (Protocol p : protos) {
    const auto& r = reps.at(p);
    const std::pair<const char*, std::pair<double, Estimate>> metrics[] = {
        {"success", {e.success(p).value, r.success_probability}},
        {"capacity", {e.capacity(p).value, r.ergodic_capacity}}};
    for (const auto& [name, vals] : metrics) {
      const auto& [analytic, mc] = vals;
      const double z = mc.standard_error > 0.0 ? (mc.value - analytic) / mc.standard_error
                                               : (mc.value == analytic ? 0.0 : INFINITY);
      const bool pass = std::abs(z) <= sigmas;
      ok = ok && pass;
      csv += std::string(to_string(p)) + "," + name + "," + num(analytic) + "," + num(mc.value) + "," +
             num(mc.standard_error) + "," + num(z) + "," + (pass ? "1" : "0") + "," + hash + "\n";
      rows.push_back({{"protocol", to_string(p)},
                      {"metric", name},
                      {"analytic", analytic},
                      {"monte_carlo", mc.value},
                      {"standard_error", mc.standard_error},
                      {"z", z},
                      {"pass", pass}});
      std::printf("%-5s %-9s %14.6f %14.6f %12.6f %8.2f %s\n", to_string(p), name, analytic, mc.value,
                  mc.standard_error, z, pass ? "pass" : "FAIL");
    }
  }
  run.write("validate.csv", csv);
  run.write("validate.json", json{{"rows", rows}, {"pass", ok}, {"manifest_hash", hash}}.dump(2) + "\n");
  run.finish();
  return ok ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid backscatter / wireless-powered relay toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(library_version()));
  Common c;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", c.config_path, "JSON configuration with unit-suffixed keys (default: built-in profile)")
        ->check(CLI::ExistingFile);
    sub->add_option("--protocol", c.protocol, "esap, etcp, abr, wpr or urms (default depends on the command)")
        ->check(CLI::IsMember({"esap", "etcp", "abr", "wpr", "urms"}, CLI::ignore_case));
    sub->add_option("--slots", c.slots, "Monte Carlo slots")->check(CLI::PositiveNumber);
    sub->add_option("--seed", c.seed, "master seed");
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--strict", c.strict, "exit 3 when an optimization is infeasible");
  };

  auto* analyze = app.add_subcommand("analyze", "analytic metrics for every protocol");
  add_common(analyze);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate for one protocol");
  add_common(simulate);
  bool slot_log = false;
  std::uint64_t steady = 100;
  simulate->add_flag("--slot-log", slot_log, "write a per-slot CSV log");
  simulate->add_option("--etcp-steady-slots", steady, "committed slots per ETCP session");

  auto* sweep = app.add_subcommand("sweep", "metrics over a grid of configuration values");
  add_common(sweep);
  std::string engine = "analytic";
  sweep->add_option("--sweep", c.sweep, "FIELD=START:STOP:POINTS[,...]; repeat for a product grid")->required();
  sweep->add_option("--engine", engine, "analytic or simulate");

  auto* optimize = app.add_subcommand("optimize", "least source power (p1) or best energy efficiency (p2)");
  add_common(optimize);
  OptimizeArgs oa;
  optimize->add_option("--problem", oa.problem, "p1 or p2");
  optimize->add_option("--target", oa.targets, "capacity target in bit/s (p1) or success target (p2); repeatable")
      ->required();
  optimize->add_option("--power-budget-w", oa.power_budget_w, "source and relay power budget in W");
  optimize->add_flag("--use-simulator", oa.use_simulator, "evaluate designs with the seeded simulator");

  auto* validate_cmd = app.add_subcommand("validate", "analytic versus Monte Carlo agreement table");
  add_common(validate_cmd);
  double sigmas = 3.0;
  std::uint64_t vsteady = 100;
  validate_cmd->add_option("--sigmas", sigmas, "pass band in standard errors");
  validate_cmd->add_option("--etcp-steady-slots", vsteady, "committed slots per ETCP session");

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) return cmd_analyze(c);
    if (simulate->parsed()) return cmd_simulate(c, slot_log, steady);
    if (sweep->parsed()) return cmd_sweep(c, engine);
    if (optimize->parsed()) return cmd_optimize(c, oa);
    if (validate_cmd->parsed()) return cmd_validate(c, sigmas, vsteady);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error:\n");
    for (const auto& p : e.problems()) std::fprintf(stderr, "  - %s\n", p.c_str());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
