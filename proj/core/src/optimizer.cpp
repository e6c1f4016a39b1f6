#include "hrelay/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "hrelay/errors.hpp"
#include "hrelay/simulator.hpp"

namespace hrelay {

double omega_upper_bound(const SystemConfig& cfg, double p_max) {
  const auto r = energy_rates(cfg);
  return std::min(1.0 - 2.0 * r.rho_c / p_max, 1.0 - 1e-6);
}

DesignEvaluator::DesignEvaluator(SystemConfig tmpl, Protocol protocol, OptimizerOptions opt)
    : tmpl_(tmpl), protocol_(protocol), opt_(opt) {}

DesignPoint DesignEvaluator::operator()(double omega, double ps) {
  const auto key = std::make_pair(omega, ps);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  SystemConfig c = tmpl_;
  c.harvest_fraction = omega;
  c.source_power = ps;
  DesignPoint d{omega, ps, 0.0, 0.0, 0.0};
  if (opt_.use_simulator) {
    SimulationPlan plan;
    plan.cfg = c;
    plan.protocol = protocol_;
    plan.slots = opt_.simulator_slots;
    plan.seed = opt_.simulator_seed;
    plan.threads = opt_.simulator_threads;
    const auto rep = estimate(plan);
    d.capacity = rep.ergodic_capacity.value;
    d.success = rep.success_probability.value;
  } else {
    AnalyticEngine e(c);
    d.capacity = e.capacity(protocol_).value;
    d.success = e.success(protocol_).value;
  }
  d.efficiency = d.capacity / ps;
  cache_.emplace(key, d);
  history_.push_back(d);
  return d;
}

namespace {

constexpr double kGolden = 0.6180339887498949;

struct BestSplit {
  double omega;
  double capacity;
};

// Maximizes capacity over omega at fixed power: coarse scan, then golden
// section on the bracket around the best scan point.
BestSplit best_split(DesignEvaluator& eval, double ps, double omega_max) {
  const int n = std::max(4, eval.options().seed_grid);
  int best = 0;
  double best_c = -1.0;
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    w[i] = omega_max * (i + 1) / n;
    const double c = eval(w[i], ps).capacity;
    if (c > best_c) {
      best_c = c;
      best = i;
    }
  }
  double lo = best > 0 ? w[best - 1] : omega_max * 1e-3;
  double hi = best + 1 < n ? w[best + 1] : omega_max;
  double x1 = hi - kGolden * (hi - lo), x2 = lo + kGolden * (hi - lo);
  double f1 = eval(x1, ps).capacity, f2 = eval(x2, ps).capacity;
  while (hi - lo > eval.options().omega_tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kGolden * (hi - lo);
      f2 = eval(x2, ps).capacity;
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kGolden * (hi - lo);
      f1 = eval(x1, ps).capacity;
    }
  }
  BestSplit out{w[best], best_c};
  if (f1 > out.capacity) out = {x1, f1};
  if (f2 > out.capacity) out = {x2, f2};
  return out;
}

void finish(OptimizationResult& r, const DesignEvaluator& eval) {
  r.trace = eval.history();
  r.evaluations = eval.evaluations();
}

}  // namespace

OptimizationResult solve_p1(DesignEvaluator& eval, double c_target, double p_max) {
  if (!(p_max > 0.0)) throw DomainError("the power budget must be positive");
  if (c_target < 0.0) throw DomainError("the capacity target must be nonnegative");
  OptimizationResult r;
  const double omega_max = omega_upper_bound(eval.config(), p_max);
  r.constraint_values["omega_max"] = omega_max;
  r.constraint_values["capacity_target"] = c_target;
  if (!(omega_max > 0.0)) {
    r.feasible = false;
    finish(r, eval);
    return r;
  }
  const auto& opt = eval.options();
  const double x_lo = std::log10(p_max) - opt.power_decades, x_hi = std::log10(p_max);
  // Monotonicity pre-scan over the power range guards the bisection.
  const int n = std::max(3, opt.seed_grid);
  std::vector<double> xs(n), caps(n), omegas(n);
  bool monotone = true;
  for (int k = 0; k < n; ++k) {
    xs[k] = x_lo + (x_hi - x_lo) * k / (n - 1);
    const auto b = best_split(eval, std::pow(10.0, xs[k]), omega_max);
    caps[k] = b.capacity;
    omegas[k] = b.omega;
    if (k > 0 && caps[k] < caps[k - 1] * (1.0 - 1e-6)) monotone = false;
  }
  r.constraint_values["monotone_prescan"] = monotone ? 1.0 : 0.0;
  auto set = [&](double x, double omega, double cap, bool feasible) {
    r.p_s_star = std::pow(10.0, x);
    r.omega_star = omega;
    r.objective = r.p_s_star;
    r.feasible = feasible;
    r.constraint_values["capacity"] = cap;
    r.constraint_values["capacity_slack"] = cap - c_target;
    r.constraint_values["relay_power_ceiling"] = 2.0 * energy_rates(eval.config()).rho_c / (1.0 - omega);
  };
  if (caps.back() < c_target) {
    set(x_hi, omegas.back(), caps.back(), false);
    finish(r, eval);
    return r;
  }
  if (caps.front() >= c_target) {
    set(x_lo, omegas.front(), caps.front(), true);
    finish(r, eval);
    return r;
  }
  int k = 1;
  while (caps[k] < c_target) ++k;
  double lo = xs[k - 1], hi = xs[k];
  double hi_omega = omegas[k], hi_cap = caps[k];
  while (hi - lo > opt.log_power_tol) {
    const double mid = 0.5 * (lo + hi);
    const auto b = best_split(eval, std::pow(10.0, mid), omega_max);
    if (b.capacity >= c_target) {
      hi = mid;
      hi_omega = b.omega;
      hi_cap = b.capacity;
    } else {
      lo = mid;
    }
  }
  set(hi, hi_omega, hi_cap, true);
  finish(r, eval);
  return r;
}

OptimizationResult solve_p1(const SystemConfig& tmpl, double c_target, double p_max, Protocol protocol,
                            const OptimizerOptions& opt) {
  DesignEvaluator eval(tmpl, protocol, opt);
  return solve_p1(eval, c_target, p_max);
}

namespace {

struct SplitChoice {
  double x = 0.0;  // log10 source power
  DesignPoint d;
  bool feasible = false;
};

// Best efficiency over the power axis at a fixed split: the least feasible
// power is located by bisection from a coarse scan, then the efficiency is
// refined by golden section over the feasible part of the best bracket.
SplitChoice best_power(DesignEvaluator& eval, double w, double s_target, double x_lo, double x_hi) {
  const auto& opt = eval.options();
  const int n = std::max(3, opt.seed_grid);
  auto point = [&](double x) { return eval(w, std::pow(10.0, x)); };
  auto ok = [&](const DesignPoint& d) { return d.success >= s_target; };
  std::vector<double> xs(n);
  std::vector<DesignPoint> ds(n);
  int first = -1;
  for (int k = 0; k < n; ++k) {
    xs[k] = x_lo + (x_hi - x_lo) * k / (n - 1);
    ds[k] = point(xs[k]);
    if (first < 0 && ok(ds[k])) first = k;
  }
  SplitChoice out;
  auto consider = [&](double x, const DesignPoint& d) {
    if (!ok(d)) return;
    if (!out.feasible || d.efficiency > out.d.efficiency) out = {x, d, true};
  };
  for (int k = 0; k < n; ++k) consider(xs[k], ds[k]);
  if (first < 0) {
    out.d = ds.back();
    out.x = xs.back();
    return out;
  }
  double edge = xs[first];
  if (first > 0) {
    double lo = xs[first - 1], hi = xs[first];
    while (hi - lo > opt.log_power_tol) {
      const double mid = 0.5 * (lo + hi);
      const auto d = point(mid);
      if (ok(d)) {
        hi = mid;
        consider(mid, d);
      } else {
        lo = mid;
      }
    }
    edge = hi;
  }
  // Bracket around the best point found so far, clipped to the feasible edge.
  const double step = (x_hi - x_lo) / (n - 1);
  double lo = std::max(edge, out.x - step), hi = std::min(x_hi, out.x + step);
  auto eff = [&](double x) {
    const auto d = point(x);
    consider(x, d);
    return ok(d) ? d.efficiency : -1.0;
  };
  double x1 = hi - kGolden * (hi - lo), x2 = lo + kGolden * (hi - lo);
  double f1 = eff(x1), f2 = eff(x2);
  while (hi - lo > opt.log_power_tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kGolden * (hi - lo);
      f2 = eff(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kGolden * (hi - lo);
      f1 = eff(x1);
    }
  }
  return out;
}

}  // namespace

OptimizationResult solve_p2(DesignEvaluator& eval, double s_target, double p_max) {
  if (!(p_max > 0.0)) throw DomainError("the power budget must be positive");
  if (!(s_target >= 0.0 && s_target < 1.0)) throw DomainError("the success target must lie in [0, 1)");
  OptimizationResult r;
  const double omega_max = omega_upper_bound(eval.config(), p_max);
  r.constraint_values["omega_max"] = omega_max;
  r.constraint_values["success_target"] = s_target;
  if (!(omega_max > 0.0)) {
    finish(r, eval);
    return r;
  }
  const auto& opt = eval.options();
  const double x_lo = std::log10(p_max) - opt.power_decades, x_hi = std::log10(p_max);
  const int n = std::max(3, opt.seed_grid);

  struct Best {
    double w = 0.0;
    SplitChoice c;
  };
  Best best, most_reliable;
  auto consider = [&](double w, const SplitChoice& c) {
    if (c.feasible && (!best.c.feasible || c.d.efficiency > best.c.d.efficiency)) best = {w, c};
    if (c.d.success > most_reliable.c.d.success) most_reliable = {w, c};
  };
  most_reliable.c.d.success = -1.0;
  std::vector<double> ws(n);
  std::vector<double> score(n);
  for (int i = 0; i < n; ++i) {
    ws[i] = omega_max * (i + 1) / n;
    const auto c = best_power(eval, ws[i], s_target, x_lo, x_hi);
    consider(ws[i], c);
    score[i] = c.feasible ? c.d.efficiency : -1.0;
  }
  if (best.c.feasible) {
    // Golden section over the split around the best scan point.
    const int k = static_cast<int>(std::max_element(score.begin(), score.end()) - score.begin());
    double lo = k > 0 ? ws[k - 1] : omega_max * 1e-3, hi = k + 1 < n ? ws[k + 1] : omega_max;
    auto f = [&](double w) {
      const auto c = best_power(eval, w, s_target, x_lo, x_hi);
      consider(w, c);
      return c.feasible ? c.d.efficiency : -1.0;
    };
    double x1 = hi - kGolden * (hi - lo), x2 = lo + kGolden * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > opt.omega_tol) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + kGolden * (hi - lo);
        f2 = f(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - kGolden * (hi - lo);
        f1 = f(x1);
      }
    }
  }
  const Best& pick = best.c.feasible ? best : most_reliable;
  r.feasible = best.c.feasible;
  r.omega_star = pick.w;
  r.p_s_star = std::pow(10.0, pick.c.x);
  r.objective = pick.c.d.efficiency;
  r.constraint_values["success"] = pick.c.d.success;
  r.constraint_values["success_slack"] = pick.c.d.success - s_target;
  r.constraint_values["capacity"] = pick.c.d.capacity;
  finish(r, eval);
  return r;
}

OptimizationResult solve_p2(const SystemConfig& tmpl, double s_target, double p_max, Protocol protocol,
                            const OptimizerOptions& opt) {
  DesignEvaluator eval(tmpl, protocol, opt);
  return solve_p2(eval, s_target, p_max);
}

DesignGrid design_grid(DesignEvaluator& eval, double p_max, int n_omega, int n_power) {
  if (n_omega < 2 || n_power < 2) throw DomainError("a design grid needs at least two points per axis");
  DesignGrid g;
  const double omega_max = omega_upper_bound(eval.config(), p_max);
  if (!(omega_max > 0.0)) throw DomainError("no time split satisfies the relay power ceiling");
  const double decades = eval.options().power_decades;
  const double x_hi = std::log10(p_max);
  g.omega_step = omega_max / n_omega;
  g.log_power_step = decades / (n_power - 1);
  for (int i = 0; i < n_omega; ++i) g.omegas.push_back(omega_max * (i + 1) / n_omega);
  for (int j = 0; j < n_power; ++j) g.powers.push_back(std::pow(10.0, x_hi - decades + g.log_power_step * j));
  for (double w : g.omegas)
    for (double p : g.powers) g.points.push_back(eval(w, p));
  return g;
}

}  // namespace hrelay
