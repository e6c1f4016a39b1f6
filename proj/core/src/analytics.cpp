#include "hrelay/analytics.hpp"

#include <algorithm>
#include <boost/math/special_functions/binomial.hpp>
#include <cctype>
#include <cmath>
#include <numbers>

#include "hrelay/errors.hpp"
#include "hrelay/quadrature.hpp"

namespace hrelay {

const char* to_string(Protocol p) {
  switch (p) {
    case Protocol::ESAP: return "esap";
    case Protocol::ETCP: return "etcp";
    case Protocol::PureABR: return "abr";
    case Protocol::PureWPR: return "wpr";
    case Protocol::URMS: return "urms";
  }
  return "?";
}

Protocol parse_protocol(const std::string& name) {
  std::string s;
  for (char ch : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  if (s == "esap") return Protocol::ESAP;
  if (s == "etcp") return Protocol::ETCP;
  if (s == "abr" || s == "pureabr") return Protocol::PureABR;
  if (s == "wpr" || s == "purewpr") return Protocol::PureWPR;
  if (s == "urms") return Protocol::URMS;
  throw DomainError("unknown protocol '" + name + "' (expected esap, etcp, abr, wpr or urms)");
}

AnalyticEngine::AnalyticEngine(const SystemConfig& cfg, AnalyticOptions opt)
    : cfg_(cfg), opt_(opt), rates_(energy_rates(cfg)) {
  require_valid(cfg_);
  q_ = cached_q_distribution(cfg_, opt_.q);
  surface_ = cached_interference_surface(cfg_, opt_.interpolate);
  build_mid_rule();
}

double AnalyticEngine::chi(double v, double p) const {
  if (!(p > 0.0)) return 0.0;
  const double l = ell(cfg_, v, p);
  const double a = kappa(cfg_, v) * cfg_.interferer_power;
  return std::exp(-l * cfg_.noise_active + surface_->log_joint(a, l * cfg_.interferer_power));
}

double AnalyticEngine::relay_det(double v) const {
  return std::exp(surface_->log_relay(kappa(cfg_, v) * cfg_.interferer_power));
}

double AnalyticEngine::band(const std::function<double(double)>& g, double a, double b) const {
  const auto& d = *q_;
  if (!(b > a)) return 0.0;
  if (std::isinf(b)) return partial_expectation(d, g, a, b, opt_.rel_tol);
  // Finite pieces outside the grid carry at most the tabulated tail masses.
  double total = 0.0;
  if (a < d.q_lo()) {
    const double top = std::min(b, d.q_lo());
    total += g(top) * (d.cdf_at(top) - d.cdf_at(a));
    a = top;
    if (!(b > a)) return total;
  }
  if (b > d.q_hi()) {
    const double bottom = std::max(a, d.q_hi());
    total += g(bottom) * (d.cdf_at(b) - d.cdf_at(bottom));
    b = bottom;
    if (!(b > a)) return total;
  }
  return total + partial_expectation(d, g, a, b, opt_.rel_tol);
}

void AnalyticEngine::build_mid_rule() {
  const auto& d = *q_;
  const double ob = cfg_.harvest_fraction * cfg_.conversion_efficiency;
  const double width = rates_.varrho_c;
  // Below q_lo the density vanishes; far below the cap the relay power is
  // too small for the destination hop to succeed.
  const double floor = std::max(d.q_lo() - rates_.varrho_w, 1e-9 * width);
  if (!(floor < width)) return;
  const double y0 = std::log(floor), y1 = std::log(width);
  const double panel = std::log(10.0) / 6.0;
  std::vector<double> edges{y0};
  for (double y = y0 + panel; y < y1 - 1e-9; y += panel) edges.push_back(y);
  edges.push_back(y1);
  for (const auto& n : composite_gauss_legendre(edges)) {
    const double e = std::exp(n.x);
    const double q = rates_.varrho_w + e;
    const double w = n.w * e * d.pdf_at(q);
    if (w < 1e-18) continue;
    mid_rule_.push_back({ob * q - rates_.rho_w, q, w});
  }
}

double AnalyticEngine::mid_integral(double v, const std::function<double(double)>& weight) const {
  double s = 0.0;
  for (const auto& n : mid_rule_) {
    if (!(n.p > 0.0)) continue;
    s += n.w * weight(n.q) * chi(v, n.p);
  }
  return s;
}

const AnalyticEngine::Terms& AnalyticEngine::terms() const {
  if (terms_) return *terms_;
  const double tau = cfg_.sinr_threshold_active;
  const double cap = rates_.varrho_w + rates_.varrho_c;
  auto del = [&](double q) { return delta(cfg_, q); };
  auto nodel = [&](double q) { return 1.0 - delta(cfg_, q); };
  auto one = [](double) { return 1.0; };
  Terms t{};
  t.prefactor = std::exp(-kappa(cfg_, tau) * cfg_.noise_active);
  t.relay_det = relay_det(tau);
  t.chi_cap = chi(tau, rates_.rho_c);
  t.surv_cap = 1.0 - q_->cdf_at(cap);
  t.delta_cap = band(del, cap, kInfinity);
  t.nodelta_cap = band(nodel, cap, kInfinity);
  t.delta_abr = band(del, rates_.varrho_a, kInfinity);
  t.mid_one = mid_integral(tau, one);
  t.mid_delta = mid_integral(tau, del);
  t.mid_nodelta = mid_integral(tau, nodel);
  terms_ = t;
  return *terms_;
}

namespace {

void add_numerics(AnalyticResult& r, const QDistribution& q, const InterferenceSurface& s) {
  r.numerics["q_grid_points"] = static_cast<double>(q.q.size());
  r.numerics["q_lo"] = q.q_lo();
  r.numerics["q_hi"] = q.q_hi();
  r.numerics["q_mass_below_grid"] = q.cdf.front();
  r.numerics["q_mass_above_grid"] = 1.0 - q.cdf.back();
  r.numerics["euler_terms"] = q.euler_terms;
  r.numerics["joint_lattice_nodes"] = static_cast<double>(s.joint_nodes_evaluated());
}

}  // namespace

AnalyticResult AnalyticEngine::success_esap() const {
  const auto& t = terms();
  AnalyticResult r;
  r.value = t.prefactor * (t.chi_cap * (t.surv_cap - t.delta_cap) + t.mid_nodelta + t.relay_det * t.delta_abr);
  const double sw = t.prefactor * (t.chi_cap * t.surv_cap + t.mid_one);
  const double sa = t.prefactor * (t.relay_det * t.delta_abr - t.chi_cap * t.delta_cap - t.mid_delta);
  r.breakdown["S_W"] = sw;
  r.breakdown["S_A"] = sa;
  r.breakdown["capped_term"] = t.prefactor * t.chi_cap * (t.surv_cap - t.delta_cap);
  r.breakdown["middle_band_term"] = t.prefactor * t.mid_nodelta;
  r.breakdown["abr_fallback_term"] = t.prefactor * t.relay_det * t.delta_abr;
  add_numerics(r, *q_, *surface_);
  r.numerics["breakdown_gap"] = std::abs(sw + sa - r.value);
  return r;
}

double AnalyticEngine::success_esap_expansion() const {
  const auto& t = terms();
  const double second = t.prefactor * (t.chi_cap * t.nodelta_cap + t.mid_nodelta);
  return success_abr().value + second;
}

AnalyticResult AnalyticEngine::success_abr() const {
  const auto& t = terms();
  AnalyticResult r;
  r.value = t.prefactor * t.relay_det * t.delta_abr;
  r.breakdown["source_relay_noise"] = t.prefactor;
  r.breakdown["relay_determinant"] = t.relay_det;
  r.breakdown["backscatter_energy_term"] = t.delta_abr;
  add_numerics(r, *q_, *surface_);
  return r;
}

AnalyticResult AnalyticEngine::success_wpr() const {
  const auto& t = terms();
  AnalyticResult r;
  const double capped = t.prefactor * t.chi_cap * t.surv_cap;
  const double middle = t.prefactor * t.mid_one;
  r.value = capped + middle;
  r.breakdown["capped_term"] = capped;
  r.breakdown["middle_band_term"] = middle;
  add_numerics(r, *q_, *surface_);
  return r;
}

CommitProbabilities etcp_commit_probabilities(double s_wpr, double s_abr, int n) {
  if (n < 1) throw DomainError("exploration length must be positive");
  if (!(s_wpr >= 0.0 && s_wpr <= 1.0 && s_abr >= 0.0 && s_abr <= 1.0))
    throw DomainError("success probabilities must lie in [0, 1]");
  auto pmf = [n](double x, int i) {
    return boost::math::binomial_coefficient<double>(n, i) * std::pow(x, i) * std::pow(1.0 - x, n - i);
  };
  CommitProbabilities c;
  for (int i = 1; i <= n; ++i) {
    double below_w = 0.0, below_a = 0.0;
    for (int j = 0; j < i; ++j) {
      below_w += pmf(s_wpr, j);
      below_a += pmf(s_abr, j);
    }
    c.wpr_wins += pmf(s_wpr, i) * below_a;
    c.abr_wins += pmf(s_abr, i) * below_w;
  }
  c.tie = 1.0 - c.wpr_wins - c.abr_wins;
  return c;
}

double etcp_combine(const CommitProbabilities& c, double wpr_value, double abr_value) {
  return 0.5 * (wpr_value + abr_value) + 0.5 * (c.wpr_wins - c.abr_wins) * (wpr_value - abr_value);
}

AnalyticResult AnalyticEngine::success_etcp() const {
  const double sw = success_wpr().value, sa = success_abr().value;
  const auto c = etcp_commit_probabilities(sw, sa, cfg_.etcp_exploration);
  AnalyticResult r;
  r.value = etcp_combine(c, sw, sa);
  r.breakdown["S_WPR"] = sw;
  r.breakdown["S_ABR"] = sa;
  r.breakdown["commit_wpr"] = c.wpr_wins;
  r.breakdown["commit_abr"] = c.abr_wins;
  r.breakdown["commit_tie"] = c.tie;
  add_numerics(r, *q_, *surface_);
  return r;
}

AnalyticResult AnalyticEngine::success_urms() const {
  const double sw = success_wpr().value, sa = success_abr().value;
  AnalyticResult r;
  r.value = 0.5 * (sw + sa);
  r.breakdown["S_WPR"] = sw;
  r.breakdown["S_ABR"] = sa;
  add_numerics(r, *q_, *surface_);
  return r;
}

AnalyticResult AnalyticEngine::success(Protocol p) const {
  switch (p) {
    case Protocol::ESAP: return success_esap();
    case Protocol::ETCP: return success_etcp();
    case Protocol::PureABR: return success_abr();
    case Protocol::PureWPR: return success_wpr();
    case Protocol::URMS: return success_urms();
  }
  return {};
}

AnalyticEngine::Gains AnalyticEngine::gains() const {
  const auto& t = terms();
  Gains g;
  g.over_abr = t.prefactor * (t.chi_cap * (t.surv_cap - t.delta_cap) + t.mid_nodelta);
  g.over_wpr = t.prefactor * (t.relay_det * t.delta_abr - t.chi_cap * t.delta_cap - t.mid_delta);
  const double s = success_esap().value;
  g.over_abr_difference = s - success_abr().value;
  g.over_wpr_difference = s - success_wpr().value;
  return g;
}

double AnalyticEngine::wpr_success_above(double v) const {
  const double cap = rates_.varrho_w + rates_.varrho_c;
  const double pre = std::exp(-kappa(cfg_, v) * cfg_.noise_active);
  const double capped = chi(v, rates_.rho_c) * (1.0 - q_->cdf_at(cap));
  if (pre == 0.0) return 0.0;
  return pre * (capped + mid_integral(v, [](double) { return 1.0; }));
}

// W log2(1 + tau) S(tau) + (W / ln 2) int_tau^inf S(v) / (1 + v) dv, with
// S(v) the probability that the weaker WPR hop clears v.
double AnalyticEngine::wpr_capacity_core() const {
  if (wpr_capacity_) return *wpr_capacity_;
  const double tau = cfg_.sinr_threshold_active;
  const double w = cfg_.bandwidth_active;
  const double head = w * std::log2(1.0 + tau) * success_wpr().value;
  auto h = [&](double t) {
    const double v = std::exp(t);
    return wpr_success_above(v) * v / (1.0 + v);
  };
  double integral = 0.0, err_total = 0.0;
  double t0 = std::log(tau);
  const double step = std::log(10.0);
  for (int k = 0; k < 40; ++k) {
    double err = 0.0;
    const double piece = integrate_adaptive(h, t0, t0 + step, opt_.capacity_rel_tol, &err, 10);
    integral += piece;
    err_total += err;
    t0 += step;
    const double scale = head / (w / std::numbers::ln2) + integral;
    if (piece <= 1e-9 * scale && h(t0) <= 1e-12 * scale) break;
    if (scale == 0.0 && k >= 2) break;
  }
  wpr_capacity_ = head + w / std::numbers::ln2 * integral;
  wpr_capacity_error_ = w / std::numbers::ln2 * err_total;
  return *wpr_capacity_;
}

AnalyticResult AnalyticEngine::capacity_wpr() const {
  const double hop = 0.5 * (1.0 - cfg_.harvest_fraction);
  AnalyticResult r;
  r.value = hop * wpr_capacity_core();
  r.breakdown["threshold_term"] =
      hop * cfg_.bandwidth_active * std::log2(1.0 + cfg_.sinr_threshold_active) * success_wpr().value;
  r.breakdown["excess_rate_term"] = r.value - r.breakdown["threshold_term"];
  add_numerics(r, *q_, *surface_);
  r.numerics["outer_integral_error"] = hop * wpr_capacity_error_.value_or(0.0);
  return r;
}

AnalyticResult AnalyticEngine::capacity_abr() const {
  const double hop = 0.5 * (1.0 - cfg_.harvest_fraction);
  AnalyticResult r;
  r.value = hop * cfg_.backscatter_capacity * success_abr().value;
  add_numerics(r, *q_, *surface_);
  return r;
}

AnalyticResult AnalyticEngine::capacity_esap() const {
  const double hop = 0.5 * (1.0 - cfg_.harvest_fraction);
  AnalyticResult r;
  const double wpr_part = hop * wpr_capacity_core();
  const double abr_part = hop * cfg_.backscatter_capacity * success_esap().breakdown.at("S_A");
  r.value = wpr_part + abr_part;
  r.breakdown["wpr_term"] = wpr_part;
  r.breakdown["abr_term"] = abr_part;
  add_numerics(r, *q_, *surface_);
  r.numerics["outer_integral_error"] = hop * wpr_capacity_error_.value_or(0.0);
  return r;
}

AnalyticResult AnalyticEngine::capacity_etcp() const {
  const double sw = success_wpr().value, sa = success_abr().value;
  const auto c = etcp_commit_probabilities(sw, sa, cfg_.etcp_exploration);
  const double cw = capacity_wpr().value, ca = capacity_abr().value;
  AnalyticResult r;
  r.value = etcp_combine(c, cw, ca);
  r.breakdown["C_WPR"] = cw;
  r.breakdown["C_ABR"] = ca;
  r.breakdown["commit_wpr"] = c.wpr_wins;
  r.breakdown["commit_abr"] = c.abr_wins;
  add_numerics(r, *q_, *surface_);
  return r;
}

AnalyticResult AnalyticEngine::capacity_urms() const {
  const double cw = capacity_wpr().value, ca = capacity_abr().value;
  AnalyticResult r;
  r.value = 0.5 * (cw + ca);
  r.breakdown["C_WPR"] = cw;
  r.breakdown["C_ABR"] = ca;
  add_numerics(r, *q_, *surface_);
  return r;
}

AnalyticResult AnalyticEngine::capacity(Protocol p) const {
  switch (p) {
    case Protocol::ESAP: return capacity_esap();
    case Protocol::ETCP: return capacity_etcp();
    case Protocol::PureABR: return capacity_abr();
    case Protocol::PureWPR: return capacity_wpr();
    case Protocol::URMS: return capacity_urms();
  }
  return {};
}

double AnalyticEngine::energy_efficiency(Protocol p) const { return capacity(p).value / cfg_.source_power; }

double chi_joint(double v, double p, const SystemConfig& cfg) {
  if (!(v > 0.0) || !(p > 0.0)) throw DomainError("chi_joint needs v > 0 and p > 0");
  const auto s = cached_interference_surface(cfg, false);
  const double l = ell(cfg, v, p);
  return std::exp(-l * cfg.noise_active +
                  s->log_joint(kappa(cfg, v) * cfg.interferer_power, l * cfg.interferer_power));
}

AnalyticResult success_esap(const SystemConfig& cfg) { return AnalyticEngine(cfg).success_esap(); }
AnalyticResult success_abr(const SystemConfig& cfg) { return AnalyticEngine(cfg).success_abr(); }
AnalyticResult success_wpr(const SystemConfig& cfg) { return AnalyticEngine(cfg).success_wpr(); }
AnalyticResult success_etcp(const SystemConfig& cfg) { return AnalyticEngine(cfg).success_etcp(); }
double success_urms(const SystemConfig& cfg) { return AnalyticEngine(cfg).success_urms().value; }
AnalyticEngine::Gains gains(const SystemConfig& cfg) { return AnalyticEngine(cfg).gains(); }
AnalyticResult capacity_esap(const SystemConfig& cfg) { return AnalyticEngine(cfg).capacity_esap(); }
AnalyticResult capacity_abr(const SystemConfig& cfg) { return AnalyticEngine(cfg).capacity_abr(); }
AnalyticResult capacity_wpr(const SystemConfig& cfg) { return AnalyticEngine(cfg).capacity_wpr(); }
AnalyticResult capacity_etcp(const SystemConfig& cfg) { return AnalyticEngine(cfg).capacity_etcp(); }
double energy_efficiency(const SystemConfig& cfg, Protocol p) { return AnalyticEngine(cfg).energy_efficiency(p); }

ClosedFormAbr success_abr_ppp_closed(const SystemConfig& c) {
  if (!c.emitter_repulsion.is_ppp() || !c.interferer_repulsion.is_ppp())
    throw DomainError("closed form requires Poisson emitters and interferers");
  if (c.pathloss_active != 4.0 || c.pathloss_ambient != 4.0)
    throw DomainError("closed form requires both path-loss exponents equal to 4");
  constexpr double pi = std::numbers::pi;
  const auto r = energy_rates(c);
  const double tau = c.sinr_threshold_active;
  const double backscatter = std::pow(c.d_rd, 4) * c.noise_ambient * c.snr_threshold_backscatter /
                             (c.reflection_fraction * c.backscatter_efficiency);
  const double levy = std::pow(pi, 4) * c.emitter_density * c.emitter_density * c.emitter_power / 16.0;
  ClosedFormAbr out;
  out.n_term = backscatter + levy;
  const double expo = -std::pow(c.d_sr, 4) * c.noise_active * tau / c.source_power -
                      0.5 * pi * pi * c.interferer_density * c.d_sr * c.d_sr *
                          std::sqrt(tau * c.interferer_power / c.source_power);
  out.value = 0.25 * pi * pi * c.emitter_density * std::sqrt(c.emitter_power / out.n_term) * std::exp(expo) *
              std::erf(std::sqrt(out.n_term / r.varrho_a));
  return out;
}

}  // namespace hrelay
