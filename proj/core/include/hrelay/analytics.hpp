#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hrelay/model.hpp"
#include "hrelay/qdist.hpp"
#include "hrelay/surface.hpp"

namespace hrelay {

enum class Protocol { ESAP, ETCP, PureABR, PureWPR, URMS };
const char* to_string(Protocol p);
// Accepts esap, etcp, abr, wpr, urms (case-insensitive).
Protocol parse_protocol(const std::string& name);

struct AnalyticResult {
  double value = 0.0;
  std::map<std::string, double> breakdown;
  std::map<std::string, double> numerics;
};

struct AnalyticOptions {
  QDistributionOptions q;
  // Interpolate the interferer determinant on its lattice; false evaluates
  // every determinant directly.
  bool interpolate = true;
  double rel_tol = 1e-7;
  double capacity_rel_tol = 1e-5;
};

// Evaluates every analytic metric for one configuration. Intermediate terms
// are memoized, so asking for several metrics costs little more than one.
// Not thread safe; the shared caches it draws on are.
class AnalyticEngine {
 public:
  explicit AnalyticEngine(const SystemConfig& cfg, AnalyticOptions opt = {});

  const SystemConfig& config() const { return cfg_; }
  const QDistribution& q_distribution() const { return *q_; }

  // exp(-ell sigma^2) times the joint relay/destination determinant.
  double chi(double v, double p) const;
  // Determinant of the relay-only kernel at kappa(v).
  double relay_det(double v) const;

  AnalyticResult success_esap() const;
  AnalyticResult success_abr() const;
  AnalyticResult success_wpr() const;
  AnalyticResult success_etcp() const;
  AnalyticResult success_urms() const;
  AnalyticResult success(Protocol p) const;

  AnalyticResult capacity_esap() const;
  AnalyticResult capacity_abr() const;
  AnalyticResult capacity_wpr() const;
  AnalyticResult capacity_etcp() const;
  AnalyticResult capacity_urms() const;
  AnalyticResult capacity(Protocol p) const;

  double energy_efficiency(Protocol p) const;

  // S_ESAP assembled as S_ABR plus the second term of the two-event expansion.
  double success_esap_expansion() const;

  struct Gains {
    double over_abr = 0.0;         // direct assembly
    double over_wpr = 0.0;         // direct assembly
    double over_abr_difference = 0.0;
    double over_wpr_difference = 0.0;
  };
  Gains gains() const;

  // P[min(nu_R, nu_D^W) > v, E_R > E_W].
  double wpr_success_above(double v) const;

 private:
  struct Terms {
    double prefactor;   // exp(-kappa(tau_W) sigma^2)
    double relay_det;   // relay-only determinant at kappa(tau_W)
    double chi_cap;     // chi(tau_W, rho_C)
    double surv_cap;    // 1 - F(varrho_W + varrho_C)
    double delta_cap;   // int_{cap}^inf delta f
    double nodelta_cap; // int_{cap}^inf (1 - delta) f
    double delta_abr;   // int_{varrho_A}^inf delta f
    double mid_one;     // int_mid chi f
    double mid_delta;   // int_mid delta chi f
    double mid_nodelta; // int_mid (1 - delta) chi f
  };
  const Terms& terms() const;
  double band(const std::function<double(double)>& g, double a, double b) const;
  double mid_integral(double v, const std::function<double(double)>& weight) const;
  void build_mid_rule();
  double wpr_capacity_core() const;

  SystemConfig cfg_;
  AnalyticOptions opt_;
  EnergyRates rates_;
  std::shared_ptr<const QDistribution> q_;
  std::shared_ptr<const InterferenceSurface> surface_;
  // Fixed rule over the middle energy band in y = ln(q - varrho_W): relay
  // power, q and weight times density.
  struct MidNode {
    double p, q, w;
  };
  std::vector<MidNode> mid_rule_;
  mutable std::optional<Terms> terms_;
  mutable std::optional<double> wpr_capacity_;
  mutable std::optional<double> wpr_capacity_error_;
};

struct CommitProbabilities {
  double wpr_wins = 0.0;  // P[N_WPR > N_ABR]
  double abr_wins = 0.0;  // P[N_ABR > N_WPR]
  double tie = 0.0;
};
CommitProbabilities etcp_commit_probabilities(double s_wpr, double s_abr, int n);

// ETCP steady-state combination of two per-mode metrics.
double etcp_combine(const CommitProbabilities& c, double wpr_value, double abr_value);

double chi_joint(double v, double p, const SystemConfig& cfg);
AnalyticResult success_esap(const SystemConfig& cfg);
AnalyticResult success_abr(const SystemConfig& cfg);
AnalyticResult success_wpr(const SystemConfig& cfg);
AnalyticResult success_etcp(const SystemConfig& cfg);
double success_urms(const SystemConfig& cfg);
AnalyticEngine::Gains gains(const SystemConfig& cfg);
AnalyticResult capacity_esap(const SystemConfig& cfg);
AnalyticResult capacity_abr(const SystemConfig& cfg);
AnalyticResult capacity_wpr(const SystemConfig& cfg);
AnalyticResult capacity_etcp(const SystemConfig& cfg);
double energy_efficiency(const SystemConfig& cfg, Protocol p);

// Closed form of the pure-ABR success probability for Poisson emitters and
// interferers with both path-loss exponents equal to 4 on the infinite plane.
struct ClosedFormAbr {
  double value = 0.0;
  double n_term = 0.0;  // N
};
ClosedFormAbr success_abr_ppp_closed(const SystemConfig& cfg);

}  // namespace hrelay
