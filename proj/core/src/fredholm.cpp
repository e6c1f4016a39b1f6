#include "hrelay/fredholm.hpp"

#include <lapacke.h>

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "hrelay/errors.hpp"
#include "hrelay/quadrature.hpp"

namespace hrelay {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kModeMassFloor = 1e-17;
constexpr double kWeightFloor = 1e-19;
constexpr double kCoefFloor = 1e-15;

// Per-mode quadrature weights omega_i * gamma_n(u_i) on a shared node set,
// where gamma_n is the Gamma(n + 1) density.
struct ModeTable {
  std::vector<int> first;
  std::vector<int> len;
  std::vector<std::size_t> offset;
  std::vector<double> w;
  std::vector<double> tail;  // mass of mode n outside the window
};

ModeTable build_modes(const std::vector<double>& u, const std::vector<double>& du, double u_max) {
  ModeTable t;
  for (int n = 0;; ++n) {
    const double inside = boost::math::gamma_p(n + 1.0, u_max);
    if (inside < kModeMassFloor) break;
    const double sd = std::sqrt(n + 1.0);
    const double lo = std::max(0.0, n + 1.0 - 10.0 * sd - 10.0);
    const double hi = n + 1.0 + 10.0 * sd + 25.0;
    int i0 = static_cast<int>(std::lower_bound(u.begin(), u.end(), lo) - u.begin());
    int i1 = static_cast<int>(std::upper_bound(u.begin(), u.end(), hi) - u.begin());
    const double lg = std::lgamma(n + 1.0);
    std::vector<double> vals;
    vals.reserve(i1 - i0);
    for (int i = i0; i < i1; ++i) vals.push_back(du[i] * std::exp(n * std::log(u[i]) - u[i] - lg));
    int a = 0, b = static_cast<int>(vals.size());
    while (a < b && vals[a] < kWeightFloor) ++a;
    while (b > a && vals[b - 1] < kWeightFloor) --b;
    t.first.push_back(i0 + a);
    t.len.push_back(b - a);
    t.offset.push_back(t.w.size());
    t.w.insert(t.w.end(), vals.begin() + a, vals.begin() + b);
    t.tail.push_back(boost::math::gamma_q(n + 1.0, u_max));
  }
  return t;
}

void merge_edges(std::vector<double>& e, double lo, double hi) {
  std::sort(e.begin(), e.end());
  std::vector<double> out;
  for (double x : e) {
    if (x < lo || x > hi) continue;
    if (!out.empty() && x - out.back() < 1e-12 * std::max(1.0, hi)) continue;
    out.push_back(x);
  }
  if (out.empty() || out.front() > lo) out.insert(out.begin(), lo);
  if (out.back() < hi) out.push_back(hi);
  e = std::move(out);
}

int next_pow2(double x) {
  int n = 1;
  while (n < x) n <<= 1;
  return n;
}

}  // namespace

Modulation Modulation::pathloss(std::vector<PathlossFactor> f) {
  Modulation m;
  m.kind = Kind::Pathloss;
  m.factors = std::move(f);
  return m;
}

Modulation Modulation::disc(double radius) {
  Modulation m;
  m.kind = Kind::DiscIndicator;
  m.indicator_radius = radius;
  return m;
}

double Modulation::value(Point z) const {
  if (kind == Kind::DiscIndicator) return norm(z) < indicator_radius ? 1.0 : 0.0;
  double m = 0.0, keep = 1.0;
  for (const auto& f : factors) {
    const double a = f.coeff * std::pow(distance(z, f.center), -f.exponent);
    const double g = a / (1.0 + a);
    m += keep * g;
    keep *= 1.0 / (1.0 + a);
  }
  return m;
}

double Modulation::complement(Point z) const {
  if (kind == Kind::DiscIndicator) return norm(z) < indicator_radius ? 0.0 : 1.0;
  double keep = 1.0;
  for (const auto& f : factors) keep /= 1.0 + f.coeff * std::pow(distance(z, f.center), -f.exponent);
  return keep;
}

bool Modulation::radial() const {
  if (kind == Kind::DiscIndicator) return true;
  for (const auto& f : factors)
    if (f.center.x != 0.0 || f.center.y != 0.0) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Nystrom evaluator on a polar grid, assembled in the Ginibre mode basis.

struct NystromEvaluator::Impl {
  Geometry g;
  NystromOptions opt;
  bool ppp = false;
  double alpha = -1.0;
  std::vector<double> r, wr, area;  // area = 2 pi r wr
  std::vector<int> n_ang;
  std::vector<std::size_t> ang_off;  // offset of node i in the per-angle arrays
  std::vector<int> j_cap;
  std::vector<std::vector<double>> rho;  // per factor, per (node, angle)
  std::vector<double> tau;               // trapezoid weights per (node, angle)
  std::map<int, std::vector<double>> cos_table;
  ModeTable modes;
  std::vector<double> sqrt_w;
  bool radial = true;

  void build() {
    ppp = g.repulsion.is_ppp();
    alpha = g.repulsion.alpha;
    const double rc = 1.0 / std::sqrt(kPi * g.intensity);
    const double R = g.window_radius;
    const double h = opt.panel_scale * rc;
    for (const auto& c : g.centers) {
      if (c.y != 0.0) throw DomainError("modulation centers must lie on the x axis");
      if (c.x != 0.0) radial = false;
    }
    std::vector<double> edges;
    for (double x = 0.0; x < R; x += h) edges.push_back(x);
    for (int k = 1; k <= 14; ++k) edges.push_back(h * std::ldexp(1.0, -k));
    for (const auto& c : g.centers) {
      const double d = std::abs(c.x);
      if (d == 0.0) continue;
      edges.push_back(d);
      for (int k = 0; k <= 12; ++k) {
        edges.push_back(d - h * std::ldexp(1.0, -k));
        edges.push_back(d + h * std::ldexp(1.0, -k));
      }
    }
    if (g.indicator_radius > 0.0) edges.push_back(g.indicator_radius);
    merge_edges(edges, 0.0, R);
    for (const auto& qn : composite_gauss_legendre(edges)) {
      r.push_back(qn.x);
      wr.push_back(qn.w);
      area.push_back(2.0 * kPi * qn.x * qn.w);
    }
    const std::size_t nr = r.size();

    if (!ppp) {
      std::vector<double> u(nr), du(nr);
      for (std::size_t i = 0; i < nr; ++i) {
        u[i] = kPi * g.intensity * r[i] * r[i];
        du[i] = g.intensity * area[i];
      }
      modes = build_modes(u, du, kPi * g.intensity * R * R);
      sqrt_w.resize(modes.w.size());
      for (std::size_t k = 0; k < modes.w.size(); ++k) sqrt_w[k] = std::sqrt(modes.w[k]);
    }

    // Range of modes present at each node bounds the useful angular band.
    std::vector<int> nmin(nr, 1 << 30), nmax(nr, -1);
    for (std::size_t n = 0; n < modes.first.size(); ++n)
      for (int k = 0; k < modes.len[n]; ++k) {
        const int i = modes.first[n] + k;
        nmin[i] = std::min<int>(nmin[i], static_cast<int>(n));
        nmax[i] = std::max<int>(nmax[i], static_cast<int>(n));
      }

    n_ang.resize(nr);
    j_cap.resize(nr);
    ang_off.resize(nr + 1);
    std::size_t off = 0;
    for (std::size_t i = 0; i < nr; ++i) {
      int na = 1;
      if (!radial) {
        double need = opt.min_angles;
        for (const auto& c : g.centers) {
          const double d = std::abs(c.x);
          if (d == 0.0) continue;
          const double arg = (r[i] * r[i] + d * d) / (2.0 * r[i] * d);
          const double im = std::acosh(std::max(arg, 1.0 + 1e-300));
          need = std::max(need, 48.0 / std::max(im, 1e-12));
        }
        na = std::clamp(next_pow2(need), opt.min_angles, opt.max_angles);
      }
      n_ang[i] = na;
      ang_off[i] = off;
      off += na == 1 ? 1 : na / 2 + 1;
      int jc = na == 1 ? 0 : na / 2;
      if (!ppp) jc = std::min(jc, nmax[i] >= 0 ? nmax[i] - nmin[i] : 0);
      else jc = 0;
      j_cap[i] = std::min(jc, 256);
    }
    ang_off[nr] = off;

    tau.resize(off);
    rho.assign(g.centers.size(), std::vector<double>(off));
    for (std::size_t i = 0; i < nr; ++i) {
      const int na = n_ang[i];
      const int half = na == 1 ? 0 : na / 2;
      for (int k = 0; k <= half; ++k) {
        const double th = na == 1 ? 0.0 : 2.0 * kPi * k / na;
        const std::size_t idx = ang_off[i] + k;
        tau[idx] = na == 1 ? 1.0 : ((k == 0 || k == half) ? 1.0 / na : 2.0 / na);
        const Point z{r[i] * std::cos(th), r[i] * std::sin(th)};
        for (std::size_t f = 0; f < g.centers.size(); ++f)
          rho[f][idx] = std::pow(distance(z, g.centers[f]), -g.exponents[f]);
      }
      if (na > 1 && !cos_table.count(na)) {
        const int jm = std::min(na / 2, 256);
        std::vector<double> tab(static_cast<std::size_t>(jm + 1) * (half + 1));
        for (int j = 0; j <= jm; ++j)
          for (int k = 0; k <= half; ++k) tab[static_cast<std::size_t>(j) * (half + 1) + k] = std::cos(2.0 * kPi * j * k / na);
        cos_table[na] = std::move(tab);
      }
    }
  }

  double evaluate(std::span<const double> coeffs) const {
    const std::size_t nr = r.size();
    const std::size_t nf = g.centers.size();
    if (coeffs.size() != nf) throw DomainError("coefficient count does not match the modulation factors");
    for (double a : coeffs)
      if (!(a >= 0.0)) throw DomainError("modulation coefficients must be nonnegative");
    std::vector<double> c0m(nr), c0b(nr);
    std::vector<std::size_t> coff(nr + 1);
    std::vector<int> jeff(nr, 0);
    std::vector<double> coefs;
    std::vector<double> mb, mm;
    for (std::size_t i = 0; i < nr; ++i) {
      const int na = n_ang[i];
      const int half = na == 1 ? 0 : na / 2;
      mb.assign(half + 1, 1.0);
      mm.assign(half + 1, 0.0);
      for (int k = 0; k <= half; ++k) {
        const std::size_t idx = ang_off[i] + k;
        if (g.indicator_radius > 0.0) {
          mm[k] = r[i] < g.indicator_radius ? 1.0 : 0.0;
          mb[k] = 1.0 - mm[k];
          continue;
        }
        double m = 0.0, keep = 1.0;
        for (std::size_t f = 0; f < nf; ++f) {
          const double a = coeffs[f] * rho[f][idx];
          m += keep * a / (1.0 + a);
          keep /= 1.0 + a;
        }
        mm[k] = m;
        mb[k] = keep;
      }
      double s0m = 0.0, s0b = 0.0;
      for (int k = 0; k <= half; ++k) {
        const double t = tau[ang_off[i] + k];
        s0m += t * mm[k];
        s0b += t * mb[k];
      }
      c0m[i] = s0m;
      c0b[i] = s0b;
      coff[i] = coefs.size();
      if (j_cap[i] > 0) {
        const auto& tab = cos_table.at(na);
        int last = 0;
        for (int j = 1; j <= j_cap[i]; ++j) {
          const double* cs = &tab[static_cast<std::size_t>(j) * (half + 1)];
          double s = 0.0;
          for (int k = 0; k <= half; ++k) s += tau[ang_off[i] + k] * mb[k] * cs[k];
          coefs.push_back(s);
          if (std::abs(s) > kCoefFloor) last = j;
        }
        jeff[i] = last;
      }
    }
    coff[nr] = coefs.size();

    if (ppp) {
      double s = 0.0;
      for (std::size_t i = 0; i < nr; ++i) s += area[i] * c0m[i];
      return -g.intensity * s;
    }

    const std::size_t nm = modes.first.size();
    std::vector<double> diag(nm);
    std::vector<int> band(nm, 0);
    for (std::size_t n = 0; n < nm; ++n) {
      const double* w = &modes.w[modes.offset[n]];
      const int i0 = modes.first[n];
      double lm = 0.0, lb = 0.0;
      int b = 0;
      for (int k = 0; k < modes.len[n]; ++k) {
        lm += w[k] * c0m[i0 + k];
        lb += w[k] * c0b[i0 + k];
        b = std::max(b, jeff[i0 + k]);
      }
      diag[n] = lm < 0.5 ? 1.0 + alpha * lm : (1.0 + alpha) - alpha * modes.tail[n] - alpha * lb;
      band[n] = b;
    }
    int kd = 0;
    for (int b : band) kd = std::max(kd, b);
    kd = std::min<int>(kd, static_cast<int>(nm) - 1);

    double logdet = 0.0;
    if (kd == 0) {
      for (std::size_t n = 0; n < nm; ++n) {
        if (!(diag[n] > 0.0)) throw NumericalError("numerical breakdown: 1 + alpha lambda <= 0");
        logdet += std::log(diag[n]);
      }
      return -logdet / alpha;
    }

    const int ld = kd + 1;
    std::vector<double> ab(static_cast<std::size_t>(ld) * nm, 0.0);
    for (std::size_t n = 0; n < nm; ++n) {
      ab[static_cast<std::size_t>(n) * ld] = diag[n];
      const int i0 = modes.first[n], i1 = i0 + modes.len[n];
      const double* sn = &sqrt_w[modes.offset[n]];
      for (int j = 1; j <= band[n] && n + j < nm; ++j) {
        const std::size_t k = n + j;
        const int k0 = modes.first[k], k1 = k0 + modes.len[k];
        const double* sk = &sqrt_w[modes.offset[k]];
        const int lo = std::max(i0, k0), hi = std::min(i1, k1);
        double s = 0.0;
        for (int i = lo; i < hi; ++i) {
          if (j > jeff[i]) continue;
          s += sn[i - i0] * sk[i - k0] * coefs[coff[i] + j - 1];
        }
        ab[static_cast<std::size_t>(n) * ld + j] = -alpha * s;
      }
    }
    const int info = LAPACKE_dpbtrf(LAPACK_COL_MAJOR, 'L', static_cast<int>(nm), kd, ab.data(), ld);
    if (info != 0) throw NumericalError("numerical breakdown: discretized operator not positive definite");
    for (std::size_t n = 0; n < nm; ++n) logdet += 2.0 * std::log(ab[static_cast<std::size_t>(n) * ld]);
    return -logdet / alpha;
  }
};

NystromEvaluator::NystromEvaluator(Geometry g, NystromOptions opt) : impl_(std::make_unique<Impl>()) {
  if (!(g.intensity > 0.0) || !(g.window_radius > 0.0)) throw DomainError("invalid kernel geometry");
  if (g.centers.size() != g.exponents.size()) throw DomainError("centers and exponents differ in length");
  impl_->g = std::move(g);
  impl_->opt = opt;
  impl_->build();
}
NystromEvaluator::~NystromEvaluator() = default;
NystromEvaluator::NystromEvaluator(NystromEvaluator&&) noexcept = default;

double NystromEvaluator::log_laplace(std::span<const double> coeffs) const { return impl_->evaluate(coeffs); }
std::size_t NystromEvaluator::mode_count() const { return impl_->modes.first.size(); }
std::size_t NystromEvaluator::radial_node_count() const { return impl_->r.size(); }
std::size_t NystromEvaluator::angular_node_count() const { return impl_->ang_off.back(); }

namespace {

NystromEvaluator::Geometry geometry_of(const KernelSpec& k) {
  NystromEvaluator::Geometry g{k.intensity, k.repulsion, k.window_radius, {}, {}, 0.0};
  if (k.modulation.kind == Modulation::Kind::DiscIndicator) {
    g.indicator_radius = k.modulation.indicator_radius;
  } else {
    for (const auto& f : k.modulation.factors) {
      g.centers.push_back(f.center);
      g.exponents.push_back(f.exponent);
    }
  }
  return g;
}

std::vector<double> coeffs_of(const KernelSpec& k) {
  std::vector<double> c;
  if (k.modulation.kind == Modulation::Kind::Pathloss)
    for (const auto& f : k.modulation.factors) c.push_back(f.coeff);
  return c;
}

std::string geometry_key(const NystromEvaluator::Geometry& g, const NystromOptions& o) {
  std::ostringstream os;
  os.precision(17);
  os << g.intensity << '|' << g.repulsion.ppp << '|' << g.repulsion.alpha << '|' << g.window_radius << '|'
     << g.indicator_radius << '|' << o.panel_scale << '|' << o.min_angles << '|' << o.max_angles;
  for (std::size_t i = 0; i < g.centers.size(); ++i) os << '|' << g.centers[i].x << ',' << g.exponents[i];
  return os.str();
}

std::shared_ptr<const NystromEvaluator> cached_evaluator(const NystromEvaluator::Geometry& g,
                                                        const NystromOptions& o) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const NystromEvaluator>> cache;
  const auto key = geometry_key(g, o);
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto ev = std::make_shared<const NystromEvaluator>(g, o);
  std::lock_guard<std::mutex> lock(mu);
  if (cache.size() > 64) cache.clear();
  return cache.emplace(key, ev).first->second;
}

}  // namespace

double fredholm_log_det(const KernelSpec& k, const NystromOptions& opt) {
  if (k.modulation.kind == Modulation::Kind::Pathloss && k.modulation.factors.empty()) return 0.0;
  const auto g = geometry_of(k);
  const auto c = coeffs_of(k);
  const double v = cached_evaluator(g, opt)->log_laplace(c);
  if (opt.refinement_check) {
    NystromOptions fine = opt;
    fine.panel_scale *= 0.5;
    fine.min_angles *= 2;
    fine.max_angles *= 2;
    fine.refinement_check = false;
    const double vf = NystromEvaluator(g, fine).log_laplace(c);
    if (std::abs(vf - v) > opt.refinement_tol * std::max(1.0, std::abs(vf)))
      throw NumericalError("refinement check failed: N and 2N discretizations disagree");
  }
  return v;
}

double fredholm_det(const KernelSpec& k, const NystromOptions& opt) { return std::exp(fredholm_log_det(k, opt)); }

// ---------------------------------------------------------------------------
// Radial product path.

struct RadialModeTable::Impl {
  double intensity;
  bool ppp;
  double alpha;
  std::vector<double> r, u, du, rho;
  ModeTable modes;

  template <class T, class MFn, class MbFn>
  T evaluate(MFn mfun, MbFn mbfun) const {
    const std::size_t nr = r.size();
    std::vector<T> m(nr), mb(nr);
    for (std::size_t i = 0; i < nr; ++i) {
      m[i] = mfun(i);
      mb[i] = mbfun(i);
    }
    if (ppp) {
      T s = 0.0;
      for (std::size_t i = 0; i < nr; ++i) s += du[i] * m[i];
      return -s;
    }
    T sum = 0.0;
    int small_run = 0;
    for (std::size_t n = 0; n < modes.first.size(); ++n) {
      const double* w = &modes.w[modes.offset[n]];
      const int i0 = modes.first[n];
      T lm = 0.0;
      for (int k = 0; k < modes.len[n]; ++k) lm += w[k] * m[i0 + k];
      T f;
      if (std::abs(lm) < 0.5) {
        f = 1.0 + alpha * lm;
      } else {
        T lb = 0.0;
        for (int k = 0; k < modes.len[n]; ++k) lb += w[k] * mb[i0 + k];
        f = (1.0 + alpha) - alpha * modes.tail[n] - alpha * lb;
      }
      if constexpr (std::is_same_v<T, double>) {
        if (!(f > 0.0)) throw NumericalError("numerical breakdown: 1 + alpha lambda <= 0");
      }
      sum += std::log(f);
      // Terms decrease with the mode index for modulations decreasing in r.
      if (std::abs(alpha * lm) < 1e-13) {
        if (++small_run >= 3) break;
      } else {
        small_run = 0;
      }
    }
    return -sum / alpha;
  }
};

RadialModeTable::RadialModeTable(double intensity, Repulsion rep, double R, double exponent,
                                 std::vector<double> breakpoints)
    : impl_(std::make_unique<Impl>()) {
  auto& s = *impl_;
  s.intensity = intensity;
  s.ppp = rep.is_ppp();
  s.alpha = rep.alpha;
  const double c = std::sqrt(kPi * intensity);
  const double t_max = R * c;
  const double h = 0.75;
  std::vector<double> edges;
  for (double t = 0.0; t < t_max; t += h) edges.push_back(t);
  for (int k = 1; k <= 18; ++k) edges.push_back(h * std::ldexp(1.0, -k));
  for (double b : breakpoints) edges.push_back(b * c);
  merge_edges(edges, 0.0, t_max);
  for (const auto& q : composite_gauss_legendre(edges)) {
    s.r.push_back(q.x / c);
    s.u.push_back(q.x * q.x);
    s.du.push_back(2.0 * q.x * q.w);
    s.rho.push_back(std::pow(q.x / c, -exponent));
  }
  if (!s.ppp) s.modes = build_modes(s.u, s.du, t_max * t_max);
}
RadialModeTable::~RadialModeTable() = default;
RadialModeTable::RadialModeTable(RadialModeTable&&) noexcept = default;

std::size_t RadialModeTable::mode_count() const { return impl_->modes.first.size(); }

std::complex<double> RadialModeTable::log_laplace(std::complex<double> coeff) const {
  const auto& s = *impl_;
  using C = std::complex<double>;
  return s.evaluate<C>(
      [&](std::size_t i) {
        const C a = coeff * s.rho[i];
        return a / (1.0 + a);
      },
      [&](std::size_t i) { return 1.0 / (1.0 + coeff * s.rho[i]); });
}

double RadialModeTable::log_laplace_real(double (*m)(double, const void*), double (*mbar)(double, const void*),
                                         const void* ctx) const {
  const auto& s = *impl_;
  return s.evaluate<double>([&](std::size_t i) { return m(s.r[i], ctx); },
                            [&](std::size_t i) { return mbar(s.r[i], ctx); });
}

double radial_fredholm_log_det(const KernelSpec& k) {
  if (!k.modulation.radial()) throw DomainError("radial product requires an origin-centered modulation");
  if (k.modulation.kind == Modulation::Kind::Pathloss && k.modulation.factors.empty()) return 0.0;
  std::vector<double> bps;
  if (k.modulation.kind == Modulation::Kind::DiscIndicator) bps.push_back(k.modulation.indicator_radius);
  const double mu = k.modulation.factors.empty() ? 4.0 : k.modulation.factors.front().exponent;
  RadialModeTable table(k.intensity, k.repulsion, k.window_radius, mu, bps);
  const auto* mod = &k.modulation;
  return table.log_laplace_real(
      [](double r, const void* p) { return static_cast<const Modulation*>(p)->value({r, 0.0}); },
      [](double r, const void* p) { return static_cast<const Modulation*>(p)->complement({r, 0.0}); }, mod);
}

double radial_fredholm_det(const KernelSpec& k) { return std::exp(radial_fredholm_log_det(k)); }

}  // namespace hrelay
