#include "hrelay/sampler.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "hrelay/errors.hpp"

namespace hrelay {

namespace {

constexpr double kPi = std::numbers::pi;

void check_spec(const SamplerSpec& s) {
  if (!(s.intensity > 0.0)) throw DomainError("sampler intensity must be positive");
  if (!(s.window_radius > 0.0)) throw DomainError("sampler window radius must be positive");
  if (!s.repulsion.is_ppp() && !(s.repulsion.alpha >= -1.0 && s.repulsion.alpha < 0.0))
    throw DomainError("repulsion must be PPP or lie in [-1, 0)");
}

void append_ppp(double intensity, double radius, Rng& rng, std::vector<Point>& out) {
  std::poisson_distribution<long> count(intensity * kPi * radius * radius);
  const long n = count(rng);
  for (long i = 0; i < n; ++i) {
    const double r = radius * std::sqrt(rng.uniform());
    const double t = 2.0 * kPi * rng.uniform();
    out.push_back({r * std::cos(t), r * std::sin(t)});
  }
}

// Eigenvalues of an n x n complex Ginibre matrix via its Hessenberg form:
// iid CN(0,1) on and above the diagonal, chi-distributed subdiagonal.
std::vector<std::complex<double>> ginibre_eigenvalues(int n, Rng& rng) {
  std::vector<std::complex<double>> h(static_cast<std::size_t>(n) * n, 0.0);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i <= j; ++i) h[i + static_cast<std::size_t>(j) * n] = {normal(rng), normal(rng)};
    if (j + 1 < n) {
      std::gamma_distribution<double> gam(n - 1 - j, 1.0);
      h[j + 1 + static_cast<std::size_t>(j) * n] = std::sqrt(gam(rng));
    }
  }
  std::vector<std::complex<double>> w(n);
  lapack_complex_double dummy{};
  const int info = LAPACKE_zhseqr(LAPACK_COL_MAJOR, 'E', 'N', n, 1, n,
                                  reinterpret_cast<lapack_complex_double*>(h.data()), n,
                                  reinterpret_cast<lapack_complex_double*>(w.data()), &dummy, 1);
  if (info != 0) throw NumericalError("Hessenberg eigenvalue iteration failed");
  return w;
}

// Ginibre field of the given intensity, each point kept with probability keep.
void append_ginibre(double intensity, double radius, double keep, int exact_modes, Rng& rng,
                    std::vector<Point>& out) {
  const double scale = 1.0 / std::sqrt(kPi * intensity);
  const double u_max = kPi * intensity * radius * radius;
  const int total = ginibre_truncation(u_max);
  const int core = std::clamp(exact_modes, 0, total);
  if (core > 0) {
    for (const auto& z : ginibre_eigenvalues(core, rng)) {
      if (keep < 1.0 && rng.uniform() >= keep) continue;
      if (std::norm(z) >= u_max) continue;
      out.push_back({z.real() * scale, z.imag() * scale});
    }
  }
  for (int k = core + 1; k <= total; ++k) {
    if (keep < 1.0 && rng.uniform() >= keep) continue;
    std::gamma_distribution<double> gam(k, 1.0);
    const double u = gam(rng);
    if (u >= u_max) continue;
    const double r = std::sqrt(u) * scale;
    const double t = 2.0 * kPi * rng.uniform();
    out.push_back({r * std::cos(t), r * std::sin(t)});
  }
}

void draw_once(const SamplerSpec& s, Rng& rng, std::vector<Point>& out) {
  out.clear();
  const double lambda = s.intensity;
  const double R = s.window_radius;
  if (s.repulsion.is_ppp()) {
    append_ppp(lambda, R, rng, out);
    return;
  }
  const double a = -s.repulsion.alpha;
  const double inv = 1.0 / a;
  const double k = std::round(inv);
  if (std::abs(inv - k) < 1e-9) {
    // Union of k independent Ginibre fields, each thinned by 1/k: an exact
    // alpha-Ginibre field for alpha = -1/k.
    for (int i = 0; i < static_cast<int>(k); ++i)
      append_ginibre(lambda, R, 1.0 / k, s.exact_modes, rng, out);
    return;
  }
  // Other alpha: a Ginibre field thinned by sqrt(-alpha) plus an independent
  // Poisson field carrying the remaining intensity. Intensity and pair
  // correlation equal those of the alpha-Ginibre field.
  const double c = std::sqrt(a);
  append_ginibre(lambda, R, c, s.exact_modes, rng, out);
  append_ppp((1.0 - c) * lambda, R, rng, out);
}

bool violates_exclusion(const SamplerSpec& s, const std::vector<Point>& pts) {
  if (s.exclusion_radius <= 0.0 || s.exclusion_centers.empty()) return false;
  const double r2 = s.exclusion_radius * s.exclusion_radius;
  for (const auto& p : pts)
    for (const auto& c : s.exclusion_centers) {
      const double dx = p.x - c.x, dy = p.y - c.y;
      if (dx * dx + dy * dy < r2) return true;
    }
  return false;
}

PointPattern wrap(const SamplerSpec& s, std::vector<Point> pts) {
  PointPattern p;
  p.points = std::move(pts);
  p.intensity = s.intensity;
  p.repulsion = s.repulsion;
  p.window_radius = s.window_radius;
  return p;
}

}  // namespace

int ginibre_truncation(double u) {
  return static_cast<int>(std::ceil(u + 6.0 * std::sqrt(u))) + 10;
}

void sample_field(const SamplerSpec& s, Rng& rng, std::vector<Point>& out) {
  check_spec(s);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    draw_once(s, rng, out);
    if (!violates_exclusion(s, out)) return;
  }
  throw NumericalError("exclusion zone rejects every draw; radius too large for the intensity");
}

PointPattern sample_field(const SamplerSpec& s) {
  Rng rng(stream_key(s.seed, 0x5a3d1e));
  std::vector<Point> pts;
  sample_field(s, rng, pts);
  return wrap(s, std::move(pts));
}

PointPattern sample_ppp(const SamplerSpec& s) {
  if (!s.repulsion.is_ppp()) {
    SamplerSpec t = s;
    t.repulsion = Repulsion::poisson();
    return sample_field(t);
  }
  return sample_field(s);
}

PointPattern sample_ginibre(const SamplerSpec& s) {
  if (s.repulsion.is_ppp() || s.repulsion.alpha != -1.0)
    throw DomainError("sample_ginibre requires repulsion -1");
  return sample_field(s);
}

PointPattern sample_alpha_gpp(const SamplerSpec& s) {
  if (s.repulsion.is_ppp()) throw DomainError("sample_alpha_gpp requires alpha in [-1, 0)");
  return sample_field(s);
}

double disc_overlap_area(double R, double h) {
  if (h >= 2.0 * R) return 0.0;
  return 2.0 * R * R * std::acos(h / (2.0 * R)) - 0.5 * h * std::sqrt(4.0 * R * R - h * h);
}

PairCorrelation pair_correlation_estimate(std::span<const PointPattern> patterns,
                                          std::span<const double> edges) {
  if (edges.size() < 2) throw DomainError("pair correlation needs at least one bin");
  if (patterns.empty()) throw DomainError("pair correlation needs at least one pattern");
  const double lambda = patterns.front().intensity;
  const double R = patterns.front().window_radius;
  const std::size_t nb = edges.size() - 1;
  const double r_max = edges.back();
  std::vector<double> acc(nb, 0.0), count(nb, 0.0);
  for (const auto& pat : patterns) {
    const auto& p = pat.points;
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t j = i + 1; j < p.size(); ++j) {
        const double d = distance(p[i], p[j]);
        if (d >= r_max || d < edges.front()) continue;
        const auto it = std::upper_bound(edges.begin(), edges.end(), d);
        const std::size_t b = static_cast<std::size_t>(it - edges.begin()) - 1;
        acc[b] += 2.0 / disc_overlap_area(R, d);
        count[b] += 1.0;
      }
  }
  PairCorrelation out;
  const double n = static_cast<double>(patterns.size());
  for (std::size_t b = 0; b < nb; ++b) {
    const double ring = kPi * (edges[b + 1] * edges[b + 1] - edges[b] * edges[b]);
    out.r_lo.push_back(edges[b]);
    out.r_hi.push_back(edges[b + 1]);
    out.g.push_back(acc[b] / (n * lambda * lambda * ring));
    out.pair_count.push_back(count[b]);
  }
  if (patterns.size() < 100) out.warning = "fewer than 100 patterns; estimator variance is large";
  return out;
}

}  // namespace hrelay
