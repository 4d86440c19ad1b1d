#include "mpgreen/oracle_quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <string>

#include <omp.h>

#include "mpgreen/errors.hpp"

namespace mpgreen {

namespace {

struct GaussRule {
  std::vector<double> x;  // on [-1, 1]
  std::vector<double> w;
};

GaussRule compute_gauss(int n) {
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return r;
}

const GaussRule& gauss(int n) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss(n)).first;
  return it->second;
}

template <class F>
auto integrate_panel(const GaussRule& g, double lo, double hi, F&& f) {
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  decltype(f(mid)) s{};
  for (size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * f(mid + half * g.x[i]);
  return s * half;
}

// sum_p coef[p] k^{-p} e^{i omega k}
struct Oscillatory {
  double omega = 0.0;
  std::vector<Complex> coef;
  double shift = 0.0;  // extra real power: k^{-(p + shift)}
};

// j_n(kappa k) = (X + conj X) / 2 with X = (-i)^{n+1} e^{i kappa k} sum_q c_q i^q (kappa k)^{-q-1},
// c_q = (n+q)! / (q! (n-q)! 2^q). Exact for all k > 0.
std::array<Oscillatory, 2> bessel_asymptotic(int n, double kappa) {
  Oscillatory x;
  x.omega = kappa;
  x.coef.assign(n + 2, Complex{0.0, 0.0});
  const Complex lead = 0.5 * minus_i_pow(n + 1);
  for (int q = 0; q <= n; ++q) {
    const double c = std::exp(std::lgamma(n + q + 1.0) - std::lgamma(q + 1.0) -
                              std::lgamma(n - q + 1.0)) /
                     std::pow(2.0, q);
    x.coef[q + 1] = lead * c * minus_i_pow(-q) * std::pow(kappa, -q - 1.0);
  }
  Oscillatory y = x;
  y.omega = -kappa;
  for (auto& c : y.coef) c = std::conj(c);
  return {x, y};
}

Oscillatory multiply(const Oscillatory& a, const Oscillatory& b) {
  Oscillatory r;
  r.omega = a.omega + b.omega;
  r.shift = a.shift + b.shift;
  r.coef.assign(a.coef.size() + b.coef.size() - 1, Complex{0.0, 0.0});
  for (size_t i = 0; i < a.coef.size(); ++i)
    for (size_t j = 0; j < b.coef.size(); ++j) r.coef[i + j] += a.coef[i] * b.coef[j];
  return r;
}

// Expansion of a product of factors, each a sum of oscillatory pieces.
std::vector<Oscillatory> expand(const std::vector<std::vector<Oscillatory>>& factors) {
  std::vector<Oscillatory> acc;
  Oscillatory one;
  one.coef = {Complex{1.0, 0.0}};
  acc.push_back(one);
  for (const auto& f : factors) {
    std::vector<Oscillatory> next;
    for (const auto& a : acc)
      for (const auto& b : f) next.push_back(multiply(a, b));
    acc = std::move(next);
  }
  return acc;
}

struct TailSum {
  Complex value{0.0, 0.0};
  double error = 0.0;
};

// \int_K^inf k^{-s} e^{i omega k} dk (Abel sense for s <= 1 with omega != 0).
TailSum power_tail(double s, double omega, double K, int max_terms) {
  TailSum t;
  if (omega == 0.0) {
    if (s <= 1.0) throw TailTooLarge("non-oscillatory tail k^-" + std::to_string(s) +
                                         " diverges", INFINITY);
    t.value = std::pow(K, 1.0 - s) / (s - 1.0);
    return t;
  }
  const Complex iwk(0.0, omega * K);
  const Complex lead = -std::exp(Complex(0.0, omega * K)) / Complex(0.0, omega) * std::pow(K, -s);
  Complex term = 1.0, sum = 0.0;
  double prev = INFINITY;
  for (int n = 0; n < max_terms; ++n) {
    const double mag = std::abs(term);
    if (mag > prev) break;  // asymptotic series started to diverge
    sum += term;
    prev = mag;
    t.error = mag;
    if (mag < 1e-17 * std::abs(sum)) {
      t.error = 0.0;
      break;
    }
    term *= (s + n) / iwk;
  }
  t.value = lead * sum;
  t.error *= std::abs(lead);
  return t;
}

TailSum tail_integral(const std::vector<Oscillatory>& pieces, double K, int max_terms) {
  TailSum total;
  for (const auto& pc : pieces) {
    for (size_t p = 0; p < pc.coef.size(); ++p) {
      if (pc.coef[p] == 0.0) continue;
      const TailSum t = power_tail(static_cast<double>(p) + pc.shift, pc.omega, K, max_terms);
      total.value += pc.coef[p] * t.value;
      total.error += std::abs(pc.coef[p]) * t.error;
    }
  }
  return total;
}

double min_beat(const std::vector<Oscillatory>& pieces) {
  double m = INFINITY;
  for (const auto& p : pieces)
    if (p.omega != 0.0) m = std::min(m, std::abs(p.omega));
  return m;
}

// Oscillation-aligned Gauss panels of width h over [lo, hi].
template <class F>
double panel_sum(double lo, double hi, double h, int order, F&& f) {
  const GaussRule& g = gauss(order);
  double s = 0.0;
  const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / h - 1e-12)));
  const double step = (hi - lo) / n;
  for (int i = 0; i < n; ++i) s += integrate_panel(g, lo + i * step, lo + (i + 1) * step, f);
  return s;
}

Mat3 frame_to(const Vec3& v) {
  double theta, phi;
  direction_angles(v, theta, phi);
  return rotation_matrix({phi, theta, 0.0});
}

Vec3 on_sphere(const Mat3& q, double theta, double phi) {
  return mpgreen::apply(q, {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                   std::cos(theta)});
}

struct OuterNode {
  Vec3 n;  // unit normal on sphere 1
  double weight;
};

std::vector<OuterNode> outer_nodes(const SphereGeometry& geom, int N) {
  const double R = geom.distance();
  const Mat3 q = frame_to(geom.separation);
  // Split at the circle where sphere 1 crosses sphere 2.
  const double theta_c = R <= 2.0 * geom.a ? std::acos(-R / (2.0 * geom.a)) : 0.5 * kPi;
  const GaussRule& g = gauss(N);
  const int M = 2 * N;
  std::vector<OuterNode> nodes;
  nodes.reserve(static_cast<size_t>(2 * N) * M);
  for (auto [lo, hi] : {std::pair{0.0, theta_c}, std::pair{theta_c, kPi}}) {
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (int i = 0; i < N; ++i) {
      const double th = mid + half * g.x[i];
      const double wt = g.w[i] * half * std::sin(th) * 2.0 * kPi / M;
      for (int k = 0; k < M; ++k) nodes.push_back({on_sphere(q, th, 2.0 * kPi * k / M), wt});
    }
  }
  return nodes;
}

void accumulate(int lmax, const std::vector<OuterNode>& nodes, const std::vector<Complex>& phi,
                const SphereGeometry& geom, std::vector<Complex>& out) {
  const int nch = (lmax + 1) * (lmax + 1);
  out.assign(static_cast<size_t>(nch) * nch, Complex{0.0, 0.0});
  std::vector<Complex> y(nch);
  for (size_t i = 0; i < nodes.size(); ++i) {
    double th, ph;
    direction_angles(nodes[i].n, th, ph);
    spherical_harmonics_all(lmax, th, ph, y);
    for (int r = 0; r < nch; ++r) {
      const Complex wy = nodes[i].weight * std::conj(y[r]);
      for (int c = 0; c < nch; ++c) out[static_cast<size_t>(r) * nch + c] += wy * phi[i * nch + c];
    }
  }
  for (int l = 0; l <= lmax; ++l)
    for (int lp = 0; lp <= lmax; ++lp) {
      const double f = std::pow(geom.a, l + lp + 2) / (4.0 * kPi);
      for (int m = -l; m <= l; ++m)
        for (int mp = -lp; mp <= lp; ++mp)
          out[static_cast<size_t>(packed_index(l, m)) * nch + packed_index(lp, mp)] *= f;
    }
}

std::vector<Complex> block_values(int lmax, const SphereGeometry& geom, int N, int workers,
                                  bool parallel) {
  const auto nodes = outer_nodes(geom, N);
  const int nch = (lmax + 1) * (lmax + 1);
  const long nn = static_cast<long>(nodes.size());
  std::vector<Complex> phi(static_cast<size_t>(nn) * nch);
  auto fill = [&](long i) {
    const Vec3 p{geom.separation[0] + geom.a * nodes[i].n[0],
                 geom.separation[1] + geom.a * nodes[i].n[1],
                 geom.separation[2] + geom.a * nodes[i].n[2]};
    const auto v = sphere_potential(lmax, p, geom.a, N);
    std::copy(v.begin(), v.end(), phi.begin() + i * nch);
  };
  if (parallel) {
    const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
    for (long i = 0; i < nn; ++i) fill(i);
  } else {
    for (long i = 0; i < nn; ++i) fill(i);
  }
  std::vector<Complex> out;
  accumulate(lmax, nodes, phi, geom, out);
  return out;
}

SurfaceQuadrature run_block(int lmax, const SphereGeometry& geom, const QuadratureSpec& spec,
                            int workers, bool parallel) {
  if (lmax < 0) throw DomainError("lmax must be >= 0");
  spec.check();
  geom.check();
  SurfaceQuadrature q;
  q.lmax = lmax;
  q.values = block_values(lmax, geom, spec.node_count, workers, parallel);
  const auto coarse =
      block_values(lmax, geom, std::max(4, spec.node_count / 2), workers, parallel);
  for (size_t i = 0; i < coarse.size(); ++i)
    q.error_estimate = std::max(q.error_estimate, std::abs(coarse[i] - q.values[i]));
  return q;
}

}  // namespace

void QuadratureSpec::check() const {
  if (node_count < 8) throw DomainError("node_count must be >= 8");
  if (!(k_max > 0.0)) throw DomainError("k_max must be > 0");
  if (tail_order < 1) throw DomainError("tail_order must be >= 1");
  if (rel_tol < 0.0) throw DomainError("rel_tol must be >= 0");
}

Complex SurfaceQuadrature::at(MultipoleIndex lm, MultipoleIndex lpmp) const {
  lm.check();
  lpmp.check();
  if (lm.l > lmax || lpmp.l > lmax) throw DomainError("channel outside the computed block");
  const int nch = (lmax + 1) * (lmax + 1);
  return values[static_cast<size_t>(packed_index(lm.l, lm.m)) * nch +
                packed_index(lpmp.l, lpmp.m)];
}

std::vector<Complex> sphere_potential(int lmax, const Vec3& p, double a, int node_count) {
  const double r = norm(p);
  const Mat3 q = frame_to(p);
  const int nch = (lmax + 1) * (lmax + 1);
  std::vector<Complex> out(nch, Complex{0.0, 0.0}), y(nch);

  // Polar coordinates about p: the kernel depends on theta' only and is
  // smooth for r == a; for r near a its boundary layer at theta' = 0 has
  // width ~ |r - a| / a, resolved by geometric grading.
  const double gap = std::abs(r - a) / a;
  int levels = 3;
  if (gap > 1e-14) levels = std::clamp(static_cast<int>(std::ceil(std::log2(kPi / gap))) + 2, 3, 48);
  std::vector<double> breaks{0.0};
  for (int k = levels; k >= 1; --k) breaks.push_back(kPi * std::ldexp(1.0, -k));
  breaks.push_back(kPi);

  const GaussRule& g = gauss(std::max(8, node_count / 2));
  // The phi' integrand is a trigonometric polynomial of degree <= lmax.
  const int M = 2 * lmax + 3;
  for (size_t b = 0; b + 1 < breaks.size(); ++b) {
    const double mid = 0.5 * (breaks[b] + breaks[b + 1]), half = 0.5 * (breaks[b + 1] - breaks[b]);
    for (size_t i = 0; i < g.x.size(); ++i) {
      const double th = mid + half * g.x[i];
      const double s2 = std::sin(0.5 * th);
      const double dist = std::sqrt((r - a) * (r - a) + 4.0 * r * a * s2 * s2);
      const double w = g.w[i] * half * std::sin(th) / dist * 2.0 * kPi / M;
      for (int k = 0; k < M; ++k) {
        double tt, pp;
        direction_angles(on_sphere(q, th, 2.0 * kPi * k / M), tt, pp);
        spherical_harmonics_all(lmax, tt, pp, y);
        for (int c = 0; c < nch; ++c) out[c] += w * y[c];
      }
    }
  }
  return out;
}

SurfaceQuadrature defining_integral_block(int lmax, const SphereGeometry& geom,
                                          const QuadratureSpec& spec, int workers) {
  return run_block(lmax, geom, spec, workers, true);
}

SurfaceQuadrature defining_integral_block_serial(int lmax, const SphereGeometry& geom,
                                                 const QuadratureSpec& spec) {
  return run_block(lmax, geom, spec, 1, false);
}

Complex defining_integral_quadrature(MultipoleIndex lm, MultipoleIndex lpmp,
                                     const SphereGeometry& geom, const QuadratureSpec& spec) {
  lm.check();
  lpmp.check();
  const SurfaceQuadrature q = defining_integral_block(std::max(lm.l, lpmp.l), geom, spec);
  const Complex v = q.at(lm, lpmp);
  if (spec.rel_tol > 0.0) {
    double scale = 0.0;
    for (const auto& c : q.values) scale = std::max(scale, std::abs(c));
    if (q.error_estimate > spec.rel_tol * scale)
      throw SingularConfiguration("surface quadrature reached only " +
                                      std::to_string(q.error_estimate / scale) +
                                      " relative accuracy",
                                  q.error_estimate / scale);
  }
  return v;
}

double hankel_triple_bessel(const ReducedIndex& idx, double R, double a,
                            const QuadratureSpec& spec) {
  idx.check();
  spec.check();
  if (!(a > 0.0)) throw DomainError("sphere radius a must be > 0");
  if (!(R >= 0.0)) throw DomainError("separation R must be >= 0");
  if (R == 0.0 && idx.j > 0) return 0.0;

  std::vector<std::vector<Oscillatory>> factors;
  if (R > 0.0) {
    auto b = bessel_asymptotic(idx.j, R);
    factors.push_back({b[0], b[1]});
  }
  for (int n : {idx.l, idx.lp}) {
    auto b = bessel_asymptotic(n, a);
    factors.push_back({b[0], b[1]});
  }
  const auto pieces = expand(factors);

  const double scale = std::max(R, a);
  double K = spec.k_max / scale;
  const double beat = min_beat(pieces);
  if (std::isfinite(beat)) K = std::max(K, 50.0 / beat);
  if (K * scale > 2e5)
    throw TailTooLarge("beat frequency too small for the asymptotic tail", 1.0 / (K * scale));

  auto f = [&](double k) {
    const double jj = R > 0.0 ? spherical_bessel_j(idx.j, k * R) : 1.0;
    return jj * spherical_bessel_j(idx.l, k * a) * spherical_bessel_j(idx.lp, k * a);
  };
  const double body = panel_sum(0.0, K, kPi / scale, spec.node_count, f);
  const TailSum tail = tail_integral(pieces, K, spec.tail_order);
  const double value = body + tail.value.real();
  if (tail.error > 1e-10 * std::max(std::abs(value), 1e-3 / a))
    throw TailTooLarge("asymptotic tail error " + std::to_string(tail.error), tail.error);
  return value;
}

Complex hankel_forward(const ReducedIndex& idx, double k, double a,
                       const std::function<double(double)>& g, const QuadratureSpec& spec) {
  idx.check();
  spec.check();
  if (!(a > 0.0)) throw DomainError("sphere radius a must be > 0");
  if (!(k > 0.0)) throw ZeroWaveVector();
  const int order = spec.node_count;
  auto f = [&](double R) { return R * R * spherical_bessel_j(idx.j, k * R) * g(R); };
  const double h = kPi / k;

  auto integral_to = [&](double rmax) {
    double s = panel_sum(0.0, 2.0 * a, std::min(h, 2.0 * a), order, f);
    s += panel_sum(2.0 * a, rmax, h, order, f);
    // Power-law tail g ~ C R^{-p}.
    const double g1 = g(rmax), g2 = g(2.0 * rmax);
    if (g1 == 0.0 && g2 == 0.0) return s;
    if (g1 == 0.0 || g2 == 0.0 || (g1 > 0) != (g2 > 0))
      throw TailTooLarge("g does not follow a power law beyond R=" + std::to_string(rmax),
                         std::abs(g1));
    double p = std::log(g1 / g2) / std::log(2.0);
    if (std::abs(p - std::round(p)) < 1e-6) p = std::round(p);
    const double C = g1 * std::pow(rmax, p);
    auto b = bessel_asymptotic(idx.j, k);
    Oscillatory lead;
    lead.coef = {Complex{C, 0.0}};
    lead.shift = p - 2.0;
    const auto pieces = expand({{b[0], b[1]}, {lead}});
    const TailSum t = tail_integral(pieces, rmax, spec.tail_order);
    return s + t.value.real();
  };

  const double rmax = 2.0 * a + std::max(4.0 * a, 200.0 / k);
  const double full = integral_to(rmax);
  const double half = integral_to(2.0 * a + 0.5 * (rmax - 2.0 * a));
  if (std::abs(full - half) > 1e-8 * std::max(std::abs(full), 1e-300) && std::abs(full) > 0.0)
    throw TailTooLarge("forward transform moved by " + std::to_string(std::abs(full - half)) +
                           " when halving the cutoff",
                       std::abs(full - half));
  return 4.0 * kPi * minus_i_pow(idx.j) * full;
}

double hankel_inverse(const ReducedIndex& idx, double R, double a,
                      const std::function<Complex(double)>& gt, const QuadratureSpec& spec) {
  idx.check();
  spec.check();
  if (!(a > 0.0)) throw DomainError("sphere radius a must be > 0");
  if (!(R >= 0.0)) throw DomainError("separation R must be >= 0");
  const double scale = std::max(R, a);
  const double K = spec.k_max / scale;
  const GaussRule& g = gauss(spec.node_count);
  auto f = [&](double k) {
    const double jj = R > 0.0 ? spherical_bessel_j(idx.j, k * R) : (idx.j == 0 ? 1.0 : 0.0);
    return k * k * jj * gt(k);
  };
  const double h = kPi / scale;
  const int n = static_cast<int>(std::ceil(K / h));
  const double step = K / n;
  auto fabs_ = [&](double k) { return Complex(std::abs(f(k)), 0.0); };
  Complex half{0.0, 0.0}, full{0.0, 0.0}, l1{0.0, 0.0};
  for (int i = 0; i < n; ++i) {
    full += integrate_panel(g, i * step, (i + 1) * step, f);
    l1 += integrate_panel(g, i * step, (i + 1) * step, fabs_);
    if (i + 1 == n / 2) half = full;
  }
  const Complex pref = minus_i_pow(-idx.j) / (2.0 * kPi * kPi);
  const Complex v = pref * full, vh = pref * half;
  // The integrand decays at least as k^-3, so the tail beyond K is about a
  // seventh of the change between K/2 and K. Results that cancel to zero are
  // judged against the L1 norm of the integrand instead.
  const double est = std::abs(v - vh) / 7.0;
  const double ref = std::max(std::abs(v), std::abs(pref) * l1.real());
  if (est > 1e-6 * ref)
    throw TailTooLarge("inverse transform tail estimate " + std::to_string(est), est);
  return v.real();
}

}  // namespace mpgreen
