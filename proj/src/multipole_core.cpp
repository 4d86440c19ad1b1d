#include "mpgreen/multipole_core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <string>

#include <omp.h>

#include "mpgreen/errors.hpp"

namespace mpgreen {

namespace {

using RA = RegularizedArgument;

double sq(double x) { return x * x; }

void check_radius(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("sphere radius a must be > 0");
}

void check_separation(double R) {
  if (!(R >= 0.0) || !std::isfinite(R)) throw DomainError("separation R must be >= 0");
}

// Product of Gamma factors: num[i] in the numerator, den[i] reciprocal.
template <size_t N, size_t D>
LaurentValue gamma_ratio(const std::array<RA, N>& num, const std::array<RA, D>& den, double c,
                         LaurentWindow w) {
  LaurentValue v = LaurentValue::constant(c, w);
  // Zeros first: an exact zero skips the pole factors entirely.
  for (const auto& d : den) {
    v = v * rgamma_laurent(d, w);
    if (v.is_zero()) return v;
  }
  for (const auto& n : num) v = v * gamma_laurent(n, w);
  return v;
}

struct TermResult {
  LaurentValue value;
  double magnitude = 0.0;
  int terms = 0;
  bool converged = true;
};

TermResult assemble_term(const LaurentValue& coef, const std::array<RA, 4>& alphas,
                         const std::array<RA, 3>& betas, double x, const LaurentValue& prefactor,
                         int kmax, LaurentWindow w) {
  TermResult t;
  if (coef.is_zero()) {
    t.value = LaurentValue::zero(w);
    return t;
  }
  HyperOptions ho;
  ho.kmax = kmax;
  ho.window = w;
  ho.needed_order = -coef.leading_order();
  HyperResult h = hyper4f3_regularized(alphas, betas, x, ho);
  t.terms = h.terms;
  t.converged = h.converged;
  t.value = coef * h.value * prefactor;
  t.magnitude = std::abs(t.value.coeff(0));
  return t;
}

// Sum of the three hypergeometric terms for rho = R/a, without (pi/2)^{3/2}/a.
OverlapIntegral overlap_once(const ReducedIndex& idx, double rho, LaurentWindow w, int kmax) {
  const double l = idx.l, lp = idx.lp, j = idx.j;
  const double x = std::min(1.0, rho * rho / 4.0);

  // rho^{j+eps} = rho^j exp(eps ln rho); at rho = 0 only j = 0 survives and
  // the eps-dependence is dropped.
  LaurentValue rho_j = LaurentValue::constant(1.0, w);
  if (rho > 0.0) {
    LaurentValue lg = LaurentValue::from_coefficients(1, {std::log(rho)}, w);
    rho_j = LaurentValue::exp(lg).scaled(std::pow(rho, j));
  } else if (idx.j > 0) {
    rho_j = LaurentValue::zero(w);
  }

  // rho * alpha * F1
  const LaurentValue ca = gamma_ratio<1, 3>(
      {RA{(j - 1) / 2, 0.5}},
      {RA{(1 + lp - l) / 2, 0.0}, RA{(1 + l - lp) / 2, 0.0}, RA{(j + 4) / 2, 0.5}},
      std::pow(2.0, -2.5), w);
  const TermResult t1 = assemble_term(
      ca,
      {RA{-(l + lp) / 2, 0.0}, RA{(1 + l - lp) / 2, 0.0}, RA{(1 - l + lp) / 2, 0.0},
       RA{(2 + l + lp) / 2, 0.0}},
      {RA{0.5, 0.0}, RA{(3 - j) / 2, -0.5}, RA{(4 + j) / 2, 0.5}}, x,
      LaurentValue::constant(rho, w), kmax, w);

  // rho^{j+eps} * beta * F2
  const LaurentValue cb = gamma_ratio<2, 4>(
      {RA{1 - j, -1.0}, RA{(1 + l + lp + j) / 2, 0.5}},
      {RA{1 + (1 + l + lp - j) / 2, -0.5}, RA{1 + (lp - l - j) / 2, -0.5},
       RA{1 + (l - lp - j) / 2, -0.5}, RA{1.5 + j, 1.0}},
      std::pow(2.0, -1.5), w);
  TermResult t2;
  if (rho_j.is_zero()) {
    t2.value = LaurentValue::zero(w);
  } else {
    t2 = assemble_term(cb,
                       {RA{(j - l - lp - 1) / 2, 0.5}, RA{(j + l - lp) / 2, 0.5},
                        RA{(j + lp - l) / 2, 0.5}, RA{(l + lp + j + 1) / 2, 0.5}},
                       {RA{(1 + j) / 2, 0.5}, RA{j / 2, 0.5}, RA{1.5 + j, 1.0}}, x, rho_j, kmax,
                       w);
  }

  // -rho^2 * gamma * F3
  const LaurentValue cg = gamma_ratio<1, 3>(
      {RA{j / 2 - 1, 0.5}}, {RA{(lp - l) / 2, 0.0}, RA{(l - lp) / 2, 0.0}, RA{2 + (j + 1) / 2, 0.5}},
      -std::pow(2.0, -3.5) * (l + lp + 1), w);
  const TermResult t3 = assemble_term(
      cg,
      {RA{1 - (l + lp + 1) / 2, 0.0}, RA{1 + (l - lp) / 2, 0.0}, RA{1 + (lp - l) / 2, 0.0},
       RA{1 + (l + lp + 1) / 2, 0.0}},
      {RA{1.5, 0.0}, RA{2 - j / 2, -0.5}, RA{2 + (j + 1) / 2, 0.5}}, x,
      LaurentValue::constant(rho * rho, w), kmax, w);

  if (!t1.converged || !t2.converged || !t3.converged)
    throw NonConvergence("4F3 series did not converge within " + std::to_string(kmax) +
                         " terms");

  OverlapIntegral out;
  out.laurent = t1.value + t2.value + t3.value;
  const double c0 = out.laurent.coeff(0);
  out.scale = std::max(std::abs(c0), t1.magnitude + t2.magnitude + t3.magnitude);
  out.residue = out.scale > 0.0 ? out.laurent.negative_residue() / out.scale
                                : out.laurent.negative_residue();
  out.terms = std::max({t1.terms, t2.terms, t3.terms});
  out.window = w;
  out.value = c0;
  return out;
}

double check_polynomial_scale(const ReducedIndex& idx, double a) {
  return std::pow(a, idx.l + idx.lp + 1);
}

}  // namespace

void ReducedIndex::check() const {
  if (l < 0 || lp < 0 || j < 0)
    throw DomainError("indices must be non-negative (l=" + std::to_string(l) +
                      ", lp=" + std::to_string(lp) + ", j=" + std::to_string(j) + ")");
  if (j < std::abs(l - lp) || j > l + lp)
    throw DomainError("triangle rule |l-lp| <= j <= l+lp violated (l=" + std::to_string(l) +
                      ", lp=" + std::to_string(lp) + ", j=" + std::to_string(j) + ")");
}

SphereGeometry SphereGeometry::spherical(double R, double theta, double phi, double a) {
  SphereGeometry g;
  g.a = a;
  g.separation = {R * std::sin(theta) * std::cos(phi), R * std::sin(theta) * std::sin(phi),
                  R * std::cos(theta)};
  return g;
}

void SphereGeometry::check() const {
  check_radius(a);
  for (double c : separation)
    if (!std::isfinite(c)) throw DomainError("separation components must be finite");
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::overlap: return "overlap";
    case Regime::nonoverlap: return "nonoverlap";
    case Regime::boundary: return "boundary";
  }
  return "unknown";
}

Regime regime_of(double R, double a) {
  if (R > 2.0 * a) return Regime::nonoverlap;
  if (R == 2.0 * a) return Regime::boundary;
  return Regime::overlap;
}

double RadialPolynomial::operator()(double R, double a) const {
  const double rho = R / a;
  double v = 0.0;
  for (int n = static_cast<int>(coefficients.size()) - 1; n >= 0; --n)
    v = v * rho + coefficients[n];
  return scale * v;
}

Complex minus_i_pow(int n) {
  static const Complex table[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
  return table[((n % 4) + 4) % 4];
}

double mu_coefficient(const ReducedIndex& idx) {
  idx.check();
  if (!idx.even_parity()) return 0.0;
  const int l = idx.l, lp = idx.lp, j = idx.j;
  const double phase = minus_i_pow(-l + lp + j).real() * ((j % 2) ? -1.0 : 1.0);
  return 2.0 / kPi * phase * (2 * j + 1) * std::sqrt((2.0 * l + 1) * (2.0 * lp + 1)) *
         wigner_3j(l, lp, j, 0, 0, 0);
}

double triple_bessel_nonoverlap(const ReducedIndex& idx, double R, double a) {
  idx.check();
  check_radius(a);
  check_separation(R);
  if (R < 2.0 * a)
    throw RegimeError("non-overlap integral needs R >= 2a (R=" + std::to_string(R) +
                      ", a=" + std::to_string(a) + ")");
  if (idx.j != idx.l + idx.lp) return 0.0;
  const int s = idx.l + idx.lp;
  const double lg = std::lgamma(0.5 + s) - std::lgamma(1.5 + idx.l) - std::lgamma(1.5 + idx.lp);
  return std::pow(kPi, 1.5) / (8.0 * a) * std::pow(a / R, s + 1) * std::exp(lg);
}

OverlapIntegral triple_bessel_overlap_laurent(const ReducedIndex& idx, double R, double a,
                                              const OverlapOptions& opts) {
  idx.check();
  check_radius(a);
  check_separation(R);
  if (R > 2.0 * a * (1.0 + 1e-14))
    throw RegimeError("overlap integral needs R <= 2a (R=" + std::to_string(R) +
                      ", a=" + std::to_string(a) + ")");
  const double rho = std::min(R / a, 2.0);
  const double pref = std::pow(kPi / 2.0, 1.5) / a;

  if (rho == 0.0 && idx.j > 0) {
    OverlapIntegral z;
    z.laurent = LaurentValue::zero(opts.window);
    z.window = opts.window;
    return z;
  }

  LaurentWindow w = opts.window;
  int kmax = opts.kmax > 0 ? opts.kmax : idx.l + idx.lp + idx.j + 8;
  for (int widen = 0;; ++widen) {
    try {
      for (;;) {
        try {
          OverlapIntegral r = overlap_once(idx, rho, w, kmax);
          if (r.residue > opts.residue_tol)
            throw PoleResidueError("poles failed to cancel for (l,lp,j)=(" +
                                   std::to_string(idx.l) + "," + std::to_string(idx.lp) + "," +
                                   std::to_string(idx.j) + "): relative residue " +
                                   std::to_string(r.residue));
          r.value *= pref;
          return r;
        } catch (const NonConvergence&) {
          if (kmax >= opts.kmax_cap) throw;
          kmax = std::min(2 * kmax, opts.kmax_cap);
        }
      }
    } catch (const WindowOverflow&) {
      if (widen >= 3) throw;
      w = w.widened();
    }
  }
}

double triple_bessel_overlap(const ReducedIndex& idx, double R, double a) {
  return triple_bessel_overlap_laurent(idx, R, a).value;
}

ReducedElement g_reduced(const ReducedIndex& idx, double R, double a) {
  idx.check();
  check_radius(a);
  check_separation(R);
  ReducedElement e;
  e.index = idx;
  e.R = R;
  e.a = a;
  e.regime = regime_of(R, a);
  if (!idx.even_parity()) return e;
  const double mu = mu_coefficient(idx);
  const double integral = e.regime == Regime::overlap ? triple_bessel_overlap(idx, R, a)
                                                      : triple_bessel_nonoverlap(idx, R, a);
  e.value = mu * std::pow(a, idx.l + idx.lp + 2) * integral;
  return e;
}

RadialPolynomial overlap_polynomial(const ReducedIndex& idx, double a) {
  idx.check();
  check_radius(a);
  if (!idx.even_parity())
    throw DomainError("overlap_polynomial needs l+lp+j even (got " +
                      std::to_string(idx.l + idx.lp + idx.j) + ")");
  const int n = idx.l + idx.lp + 4;
  const double scale = check_polynomial_scale(idx, a);

  // Chebyshev nodes t in (-1, 1), R = a (1 + t).
  std::vector<double> t(n), f(n);
  for (int i = 0; i < n; ++i) {
    t[i] = std::cos(kPi * (i + 0.5) / n);
    f[i] = g_reduced(idx, a * (1.0 + t[i]), a).value / scale;
  }
  std::vector<double> cheb(n, 0.0);
  for (int k = 0; k < n; ++k) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += f[i] * std::cos(k * kPi * (i + 0.5) / n);
    cheb[k] = (k == 0 ? 1.0 : 2.0) * s / n;
  }
  double cmax = 0.0;
  for (double c : cheb) cmax = std::max(cmax, std::abs(c));

  RadialPolynomial poly;
  poly.scale = scale;
  int degree = -1;
  for (int k = 0; k < n; ++k)
    if (std::abs(cheb[k]) > 1e-10 * cmax) degree = k;
  if (degree < 0) {
    poly.degree = -1;
    return poly;
  }

  // Chebyshev -> monomials in t, then t = rho - 1.
  std::vector<double> mono_t(degree + 1, 0.0);
  std::vector<double> tkm1(degree + 1, 0.0), tk(degree + 1, 0.0);
  tkm1[0] = 1.0;
  if (degree >= 1) tk[1] = 1.0;
  for (int k = 0; k <= degree; ++k) {
    const std::vector<double>& basis = k == 0 ? tkm1 : tk;
    for (int p = 0; p <= degree; ++p) mono_t[p] += cheb[k] * basis[p];
    if (k >= 1 && k < degree) {
      std::vector<double> next(degree + 1, 0.0);
      for (int p = 0; p < degree; ++p) next[p + 1] += 2.0 * tk[p];
      for (int p = 0; p <= degree; ++p) next[p] -= tkm1[p];
      tkm1 = tk;
      tk = next;
    }
  }
  std::vector<double> mono(degree + 1, 0.0);
  for (int p = 0; p <= degree; ++p) {
    // (rho - 1)^p
    double binom = 1.0;
    for (int q = 0; q <= p; ++q) {
      mono[q] += mono_t[p] * binom * (((p - q) % 2) ? -1.0 : 1.0);
      binom = binom * (p - q) / (q + 1);
    }
  }
  poly.degree = degree;
  poly.coefficients = std::move(mono);

  // Residual check at points between and outside the fit nodes.
  double fmax = 0.0;
  for (double v : f) fmax = std::max(fmax, std::abs(v));
  const int extra = 2 * n + 1;
  for (int i = 0; i <= extra; ++i) {
    const double R = 2.0 * a * i / extra;
    const double exact = g_reduced(idx, R, a).value / scale;
    const double fit = poly(R, a) / scale;
    if (std::abs(exact - fit) > 1e-9 * std::max(fmax, std::abs(exact)))
      throw NotPolynomial("overlap branch of (l,lp,j)=(" + std::to_string(idx.l) + "," +
                          std::to_string(idx.lp) + "," + std::to_string(idx.j) +
                          ") is not a polynomial of degree <= " + std::to_string(n - 1) +
                          " (residual " + std::to_string(std::abs(exact - fit)) + " at R=" +
                          std::to_string(R) + ")");
  }
  return poly;
}

std::map<int, double> j_basis_from_canonical(int l, int lp, const CanonicalBlock& values) {
  MultipoleIndex{l, 0}.check();
  MultipoleIndex{lp, 0}.check();
  double diag = 0.0, off = 0.0;
  for (const auto& [key, v] : values) {
    if (std::abs(key.first) > l || std::abs(key.second) > lp)
      throw DomainError("canonical entry (m,mp)=(" + std::to_string(key.first) + "," +
                        std::to_string(key.second) + ") outside |m|<=l, |mp|<=lp");
    (key.first == key.second ? diag : off) = std::max(key.first == key.second ? diag : off,
                                                      std::abs(v));
  }
  if (off > 1e-10 * diag && off > 0.0)
    throw NotDiagonal("canonical block has off-diagonal magnitude " + std::to_string(off) +
                      " against diagonal " + std::to_string(diag));
  std::map<int, double> g;
  for (int j = std::abs(l - lp); j <= l + lp; ++j) {
    double s = 0.0;
    for (int m = -std::min(l, lp); m <= std::min(l, lp); ++m) {
      auto it = values.find({m, m});
      if (it == values.end()) continue;
      s += ((m % 2) ? -1.0 : 1.0) * wigner_3j(l, lp, j, m, -m, 0) * it->second.real();
    }
    g[j] = (2 * j + 1) * s;
  }
  return g;
}

CanonicalBlock canonical_from_j_basis(int l, int lp, const std::map<int, double>& g) {
  MultipoleIndex{l, 0}.check();
  MultipoleIndex{lp, 0}.check();
  CanonicalBlock out;
  for (int m = -l; m <= l; ++m) {
    for (int mp = -lp; mp <= lp; ++mp) {
      double s = 0.0;
      if (m == mp) {
        for (const auto& [j, v] : g) s += wigner_3j(l, lp, j, m, -m, 0) * v;
        s *= (m % 2) ? -1.0 : 1.0;
      }
      out[{m, mp}] = Complex(s, 0.0);
    }
  }
  return out;
}

Complex matrix_element_zaxis(MultipoleIndex lm, MultipoleIndex lpmp, double R, double a) {
  lm.check();
  lpmp.check();
  check_radius(a);
  check_separation(R);
  if (lm.m != lpmp.m) return {0.0, 0.0};
  double s = 0.0;
  for (int j = std::abs(lm.l - lpmp.l); j <= lm.l + lpmp.l; ++j) {
    const ReducedIndex idx{lm.l, lpmp.l, j};
    if (!idx.even_parity()) continue;
    const double w = wigner_3j(lm.l, lpmp.l, j, lm.m, -lm.m, 0);
    if (w == 0.0) continue;
    s += w * g_reduced(idx, R, a).value;
  }
  return {((lm.m % 2) ? -1.0 : 1.0) * s, 0.0};
}

namespace {

// G_{lm,l'm'} = (-1)^m sum_L g^L sqrt(4pi/(2L+1)) (l l' L; -m m' m-m') conj(Y_{L,m-m'}(R^))
Complex assemble_element(MultipoleIndex lm, MultipoleIndex lpmp, std::span<const Complex> ylm,
                         const std::vector<double>& gL) {
  const int M = lm.m - lpmp.m;
  Complex s{0.0, 0.0};
  for (int L = std::abs(lm.l - lpmp.l); L <= lm.l + lpmp.l; ++L) {
    if ((lm.l + lpmp.l + L) % 2 || std::abs(M) > L) continue;
    const double w = wigner_3j(lm.l, lpmp.l, L, -lm.m, lpmp.m, M);
    if (w == 0.0 || gL[L] == 0.0) continue;
    s += gL[L] * std::sqrt(4.0 * kPi / (2 * L + 1)) * w * std::conj(ylm[packed_index(L, M)]);
  }
  return ((lm.m % 2) ? -1.0 : 1.0) * s;
}

}  // namespace

Complex matrix_element(MultipoleIndex lm, MultipoleIndex lpmp, const SphereGeometry& geom) {
  lm.check();
  lpmp.check();
  geom.check();
  const double R = geom.distance();
  double theta, phi;
  direction_angles(geom.separation, theta, phi);
  const int Lmax = lm.l + lpmp.l;
  std::vector<Complex> ylm((Lmax + 1) * (Lmax + 1));
  spherical_harmonics_all(Lmax, theta, phi, ylm);
  std::vector<double> gL(Lmax + 1, 0.0);
  for (int L = std::abs(lm.l - lpmp.l); L <= Lmax; ++L)
    gL[L] = g_reduced({lm.l, lpmp.l, L}, R, geom.a).value;
  return assemble_element(lm, lpmp, ylm, gL);
}

Complex omega_hat(MultipoleIndex lm, const Vec3& k, double a) {
  lm.check();
  check_radius(a);
  double theta, phi;
  direction_angles(k, theta, phi);
  const double kn = norm(k);
  return 4.0 * kPi * std::pow(a, lm.l + 1) * minus_i_pow(lm.l) * spherical_bessel_j(lm.l, kn * a) *
         spherical_harmonic(lm, theta, phi);
}

Complex fourier_matrix_element(MultipoleIndex lm, MultipoleIndex lpmp, const Vec3& k, double a) {
  lm.check();
  lpmp.check();
  check_radius(a);
  const double kn = norm(k);
  if (kn == 0.0) throw ZeroWaveVector();
  double theta, phi;
  direction_angles(k, theta, phi);
  const double radial = sq(4.0 * kPi) * std::pow(a, lm.l + lpmp.l + 2) *
                        spherical_bessel_j(lm.l, kn * a) * spherical_bessel_j(lpmp.l, kn * a) /
                        sq(kn);
  return radial * minus_i_pow(-lm.l + lpmp.l) * std::conj(spherical_harmonic(lm, theta, phi)) *
         spherical_harmonic(lpmp, theta, phi);
}

Complex g_tilde(const ReducedIndex& idx, double k, double a) {
  idx.check();
  check_radius(a);
  if (!(k > 0.0)) throw ZeroWaveVector();
  if (!idx.even_parity()) return {0.0, 0.0};
  const double radial = 4.0 * kPi * (2 * idx.j + 1) *
                        std::sqrt((2.0 * idx.l + 1) * (2.0 * idx.lp + 1)) *
                        std::pow(a, idx.l + idx.lp + 2) * wigner_3j(idx.l, idx.lp, idx.j, 0, 0, 0) *
                        spherical_bessel_j(idx.l, k * a) * spherical_bessel_j(idx.lp, k * a) /
                        sq(k);
  return radial * minus_i_pow(-idx.l + idx.lp);
}

std::vector<ReducedIndex> admissible_triples(int lmax) {
  if (lmax < 0) throw DomainError("lmax must be >= 0");
  std::vector<ReducedIndex> out;
  for (int l = 0; l <= lmax; ++l)
    for (int lp = 0; lp <= lmax; ++lp)
      for (int j = std::abs(l - lp); j <= l + lp; ++j)
        if ((l + lp + j) % 2 == 0) out.push_back({l, lp, j});
  return out;
}

namespace {

TableRow table_row(const ReducedIndex& idx, double R, double a) {
  const ReducedElement e = g_reduced(idx, R, a);
  return {idx, R, a, e.value, e.regime};
}

void check_table_args(std::span<const double> radii, double a) {
  check_radius(a);
  for (double R : radii) check_separation(R);
  if (!std::is_sorted(radii.begin(), radii.end()))
    throw DomainError("radii must be sorted ascending");
}

}  // namespace

std::vector<TableRow> reduced_table(int lmax, std::span<const double> radii, double a,
                                    int workers) {
  check_table_args(radii, a);
  const auto triples = admissible_triples(lmax);
  const long nr = static_cast<long>(radii.size());
  const long total = static_cast<long>(triples.size()) * nr;
  std::vector<TableRow> rows(total);
  const int threads = workers > 0 ? workers : omp_get_max_threads();

  // Exceptions cannot cross the parallel region; keep the first by row order.
  std::vector<std::exception_ptr> errors(total);
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
  for (long i = 0; i < total; ++i) {
    try {
      rows[i] = table_row(triples[i / nr], radii[i % nr], a);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

std::vector<TableRow> reduced_table_serial(int lmax, std::span<const double> radii, double a) {
  check_table_args(radii, a);
  std::vector<TableRow> rows;
  for (const auto& idx : admissible_triples(lmax))
    for (double R : radii) rows.push_back(table_row(idx, R, a));
  return rows;
}

namespace {

struct BlockPlan {
  int lmax;
  int n;
  std::vector<Complex> ylm;
  std::vector<ReducedIndex> triples;  // every (l, l', L), parity included
};

BlockPlan plan_block(int lmax, const SphereGeometry& geom) {
  if (lmax < 0) throw DomainError("lmax must be >= 0");
  geom.check();
  BlockPlan p;
  p.lmax = lmax;
  p.n = (lmax + 1) * (lmax + 1);
  double theta, phi;
  direction_angles(geom.separation, theta, phi);
  p.ylm.resize((2 * lmax + 1) * (2 * lmax + 1));
  spherical_harmonics_all(2 * lmax, theta, phi, p.ylm);
  for (int l = 0; l <= lmax; ++l)
    for (int lp = 0; lp <= lmax; ++lp)
      for (int L = std::abs(l - lp); L <= l + lp; ++L) p.triples.push_back({l, lp, L});
  return p;
}

// Offset of g^L_{l,l'} inside the flat g array, and length 2 lmax + 1 per pair.
size_t g_slot(int lmax, int l, int lp) { return (static_cast<size_t>(l) * (lmax + 1) + lp); }

void fill_row(const BlockPlan& p, const std::vector<std::vector<double>>& g, int row,
              std::vector<Complex>& out) {
  int l = 0;
  while ((l + 1) * (l + 1) <= row) ++l;
  const MultipoleIndex lm{l, row - l * l - l};
  for (int col = 0; col < p.n; ++col) {
    int lp = 0;
    while ((lp + 1) * (lp + 1) <= col) ++lp;
    const MultipoleIndex lpmp{lp, col - lp * lp - lp};
    out[static_cast<size_t>(row) * p.n + col] =
        assemble_element(lm, lpmp, p.ylm, g[g_slot(p.lmax, l, lp)]);
  }
}

}  // namespace

std::vector<Complex> matrix_block(int lmax, const SphereGeometry& geom, int workers) {
  BlockPlan p = plan_block(lmax, geom);
  const double R = geom.distance();
  const int threads = workers > 0 ? workers : omp_get_max_threads();
  std::vector<std::vector<double>> g((lmax + 1) * (lmax + 1), std::vector<double>(2 * lmax + 1));
  const long nt = static_cast<long>(p.triples.size());
  std::vector<double> gv(nt);
  std::vector<std::exception_ptr> errors(nt);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (long i = 0; i < nt; ++i) {
    try {
      gv[i] = g_reduced(p.triples[i], R, geom.a).value;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (long i = 0; i < nt; ++i)
    g[g_slot(lmax, p.triples[i].l, p.triples[i].lp)][p.triples[i].j] = gv[i];

  std::vector<Complex> out(static_cast<size_t>(p.n) * p.n);
#pragma omp parallel for schedule(static) num_threads(threads)
  for (int row = 0; row < p.n; ++row) fill_row(p, g, row, out);
  return out;
}

std::vector<Complex> matrix_block_serial(int lmax, const SphereGeometry& geom) {
  BlockPlan p = plan_block(lmax, geom);
  const double R = geom.distance();
  std::vector<std::vector<double>> g((lmax + 1) * (lmax + 1), std::vector<double>(2 * lmax + 1));
  for (const auto& t : p.triples) g[g_slot(lmax, t.l, t.lp)][t.j] = g_reduced(t, R, geom.a).value;
  std::vector<Complex> out(static_cast<size_t>(p.n) * p.n);
  for (int row = 0; row < p.n; ++row) fill_row(p, g, row, out);
  return out;
}

}  // namespace mpgreen
