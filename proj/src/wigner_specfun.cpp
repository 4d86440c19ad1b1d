#include "mpgreen/wigner_specfun.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <tuple>

#include "mpgreen/errors.hpp"

namespace mpgreen {

void MultipoleIndex::check() const {
  if (l < 0) throw DomainError("multipole order l must be >= 0, got " + std::to_string(l));
  if (m < -l || m > l)
    throw DomainError("azimuthal number must satisfy |m| <= l, got l=" + std::to_string(l) +
                      " m=" + std::to_string(m));
}

double SignedSqrtRational::to_double() const {
  if (sign == 0) return 0.0;
  return sign * std::sqrt(square.convert_to<double>());
}

BigInt factorial_exact(int n) {
  BigInt f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

namespace {

const std::array<double, 171>& factorial_table() {
  static const std::array<double, 171> table = [] {
    std::array<double, 171> t{};
    for (int n = 0; n <= 170; ++n) t[n] = factorial_exact(n).convert_to<double>();
    return t;
  }();
  return table;
}

}  // namespace

double factorial(int n) {
  if (n < 0 || n > 170) throw DomainError("factorial argument out of range");
  return factorial_table()[n];
}

// Ascending series j_l(x) = x^l/(2l+1)!! sum_k (-x^2/2)^k / (k! (2l+3)...(2l+2k+1)).
static double bessel_series(int l, double x) {
  double lead = 1.0;
  for (int i = 1; i <= l; ++i) lead *= x / (2 * i + 1);
  const double y = -0.5 * x * x;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= y / (k * (2.0 * l + 2 * k + 1));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return lead * sum;
}

void spherical_bessel_j_all(int lmax, double x, std::span<double> out) {
  if (lmax < 0) throw DomainError("spherical Bessel order must be >= 0");
  if (x < 0.0) throw DomainError("spherical Bessel argument must be >= 0");
  if (out.size() < static_cast<size_t>(lmax + 1)) throw DomainError("output span too small");
  if (x == 0.0) {
    out[0] = 1.0;
    for (int l = 1; l <= lmax; ++l) out[l] = 0.0;
    return;
  }
  if (x < 1.0) {
    for (int l = 0; l <= lmax; ++l) out[l] = bessel_series(l, x);
    return;
  }
  const double s = std::sin(x), c = std::cos(x);
  const double j0 = s / x;
  const double j1 = s / (x * x) - c / x;
  // Upward recurrence is stable while the order stays below the argument.
  const int up_to = std::min(lmax, static_cast<int>(std::floor(x)));
  out[0] = j0;
  if (lmax >= 1) out[1] = j1;
  for (int l = 1; l < up_to; ++l) out[l + 1] = (2 * l + 1) / x * out[l] - out[l - 1];
  if (up_to >= lmax) return;

  // Miller downward recurrence for the orders above x, normalized against j0/j1.
  const int start = lmax + 20 + static_cast<int>(std::sqrt(40.0 * (lmax + 1)));
  std::vector<double> tmp(start + 2, 0.0);
  tmp[start + 1] = 0.0;
  tmp[start] = 1e-300;
  for (int n = start; n >= 1; --n) {
    tmp[n - 1] = (2 * n + 1) / x * tmp[n] - tmp[n + 1];
    if (std::abs(tmp[n - 1]) > 1e250) {
      for (int k = n - 1; k <= start; ++k) tmp[k] *= 1e-250;
    }
  }
  const double scale = std::abs(j0) > std::abs(j1) ? j0 / tmp[0] : j1 / tmp[1];
  for (int l = up_to + 1; l <= lmax; ++l) out[l] = tmp[l] * scale;
}

double spherical_bessel_j(int l, double x) {
  if (l < 0) throw DomainError("spherical Bessel order must be >= 0");
  if (x < 0.0) throw DomainError("spherical Bessel argument must be >= 0");
  if (x == 0.0) return l == 0 ? 1.0 : 0.0;
  if (x < std::max(0.5 * l, 1.0)) return bessel_series(l, x);
  std::vector<double> all(l + 1);
  spherical_bessel_j_all(l, x, all);
  return all[l];
}

bool wigner_3j_selection(const Wigner3jArgs& a) {
  if (a.l1 < 0 || a.l2 < 0 || a.l3 < 0) return false;
  if (std::abs(a.m1) > a.l1 || std::abs(a.m2) > a.l2 || std::abs(a.m3) > a.l3) return false;
  if (a.m1 + a.m2 + a.m3 != 0) return false;
  if (a.l3 < std::abs(a.l1 - a.l2) || a.l3 > a.l1 + a.l2) return false;
  if (a.m1 == 0 && a.m2 == 0 && a.m3 == 0 && (a.l1 + a.l2 + a.l3) % 2 != 0) return false;
  return true;
}

SignedSqrtRational wigner_3j_exact(const Wigner3jArgs& a) {
  SignedSqrtRational out;
  if (!wigner_3j_selection(a)) return out;
  const auto& [l1, l2, l3, m1, m2, m3] = a;

  const int kmin = std::max({0, l2 - l3 - m1, l1 - l3 + m2});
  const int kmax = std::min({l1 + l2 - l3, l1 - m1, l2 + m2});
  Rational sum = 0;
  for (int k = kmin; k <= kmax; ++k) {
    BigInt den = factorial_exact(k) * factorial_exact(l3 - l2 + k + m1) *
                 factorial_exact(l3 - l1 + k - m2) * factorial_exact(l1 + l2 - l3 - k) *
                 factorial_exact(l1 - k - m1) * factorial_exact(l2 - k + m2);
    Rational term(BigInt(1), den);
    if (k % 2) sum -= term;
    else sum += term;
  }
  if (sum == 0) return out;

  Rational triangle(factorial_exact(l1 + l2 - l3) * factorial_exact(l1 - l2 + l3) *
                        factorial_exact(-l1 + l2 + l3),
                    factorial_exact(l1 + l2 + l3 + 1));
  BigInt mfact = factorial_exact(l1 + m1) * factorial_exact(l1 - m1) * factorial_exact(l2 + m2) *
                 factorial_exact(l2 - m2) * factorial_exact(l3 + m3) * factorial_exact(l3 - m3);

  const int phase = ((l1 - l2 - m3) % 2 == 0) ? 1 : -1;
  out.sign = phase * (sum > 0 ? 1 : -1);
  out.square = sum * sum * triangle * Rational(mfact);
  return out;
}

double wigner_3j(int l1, int l2, int l3, int m1, int m2, int m3) {
  const Wigner3jArgs args{l1, l2, l3, m1, m2, m3};
  if (!wigner_3j_selection(args)) return 0.0;

  using Key = std::tuple<int, int, int, int, int, int>;
  static std::shared_mutex mutex;
  static std::map<Key, double> cache;
  const Key key{l1, l2, l3, m1, m2, m3};
  {
    std::shared_lock lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const double value = wigner_3j_exact(args).to_double();
  std::unique_lock lock(mutex);
  cache.emplace(key, value);
  return value;
}

double wigner_small_d(int l, int m, int mp, double beta) {
  if (l < 0 || std::abs(m) > l || std::abs(mp) > l)
    throw DomainError("wigner_small_d requires |m|, |mp| <= l");
  const double c = std::cos(0.5 * beta), s = std::sin(0.5 * beta);
  const double root = std::sqrt(factorial(l + m) * factorial(l - m) * factorial(l + mp) *
                                factorial(l - mp));
  const int kmin = std::max(0, mp - m);
  const int kmax = std::min(l + mp, l - m);
  double sum = 0.0;
  for (int k = kmin; k <= kmax; ++k) {
    const double den = factorial(l + mp - k) * factorial(k) * factorial(l - k - m) *
                       factorial(k - mp + m);
    const double sign = ((k - mp + m) % 2 == 0) ? 1.0 : -1.0;
    sum += sign / den * std::pow(c, 2 * l - 2 * k + mp - m) * std::pow(s, 2 * k - mp + m);
  }
  return root * sum;
}

Complex wigner_D(int l, int m, int mp, const EulerAngles& angles) {
  const double d = wigner_small_d(l, m, mp, angles.beta);
  return std::polar(d, -m * angles.alpha - mp * angles.gamma);
}

void spherical_harmonics_all(int lmax, double theta, double phi, std::span<Complex> out) {
  if (out.size() < static_cast<size_t>((lmax + 1) * (lmax + 1)))
    throw DomainError("output span too small");
  const double x = std::cos(theta);
  // sin(pi) is not 0 in floating point; keep m != 0 exactly zero on the axis.
  const double sx = std::abs(x) == 1.0 ? 0.0 : std::sin(theta);
  std::vector<double> p(lmax + 1);
  double pmm = std::sqrt(1.0 / (4.0 * kPi));
  for (int m = 0; m <= lmax; ++m) {
    if (m > 0) pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * sx;
    // p[l] holds the normalized P_l^m for fixed m.
    p[m] = pmm;
    if (m + 1 <= lmax) p[m + 1] = x * std::sqrt(2.0 * m + 3.0) * pmm;
    for (int l = m + 2; l <= lmax; ++l) {
      const double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
      const double b = std::sqrt((double(l - 1) * (l - 1) - double(m) * m) /
                                 (4.0 * (l - 1) * (l - 1) - 1.0));
      p[l] = a * (x * p[l - 1] - b * p[l - 2]);
    }
    const Complex phase = std::polar(1.0, m * phi);
    for (int l = m; l <= lmax; ++l) {
      const Complex y = p[l] * phase;
      out[packed_index(l, m)] = y;
      if (m > 0) out[packed_index(l, -m)] = (m % 2 ? -1.0 : 1.0) * std::conj(y);
    }
  }
}

Complex spherical_harmonic(MultipoleIndex idx, double theta, double phi) {
  idx.check();
  std::vector<Complex> all((idx.l + 1) * (idx.l + 1));
  spherical_harmonics_all(idx.l, theta, phi, all);
  return all[packed_index(idx.l, idx.m)];
}

static Mat3 rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  return Mat3{Vec3{c, -s, 0.0}, Vec3{s, c, 0.0}, Vec3{0.0, 0.0, 1.0}};
}

static Mat3 rot_y(double b) {
  const double c = std::cos(b), s = std::sin(b);
  return Mat3{Vec3{c, 0.0, s}, Vec3{0.0, 1.0, 0.0}, Vec3{-s, 0.0, c}};
}

Mat3 matmul(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
  return r;
}

Vec3 apply(const Mat3& q, const Vec3& v) {
  Vec3 r{};
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) r[i] += q[i][k] * v[k];
  return r;
}

Mat3 rotation_matrix(const EulerAngles& e) {
  return matmul(rot_z(e.alpha), matmul(rot_y(e.beta), rot_z(e.gamma)));
}

EulerAngles euler_from_matrix(const Mat3& q) {
  EulerAngles e;
  e.beta = std::acos(std::clamp(q[2][2], -1.0, 1.0));
  if (std::sin(e.beta) > 1e-12) {
    e.alpha = std::atan2(q[1][2], q[0][2]);
    e.gamma = std::atan2(q[2][1], -q[2][0]);
  } else if (q[2][2] > 0) {
    e.alpha = std::atan2(q[1][0], q[0][0]);
  } else {
    e.alpha = std::atan2(-q[1][0], -q[0][0]);
  }
  return e;
}

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

void direction_angles(const Vec3& v, double& theta, double& phi) {
  const double r = norm(v);
  if (r == 0.0) {
    theta = phi = 0.0;
    return;
  }
  theta = std::acos(std::clamp(v[2] / r, -1.0, 1.0));
  phi = (v[0] == 0.0 && v[1] == 0.0) ? 0.0 : std::atan2(v[1], v[0]);
}

}  // namespace mpgreen
