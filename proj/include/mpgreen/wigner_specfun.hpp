#pragma once

// Special functions used throughout the library: exact factorials, spherical
// Bessel functions, Wigner 3-j symbols and rotation matrices, and spherical
// harmonics.
//
// Conventions (Condon-Shortley phase everywhere):
//   Y_lm(theta, phi) = (-1)^m sqrt((2l+1)/4pi (l-m)!/(l+m)!) P_l^m(cos theta) e^{i m phi}
//                      with P_l^m free of the (-1)^m factor.
//   D^l_{m,mp}(alpha, beta, gamma) = e^{-i m alpha} d^l_{m,mp}(beta) e^{-i mp gamma}
//   is the matrix of the active rotation Rz(alpha) Ry(beta) Rz(gamma), so that
//   Y_lm(Q^{-1} r) = sum_mp D^l_{mp,m}(Q) Y_{l mp}(r) and
//   D^l_{m,0}(alpha, beta, 0) = sqrt(4pi/(2l+1)) conj(Y_lm(beta, alpha)).

#include <array>
#include <complex>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace mpgreen {

using Complex = std::complex<double>;
using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline constexpr double kPi = 3.14159265358979323846264338327950288;

// Spherical-harmonic channel (l, m), -l <= m <= l.
struct MultipoleIndex {
  int l = 0;
  int m = 0;

  bool valid() const { return l >= 0 && m >= -l && m <= l; }
  // Throws DomainError naming the violated bound.
  void check() const;
  friend bool operator==(const MultipoleIndex&, const MultipoleIndex&) = default;
};

// Euler angles in radians for the active rotation Rz(alpha) Ry(beta) Rz(gamma).
struct EulerAngles {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

struct Wigner3jArgs {
  int l1, l2, l3;
  int m1, m2, m3;
};

// sign * sqrt(square), with square a non-negative exact rational.
struct SignedSqrtRational {
  int sign = 0;  // -1, 0 or +1
  Rational square = 0;

  double to_double() const;
  bool is_zero() const { return sign == 0; }
};

BigInt factorial_exact(int n);

// n! as a double (exact for n <= 22, correctly rounded table beyond).
double factorial(int n);

// j_l(x) for x >= 0.
double spherical_bessel_j(int l, double x);
// Fills out[0..lmax] with j_0(x)..j_lmax(x); out.size() must be >= lmax+1.
void spherical_bessel_j_all(int lmax, double x, std::span<double> out);

// True when the triple obeys the triangle rule, |mi| <= li and m1+m2+m3 == 0.
bool wigner_3j_selection(const Wigner3jArgs& a);

// Exact Racah sum. Returns exact zero when the selection rules fail.
SignedSqrtRational wigner_3j_exact(const Wigner3jArgs& a);

// Floating rendering of wigner_3j_exact, memoized process-wide. Results are
// bit-identical to wigner_3j_exact(a).to_double().
double wigner_3j(int l1, int l2, int l3, int m1, int m2, int m3);

double wigner_small_d(int l, int m, int mp, double beta);
Complex wigner_D(int l, int m, int mp, const EulerAngles& angles);

Complex spherical_harmonic(MultipoleIndex idx, double theta, double phi);

// All Y_lm for l <= lmax, packed at index l*l + l + m.
void spherical_harmonics_all(int lmax, double theta, double phi, std::span<Complex> out);
inline int packed_index(int l, int m) { return l * l + l + m; }

Mat3 rotation_matrix(const EulerAngles& angles);
EulerAngles euler_from_matrix(const Mat3& q);
Mat3 matmul(const Mat3& a, const Mat3& b);
Vec3 apply(const Mat3& q, const Vec3& v);

double norm(const Vec3& v);
// Polar and azimuthal angle of v; (0, 0) for the zero vector.
void direction_angles(const Vec3& v, double& theta, double& phi);

}  // namespace mpgreen
