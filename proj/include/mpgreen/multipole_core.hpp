#pragma once

// Closed-form multipole matrix elements of the Laplace Green function 1/(4 pi r)
// between two spheres of equal radius a:
//
//   G_{lm,l'm'}(R) = a^{l+l'+2} / (4 pi) \int dO \int dO'
//                    conj(Y_lm(n)) Y_l'm'(n') / |R + a n - a n'|
//
// with R the separation of the first sphere's center from the second's.
// Rotational symmetry reduces the element to the j-basis functions
// g^j_{l,l'}(R) = mu a^{l+l'+2} \int_0^inf dk j_j(kR) j_l(ka) j_l'(ka), which
// are power laws for R >= 2a and polynomials in R for R <= 2a.

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mpgreen/regularized_series.hpp"
#include "mpgreen/wigner_specfun.hpp"

namespace mpgreen {

// (l, l', j) with |l - l'| <= j <= l + l'.
struct ReducedIndex {
  int l = 0;
  int lp = 0;
  int j = 0;

  bool triangle() const { return l >= 0 && lp >= 0 && j >= std::abs(l - lp) && j <= l + lp; }
  bool even_parity() const { return (l + lp + j) % 2 == 0; }
  // Throws DomainError naming the violated rule.
  void check() const;
  friend bool operator==(const ReducedIndex&, const ReducedIndex&) = default;
};

struct SphereGeometry {
  double a = 1.0;
  Vec3 separation{0.0, 0.0, 0.0};

  static SphereGeometry spherical(double R, double theta, double phi, double a);
  double distance() const { return norm(separation); }
  void check() const;
};

enum class Regime { overlap, nonoverlap, boundary };
std::string to_string(Regime r);
Regime regime_of(double R, double a);

struct ReducedElement {
  ReducedIndex index;
  double R = 0.0;
  double a = 1.0;
  double value = 0.0;
  Regime regime = Regime::overlap;
};

// value(R) = scale * sum_n coefficients[n] (R/a)^n, scale = a^{l+l'+1}.
struct RadialPolynomial {
  int degree = -1;
  std::vector<double> coefficients;
  double scale = 1.0;

  double operator()(double R, double a) const;
};

double mu_coefficient(const ReducedIndex& idx);

// \int_0^inf dk j_j(kR) j_l(ka) j_l'(ka) for R >= 2a.
double triple_bessel_nonoverlap(const ReducedIndex& idx, double R, double a);

struct OverlapOptions {
  LaurentWindow window{};
  int kmax = 0;  // 0: l + l' + j + 8
  int kmax_cap = 512;
  double residue_tol = 1e-8;
};

struct OverlapIntegral {
  LaurentValue laurent;     // dimensionless sum of the three hypergeometric terms
  double value = 0.0;       // the integral, in units of 1/a
  double residue = 0.0;     // largest negative-order coefficient relative to scale
  double scale = 0.0;       // max(|finite part|, sum of the |finite parts| of the terms)
  int terms = 0;            // largest number of series terms used
  LaurentWindow window{};   // window that finally succeeded
};

// The same integral for 0 <= R <= 2a, from the three-term 4F3 representation
// with j regularized to j + eps. Throws PoleResidueError when the poles fail to
// cancel and NonConvergence when the series cap is reached.
OverlapIntegral triple_bessel_overlap_laurent(const ReducedIndex& idx, double R, double a,
                                              const OverlapOptions& opts = {});
double triple_bessel_overlap(const ReducedIndex& idx, double R, double a);

ReducedElement g_reduced(const ReducedIndex& idx, double R, double a);

// Chebyshev fit of the overlap branch, checked against extra samples.
RadialPolynomial overlap_polynomial(const ReducedIndex& idx, double a);

using CanonicalBlock = std::map<std::pair<int, int>, Complex>;

std::map<int, double> j_basis_from_canonical(int l, int lp, const CanonicalBlock& values);
CanonicalBlock canonical_from_j_basis(int l, int lp, const std::map<int, double>& g);

Complex matrix_element_zaxis(MultipoleIndex lm, MultipoleIndex lpmp, double R, double a);
Complex matrix_element(MultipoleIndex lm, MultipoleIndex lpmp, const SphereGeometry& geom);

Complex omega_hat(MultipoleIndex lm, const Vec3& k, double a);
Complex fourier_matrix_element(MultipoleIndex lm, MultipoleIndex lpmp, const Vec3& k, double a);
Complex g_tilde(const ReducedIndex& idx, double k, double a);

// (-i)^n for any integer n.
Complex minus_i_pow(int n);

// --- batch kernels ------------------------------------------------------

// Even-parity (l, l', j) with l, l' <= lmax, ordered by l, l', j.
std::vector<ReducedIndex> admissible_triples(int lmax);

struct TableRow {
  ReducedIndex index;
  double R = 0.0;
  double a = 1.0;
  double value = 0.0;
  Regime regime = Regime::overlap;
};

// g_reduced for every admissible triple and every radius, ordered by
// (l, l', j, R ascending). workers <= 0 uses the OpenMP default.
std::vector<TableRow> reduced_table(int lmax, std::span<const double> radii, double a,
                                    int workers = 0);
// Single-threaded reference of reduced_table; results are bit-identical.
std::vector<TableRow> reduced_table_serial(int lmax, std::span<const double> radii, double a);

// All channels (l,m),(l',m') with l, l' <= lmax, row-major over packed indices.
std::vector<Complex> matrix_block(int lmax, const SphereGeometry& geom, int workers = 0);
std::vector<Complex> matrix_block_serial(int lmax, const SphereGeometry& geom);

}  // namespace mpgreen
