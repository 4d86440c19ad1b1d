#pragma once

// Brute-force evaluators used to check the closed forms. They are slow on
// purpose and share no formulas with multipole_core beyond the special
// functions themselves.

#include <functional>
#include <vector>

#include "mpgreen/multipole_core.hpp"

namespace mpgreen {

struct QuadratureSpec {
  // Gauss-Legendre order per panel and angular resolution of the surface rules.
  int node_count = 32;
  // Hankel cutoff K = k_max / max(R, a); raised automatically when a beat
  // frequency would make the asymptotic tail inaccurate.
  double k_max = 400.0;
  // Maximum number of integration-by-parts terms in the analytic tails.
  int tail_order = 16;
  // Relative accuracy demanded of the surface quadrature; 0 disables the check.
  double rel_tol = 0.0;

  void check() const;
};

struct SurfaceQuadrature {
  int lmax = 0;
  // Row-major over packed (l, m) x (l', m') indices, (lmax+1)^2 square.
  std::vector<Complex> values;
  // max |Q_N - Q_{N/2}| over all channels.
  double error_estimate = 0.0;

  Complex at(MultipoleIndex lm, MultipoleIndex lpmp) const;
};

// Every channel with l, l' <= lmax from the defining double surface integral.
// Parallel over outer nodes with a fixed-order reduction; bit-identical to the
// serial version.
SurfaceQuadrature defining_integral_block(int lmax, const SphereGeometry& geom,
                                          const QuadratureSpec& spec = {}, int workers = 0);
SurfaceQuadrature defining_integral_block_serial(int lmax, const SphereGeometry& geom,
                                                 const QuadratureSpec& spec = {});

// Single channel. Throws SingularConfiguration when spec.rel_tol > 0 and the
// error estimate exceeds it.
Complex defining_integral_quadrature(MultipoleIndex lm, MultipoleIndex lpmp,
                                     const SphereGeometry& geom, const QuadratureSpec& spec = {});

// \int dO' Y_l'm'(n') / |p - a n'| by quadrature over the sphere of radius a
// centered at the origin, for all l' <= lmax (packed).
std::vector<Complex> sphere_potential(int lmax, const Vec3& p, double a, int node_count);

// \int_0^inf dk j_j(kR) j_l(ka) j_l'(ka); the raw integral, parity included.
double hankel_triple_bessel(const ReducedIndex& idx, double R, double a,
                            const QuadratureSpec& spec = {});

// 4 pi (-i)^j \int_0^inf dR R^2 j_j(kR) g(R), with g sampled through the callable.
// g must be smooth on (0, 2a) and (2a, inf) and decay as a power law.
Complex hankel_forward(const ReducedIndex& idx, double k, double a,
                       const std::function<double(double)>& g, const QuadratureSpec& spec = {});

// (1 / 2 pi^2) i^j \int_0^inf dk k^2 j_j(kR) gt(k), truncated at the cutoff;
// throws TailTooLarge when the tail estimate from halving the cutoff exceeds 1e-6 relative
// (relative to the L1 norm of the integrand when that is larger than the result).
double hankel_inverse(const ReducedIndex& idx, double R, double a,
                      const std::function<Complex(double)>& gt, const QuadratureSpec& spec = {});

}  // namespace mpgreen
