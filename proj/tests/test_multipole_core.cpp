#include <doctest.h>

#include <cmath>
#include <random>

#include "mpgreen/errors.hpp"
#include "mpgreen/multipole_core.hpp"
#include "test_util.hpp"

using namespace mpgreen;

namespace {

const double kSqrt3 = std::sqrt(3.0);

double golden_110(double R, double a) { return -(R - 2 * a) * (R - 2 * a) * (4 * a + R) / (16 * kSqrt3); }

double golden_233(double R, double a) {
  const double p = R * R * R - 4 * a * a * R;
  return -7.0 * p * p / (256 * kSqrt3);
}

size_t at(int lmax, MultipoleIndex r, MultipoleIndex c) {
  const int n = (lmax + 1) * (lmax + 1);
  return static_cast<size_t>(packed_index(r.l, r.m)) * n + packed_index(c.l, c.m);
}

}  // namespace

TEST_CASE("mu coefficient") {
  CHECK(mu_coefficient({1, 1, 0}) == doctest::Approx(-2 * kSqrt3 / kPi).epsilon(1e-15));
  CHECK(mu_coefficient({0, 0, 0}) == doctest::Approx(2 / kPi).epsilon(1e-15));
  CHECK(mu_coefficient({2, 3, 3}) == doctest::Approx(-28 * kSqrt3 / (3 * kPi)).epsilon(1e-14));
  CHECK(mu_coefficient({1, 1, 1}) == 0.0);
  CHECK_THROWS_AS(mu_coefficient({1, 1, 3}), DomainError);
  CHECK_THROWS_AS(mu_coefficient({-1, 1, 0}), DomainError);
}

TEST_CASE("index and geometry validation") {
  CHECK(ReducedIndex{2, 3, 3}.triangle());
  CHECK(!ReducedIndex{2, 3, 6}.triangle());
  CHECK(ReducedIndex{2, 3, 3}.even_parity());
  CHECK_THROWS_AS(g_reduced({1, 1, 0}, -0.1, 1.0), DomainError);
  CHECK_THROWS_AS(g_reduced({1, 1, 0}, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(g_reduced({1, 1, 0}, NAN, 1.0), DomainError);
  CHECK(regime_of(1.0, 1.0) == Regime::overlap);
  CHECK(regime_of(2.0, 1.0) == Regime::boundary);
  CHECK(regime_of(2.5, 1.0) == Regime::nonoverlap);
  CHECK(to_string(Regime::boundary) == "boundary");
}

TEST_CASE("regime guards") {
  CHECK_THROWS_AS(triple_bessel_nonoverlap({1, 1, 2}, 1.5, 1.0), RegimeError);
  CHECK_THROWS_AS(triple_bessel_overlap({1, 1, 2}, 2.5, 1.0), RegimeError);
  CHECK_NOTHROW(triple_bessel_nonoverlap({1, 1, 2}, 2.0, 1.0));
  CHECK_NOTHROW(triple_bessel_overlap({1, 1, 2}, 2.0, 1.0));
}

TEST_CASE("separated spheres: closed form") {
  // g^0_00 = a^2 / R
  CHECK(g_reduced({0, 0, 0}, 3.0, 1.0).value == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(g_reduced({0, 0, 0}, 5.0, 2.0).value == doctest::Approx(4.0 / 5.0).epsilon(1e-15));
  // Channels with j < l + l' vanish identically outside contact.
  CHECK(g_reduced({1, 1, 0}, 3.0, 1.0).value == 0.0);
  CHECK(g_reduced({2, 2, 2}, 7.0, 1.0).value == 0.0);
  // Power law R^{-(l+l'+1)}.
  const double r = g_reduced({1, 1, 2}, 3.0, 1.0).value / g_reduced({1, 1, 2}, 6.0, 1.0).value;
  CHECK(r == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(g_reduced({1, 1, 2}, 3.0, 1.0).regime == Regime::nonoverlap);
}

TEST_CASE("overlapping spheres: reference integrals") {
  // Reference values by direct high-precision integration, a = 1.
  struct Ref {
    ReducedIndex idx;
    double R, value;
  };
  const Ref refs[] = {
      {{1, 3, 2}, 1.3, 0.029249229805702392866},
      {{0, 0, 0}, 1.0, 1.1780972450961724644},
      {{2, 3, 3}, 0.7, 0.01852082077073328905},
      {{2, 2, 4}, 1.9, 0.027595514658745271306},
  };
  for (const auto& r : refs) {
    CAPTURE(r.idx.l);
    CAPTURE(r.idx.lp);
    CAPTURE(r.idx.j);
    const auto o = triple_bessel_overlap_laurent(r.idx, r.R, 1.0);
    CHECK(o.value == doctest::Approx(r.value).epsilon(1e-12));
    CHECK(o.residue < 1e-10);
  }
  CHECK(triple_bessel_overlap({0, 0, 0}, 1.0, 1.0) == doctest::Approx(3 * kPi / 8).epsilon(1e-14));
  // 1/a scaling of the raw integral.
  CHECK(triple_bessel_overlap({1, 3, 2}, 2.6, 2.0) ==
        doctest::Approx(0.029249229805702392866 / 2.0).epsilon(1e-12));
}

TEST_CASE("overlapping spheres: reference polynomials") {
  for (double a : {1.0, 0.5, 3.0})
    for (double rho : {0.0, 0.25, 0.9, 1.5, 1.99, 2.0}) {
      const double R = rho * a;
      CAPTURE(a);
      CAPTURE(rho);
      CHECK(g_reduced({1, 1, 0}, R, a).value ==
            doctest::Approx(golden_110(R, a)).epsilon(1e-12).scale(std::pow(a, 3)));
      CHECK(g_reduced({2, 3, 3}, R, a).value ==
            doctest::Approx(golden_233(R, a)).epsilon(1e-12).scale(std::pow(a, 6)));
    }
  CHECK(g_reduced({1, 1, 0}, 1.0, 1.0).regime == Regime::overlap);
  CHECK(g_reduced({1, 1, 0}, 2.0, 1.0).regime == Regime::boundary);
}

TEST_CASE("overlap polynomial coefficients") {
  const auto p = overlap_polynomial({1, 1, 0}, 1.0);
  REQUIRE(p.degree == 3);
  const double c1[] = {-16, 12, 0, -1};
  for (int n = 0; n <= 3; ++n) CHECK(p.coefficients[n] == doctest::Approx(c1[n] / (16 * kSqrt3)).scale(1.0));

  const auto q = overlap_polynomial({2, 3, 3}, 2.0);
  REQUIRE(q.degree == 6);
  CHECK(q.scale == doctest::Approx(64.0));
  const double c2[] = {0, 0, -112, 0, 56, 0, -7};
  for (int n = 0; n <= 6; ++n)
    CHECK(q.coefficients[n] == doctest::Approx(c2[n] / (256 * kSqrt3)).epsilon(1e-10).scale(1.0));
  CHECK(q(1.3, 2.0) == doctest::Approx(golden_233(1.3, 2.0)).epsilon(1e-10));
  CHECK_THROWS_AS(overlap_polynomial({1, 1, 1}, 1.0), DomainError);
}

TEST_CASE("overlap polynomial degree is l + l' + 1") {
  for (const auto& idx : admissible_triples(3)) {
    CAPTURE(idx.l);
    CAPTURE(idx.lp);
    CAPTURE(idx.j);
    const auto p = overlap_polynomial(idx, 1.0);
    CHECK(p.degree == idx.l + idx.lp + 1);
    // Contact value matches the separated branch.
    CHECK(p(2.0, 1.0) == doctest::Approx(g_reduced(idx, 2.0, 1.0).value).epsilon(1e-9).scale(1e-3));
  }
}

TEST_CASE("parity, continuity and exchange") {
  for (int l = 0; l <= 4; ++l)
    for (int lp = 0; lp <= 4; ++lp)
      for (int j = std::abs(l - lp); j <= l + lp; ++j) {
        const ReducedIndex idx{l, lp, j};
        CAPTURE(l);
        CAPTURE(lp);
        CAPTURE(j);
        if (!idx.even_parity()) {
          for (double R : {0.0, 0.8, 2.0, 3.0}) CHECK(g_reduced(idx, R, 1.0).value == 0.0);
          continue;
        }
        const double lo = g_reduced(idx, 2.0 - 1e-9, 1.0).value;
        const double at2 = g_reduced(idx, 2.0, 1.0).value;
        const double hi = g_reduced(idx, 2.0 + 1e-9, 1.0).value;
        const double scale = std::abs(g_reduced({l, lp, l + lp}, 2.0, 1.0).value);
        CHECK(std::abs(lo - at2) < 1e-7 * scale);
        CHECK(std::abs(hi - at2) < 1e-7 * scale);
        const double sign = ((l + lp) % 2) ? -1.0 : 1.0;
        for (double R : {0.4, 1.6, 2.8})
          CHECK(g_reduced(idx, R, 1.0).value ==
                doctest::Approx(sign * g_reduced({lp, l, j}, R, 1.0).value).epsilon(1e-12).scale(1e-12));
      }
}

TEST_CASE("pole cancellation residues are small") {
  double worst = 0.0;
  for (int l = 0; l <= 5; ++l)
    for (int lp = 0; lp <= 5; ++lp)
      for (int j = std::abs(l - lp); j <= l + lp; j += 2)
        for (double rho : {0.0, 0.5, 1.2, 1.8})
          worst = std::max(worst, triple_bessel_overlap_laurent({l, lp, j}, rho, 1.0).residue);
  CHECK(worst < 1e-10);
}

TEST_CASE("j-basis round trip") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int l = 0; l <= 5; ++l)
    for (int lp = 0; lp <= 5; ++lp) {
      std::map<int, double> g;
      for (int j = std::abs(l - lp); j <= l + lp; ++j) g[j] = u(rng);
      const auto back = j_basis_from_canonical(l, lp, canonical_from_j_basis(l, lp, g));
      for (const auto& [j, v] : g) CHECK(back.at(j) == doctest::Approx(v).epsilon(1e-12).scale(1.0));
    }
  CanonicalBlock bad = canonical_from_j_basis(1, 1, {{0, 1.0}, {1, 0.5}, {2, 0.2}});
  bad[{1, 0}] = Complex(0.3, 0.0);
  CHECK_THROWS_AS(j_basis_from_canonical(1, 1, bad), NotDiagonal);
}

TEST_CASE("z-axis elements") {
  CHECK(matrix_element_zaxis({0, 0}, {0, 0}, 3.0, 1.0).real() == doctest::Approx(1.0 / 3.0));
  CHECK(matrix_element_zaxis({1, 1}, {1, 0}, 1.0, 1.0) == Complex(0.0, 0.0));
  // m = 0 of the (1,1) block: (1 1 0;000) g^0 + (1 1 2;000) g^2
  const double R = 1.1;
  const double want = -1.0 / kSqrt3 * g_reduced({1, 1, 0}, R, 1.0).value +
                      std::sqrt(2.0 / 15.0) * g_reduced({1, 1, 2}, R, 1.0).value;
  CHECK(matrix_element_zaxis({1, 0}, {1, 0}, R, 1.0).real() == doctest::Approx(want).epsilon(1e-14));
  // The m-diagonal z-axis block regenerates the j basis.
  for (double RR : {0.9, 3.3}) {
    CanonicalBlock blk;
    for (int m = -2; m <= 2; ++m)
      for (int mp = -3; mp <= 3; ++mp) blk[{m, mp}] = matrix_element_zaxis({2, m}, {3, mp}, RR, 1.0);
    const auto g = j_basis_from_canonical(2, 3, blk);
    for (int j = 1; j <= 5; ++j)
      CHECK(std::abs(g.at(j) - g_reduced({2, 3, j}, RR, 1.0).value) < 1e-14);
  }
}

TEST_CASE("general orientation reduces to the z-axis result") {
  for (double R : {0.7, 2.0, 4.5})
    for (int l = 0; l <= 3; ++l)
      for (int m = -l; m <= l; ++m)
        for (int lp = 0; lp <= 3; ++lp)
          for (int mp = -lp; mp <= lp; ++mp) {
            const Complex a = matrix_element({l, m}, {lp, mp}, SphereGeometry{1.0, {0.0, 0.0, R}});
            const Complex b = matrix_element_zaxis({l, m}, {lp, mp}, R, 1.0);
            CHECK(std::abs(a - b) < 1e-13);
          }
}

TEST_CASE("isotropic trace") {
  // sum_m G_{lm,lm} only carries the j = 0 channel and so ignores direction.
  for (int l = 0; l <= 3; ++l) {
    Complex ref{0.0, 0.0};
    for (int m = -l; m <= l; ++m) ref += matrix_element_zaxis({l, m}, {l, m}, 1.4, 1.0);
    for (const Vec3 d : {Vec3{1.4, 0.0, 0.0}, Vec3{0.2, -0.9, 1.05}, Vec3{-0.8, 0.8, -0.8}}) {
      const double n = norm(d);
      const SphereGeometry g{1.0, {1.4 * d[0] / n, 1.4 * d[1] / n, 1.4 * d[2] / n}};
      Complex s{0.0, 0.0};
      for (int m = -l; m <= l; ++m) s += matrix_element({l, m}, {l, m}, g);
      CHECK(std::abs(s - ref) < 1e-13);
    }
  }
}

TEST_CASE("Hermitian kernel symmetry G(-R) = G(R)^dagger") {
  const int lmax = 3;
  for (double rho : {0.6, 1.7, 3.2}) {
    const auto g = SphereGeometry::spherical(rho, 1.1, -0.4, 1.0);
    SphereGeometry h = g;
    for (auto& c : h.separation) c = -c;
    const auto A = matrix_block(lmax, g), B = matrix_block(lmax, h);
    for (int l = 0; l <= lmax; ++l)
      for (int m = -l; m <= l; ++m)
        for (int lp = 0; lp <= lmax; ++lp)
          for (int mp = -lp; mp <= lp; ++mp)
            CHECK(std::abs(A[at(lmax, {l, m}, {lp, mp})] - std::conj(B[at(lmax, {lp, mp}, {l, m})])) <
                  1e-13);
  }
}

TEST_CASE("rotation covariance") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int lmax = 3;
  const auto base = SphereGeometry::spherical(1.3, 0.5, 2.0, 1.0);
  const auto g0 = matrix_block(lmax, base);
  for (int trial = 0; trial < 5; ++trial) {
    const EulerAngles q{2 * kPi * u(rng), kPi * u(rng), 2 * kPi * u(rng)};
    SphereGeometry rot = base;
    rot.separation = mpgreen::apply(rotation_matrix(q), base.separation);
    const auto g1 = matrix_block(lmax, rot);
    for (int l = 0; l <= lmax; ++l)
      for (int m = -l; m <= l; ++m)
        for (int lp = 0; lp <= lmax; ++lp)
          for (int mp = -lp; mp <= lp; ++mp) {
            Complex s{0.0, 0.0};
            for (int n = -l; n <= l; ++n)
              for (int np = -lp; np <= lp; ++np)
                s += wigner_D(l, m, n, q) * std::conj(wigner_D(lp, mp, np, q)) *
                     g0[at(lmax, {l, n}, {lp, np})];
            CHECK(std::abs(s - g1[at(lmax, {l, m}, {lp, mp})]) < 1e-12);
          }
  }
}

TEST_CASE("matrix block matches single elements") {
  const auto g = SphereGeometry::spherical(2.4, 0.3, 0.8, 1.0);
  const auto blk = matrix_block(2, g);
  REQUIRE(blk.size() == 81);
  CHECK(blk[at(2, {2, -1}, {1, 1})] == matrix_element({2, -1}, {1, 1}, g));
  CHECK(blk[at(2, {0, 0}, {2, 2})] == matrix_element({0, 0}, {2, 2}, g));
  CHECK_THROWS_AS(matrix_block(-1, g), DomainError);
  CHECK_THROWS_AS(matrix_element({1, 2}, {0, 0}, g), DomainError);
}

TEST_CASE("surface Fourier transform omega_hat") {
  CHECK(omega_hat({0, 0}, {0.0, 0.0, 1e-30}, 1.0).real() == doctest::Approx(std::sqrt(4 * kPi)));
  // Direct quadrature of a^{l+1} \int dO exp(-i a k.n) Y_lm(n).
  const Vec3 k{0.4, -0.7, 1.0};
  const double scale = 1.3 / norm(k);
  const Vec3 ks{k[0] * scale, k[1] * scale, k[2] * scale};
  const double a = 1.0;
  const auto [x, w] = testutil::gauss_legendre(48);
  const int nphi = 96;
  Complex s{0.0, 0.0};
  for (size_t i = 0; i < x.size(); ++i)
    for (int p = 0; p < nphi; ++p) {
      const double th = std::acos(x[i]), ph = 2 * kPi * p / nphi;
      const Vec3 n{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), x[i]};
      const double kd = a * (ks[0] * n[0] + ks[1] * n[1] + ks[2] * n[2]);
      s += w[i] * (2 * kPi / nphi) * std::exp(Complex(0.0, -kd)) * spherical_harmonic({2, 1}, th, ph);
    }
  CHECK(std::abs(omega_hat({2, 1}, ks, a) - s) < 1e-8);
  CHECK_THROWS_AS(omega_hat({2, 3}, ks, a), DomainError);
}

TEST_CASE("Fourier elements") {
  const Vec3 k{0.3, 0.5, -0.6};
  const double kk = norm(k) * norm(k);
  for (int l = 0; l <= 3; ++l)
    for (int m = -l; m <= l; ++m)
      for (int lp = 0; lp <= 3; ++lp)
        for (int mp = -lp; mp <= lp; ++mp) {
          const Complex f = fourier_matrix_element({l, m}, {lp, mp}, k, 1.0);
          const Complex w = std::conj(omega_hat({l, m}, k, 1.0)) * omega_hat({lp, mp}, k, 1.0) / kk;
          CHECK(std::abs(f - w) < 1e-12 * std::max(1.0, std::abs(w)));
        }
  for (int l = 0; l <= 3; ++l)
    for (int m = -l; m <= l; ++m)
      for (int mp = -l; mp <= l; ++mp)
        if (m != mp) CHECK(fourier_matrix_element({l, m}, {l, mp}, {0.0, 0.0, 0.9}, 1.0) == Complex(0.0, 0.0));
  CHECK_THROWS_AS(fourier_matrix_element({0, 0}, {0, 0}, {0.0, 0.0, 0.0}, 1.0), ZeroWaveVector);
  CHECK_THROWS_AS(g_tilde({0, 0, 0}, 0.0, 1.0), ZeroWaveVector);
}

TEST_CASE("g_tilde parity and angular assembly") {
  CHECK(g_tilde({1, 1, 1}, 0.8, 1.0) == Complex(0.0, 0.0));
  CHECK(std::abs(g_tilde({1, 1, 2}, 0.8, 1.0)) > 0.0);
  // F_{lm,l'm'}(k) = (-1)^m sum_L gt^L sqrt(4pi/(2L+1)) (l l' L; -m m' m-m') conj(Y_{L,m-m'}(k^))
  const Vec3 k{-0.5, 0.2, 0.7};
  double th, ph;
  direction_angles(k, th, ph);
  for (int l = 0; l <= 3; ++l)
    for (int m = -l; m <= l; ++m)
      for (int lp = 0; lp <= 3; ++lp)
        for (int mp = -lp; mp <= lp; ++mp) {
          Complex s{0.0, 0.0};
          const int M = m - mp;
          for (int L = std::abs(l - lp); L <= l + lp; ++L) {
            if (std::abs(M) > L) continue;
            s += g_tilde({l, lp, L}, norm(k), 1.0) * std::sqrt(4 * kPi / (2 * L + 1)) *
                 wigner_3j(l, lp, L, -m, mp, M) * std::conj(spherical_harmonic({L, M}, th, ph));
          }
          s *= (m % 2) ? -1.0 : 1.0;
          const Complex f = fourier_matrix_element({l, m}, {lp, mp}, k, 1.0);
          CHECK(std::abs(s - f) < 1e-12 * std::max(1.0, std::abs(f)));
        }
}

TEST_CASE("minus_i_pow") {
  CHECK(minus_i_pow(0) == Complex(1, 0));
  CHECK(minus_i_pow(1) == Complex(0, -1));
  CHECK(minus_i_pow(2) == Complex(-1, 0));
  CHECK(minus_i_pow(-1) == Complex(0, 1));
  CHECK(minus_i_pow(7) == Complex(0, 1));
}

TEST_CASE("admissible triples") {
  const auto t = admissible_triples(1);
  // (0,0,0) (0,1,1) (1,0,1) (1,1,0) (1,1,2)
  REQUIRE(t.size() == 5);
  CHECK(t.front() == ReducedIndex{0, 0, 0});
  CHECK(t.back() == ReducedIndex{1, 1, 2});
  for (const auto& idx : admissible_triples(4)) CHECK(idx.even_parity());
}
