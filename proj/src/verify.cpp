#include "mpgreen/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "mpgreen/errors.hpp"
#include "mpgreen/multipole_core.hpp"
#include "mpgreen/oracle_quadrature.hpp"

namespace mpgreen {

namespace {

double rel_err(double got, double want, double floor) {
  return std::abs(got - want) / std::max(std::abs(want), floor);
}

double rel_err(Complex got, Complex want, double floor) {
  return std::abs(got - want) / std::max(std::abs(want), floor);
}

double golden_polynomials() {
  double worst = 0.0;
  const double s3 = std::sqrt(3.0);
  for (double a : {1.0, 2.5}) {
    for (int i = 0; i <= 20; ++i) {
      const double R = 2.0 * a * i / 20.0;
      const double g1 = -(R - 2 * a) * (R - 2 * a) * (4 * a + R) / (16 * s3);
      const double p = R * R * R - 4 * a * a * R;
      const double g2 = -7.0 * p * p / (256 * s3);
      worst = std::max(worst, rel_err(g_reduced({1, 1, 0}, R, a).value, g1, 1e-2 * std::pow(a, 4)));
      worst =
          std::max(worst, rel_err(g_reduced({2, 3, 3}, R, a).value, g2, 1e-2 * std::pow(a, 7)));
    }
  }
  return worst;
}

double pole_residues(int lmax) {
  double worst = 0.0;
  for (int l = 0; l <= lmax; ++l)
    for (int lp = 0; lp <= lmax; ++lp)
      for (int j = std::abs(l - lp); j <= l + lp; ++j)
        for (double rho : {0.0, 0.6, 1.3, 1.9})
          worst = std::max(worst, triple_bessel_overlap_laurent({l, lp, j}, rho, 1.0).residue);
  return worst;
}

double hankel_oracle(int lmax) {
  double worst = 0.0;
  for (const auto& idx : admissible_triples(lmax)) {
    const double mu = mu_coefficient(idx);
    for (double rho : {0.3, 1.0, 1.7, 2.5, 6.0}) {
      const double a = 1.0, R = rho * a;
      const double closed = g_reduced(idx, R, a).value;
      const double oracle = mu * std::pow(a, idx.l + idx.lp + 2) * hankel_triple_bessel(idx, R, a);
      worst = std::max(worst, rel_err(oracle, closed, 1e-9 * std::abs(mu)));
    }
  }
  return worst;
}

double surface_oracle(int lmax, std::mt19937_64& rng, int workers) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (double rho : {1.0, 1.9, 3.0}) {
    const double theta = std::acos(2.0 * u(rng) - 1.0), phi = 2.0 * kPi * u(rng);
    const SphereGeometry geom = SphereGeometry::spherical(rho, theta, phi, 1.0);
    const SurfaceQuadrature q = defining_integral_block(lmax, geom, {}, workers);
    const std::vector<Complex> closed = matrix_block(lmax, geom, workers);
    double scale = 0.0;
    for (const auto& c : closed) scale = std::max(scale, std::abs(c));
    for (size_t i = 0; i < closed.size(); ++i)
      worst = std::max(worst, rel_err(q.values[i], closed[i], 1e-6 * scale));
  }
  return worst;
}

double contact_continuity(int lmax) {
  double worst = 0.0;
  for (const auto& idx : admissible_triples(lmax)) {
    const double a = 1.0;
    const double inside = triple_bessel_overlap(idx, 2.0 * a, a);
    const double outside = triple_bessel_nonoverlap(idx, 2.0 * a, a);
    // Channels with j < l + l' vanish at contact; measure them against the
    // j = l + l' value of the same pair.
    const double ref = triple_bessel_nonoverlap({idx.l, idx.lp, idx.l + idx.lp}, 2.0 * a, a);
    worst = std::max(worst, rel_err(inside, outside, std::abs(ref)));
    // Exact zeros demanded outside.
    if (idx.j != idx.l + idx.lp && g_reduced(idx, 3.0, a).value != 0.0) worst = INFINITY;
  }
  for (int l = 0; l <= lmax; ++l)
    for (int lp = 0; lp <= lmax; ++lp)
      for (int j = std::abs(l - lp) + 1; j <= l + lp; j += 2)
        for (double R : {0.0, 0.7, 2.0, 3.5})
          if (g_reduced({l, lp, j}, R, 1.0).value != 0.0) worst = INFINITY;
  return worst;
}

double rotation_covariance(int lmax, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  const int n = (lmax + 1) * (lmax + 1);
  for (double rho : {1.2, 3.0}) {
    const SphereGeometry base = SphereGeometry::spherical(rho, 0.4, 0.9, 1.0);
    const auto g0 = matrix_block(lmax, base);
    for (int trial = 0; trial < 20; ++trial) {
      const EulerAngles q{2.0 * kPi * u(rng), kPi * u(rng), 2.0 * kPi * u(rng)};
      SphereGeometry rot = base;
      rot.separation = mpgreen::apply(rotation_matrix(q), base.separation);
      const auto g1 = matrix_block(lmax, rot);
      for (int l = 0; l <= lmax; ++l)
        for (int m = -l; m <= l; ++m)
          for (int lp = 0; lp <= lmax; ++lp)
            for (int mp = -lp; mp <= lp; ++mp) {
              Complex s{0.0, 0.0};
              for (int m1 = -l; m1 <= l; ++m1)
                for (int m1p = -lp; m1p <= lp; ++m1p)
                  s += wigner_D(l, m, m1, q) * std::conj(wigner_D(lp, mp, m1p, q)) *
                       g0[static_cast<size_t>(packed_index(l, m1)) * n + packed_index(lp, m1p)];
              worst = std::max(
                  worst,
                  std::abs(s - g1[static_cast<size_t>(packed_index(l, m)) * n + packed_index(lp, mp)]));
            }
    }
  }
  return worst;
}

double fourier_consistency() {
  double worst = 0.0;
  for (const ReducedIndex idx : {ReducedIndex{1, 1, 2}, ReducedIndex{2, 2, 4}, ReducedIndex{1, 2, 3}})
    for (double ka : {0.4, 0.7, 1.5}) {
      const Complex fwd =
          hankel_forward(idx, ka, 1.0, [&](double R) { return g_reduced(idx, R, 1.0).value; });
      worst = std::max(worst, rel_err(fwd, g_tilde(idx, ka, 1.0), 1e-12));
    }
  // Along z the Fourier block must be exactly m-diagonal.
  for (int l = 0; l <= 3; ++l)
    for (int m = -l; m <= l; ++m)
      for (int lp = 0; lp <= 3; ++lp)
        for (int mp = -lp; mp <= lp; ++mp)
          if (m != mp && fourier_matrix_element({l, m}, {lp, mp}, {0.0, 0.0, 0.8}, 1.0) != 0.0)
            worst = INFINITY;
  return worst;
}

double exchange_symmetry(int lmax) {
  double worst = 0.0;
  for (const auto& idx : admissible_triples(lmax))
    for (double R : {0.5, 1.5, 2.0, 4.0}) {
      const double a = g_reduced(idx, R, 1.0).value;
      const double b = g_reduced({idx.lp, idx.l, idx.j}, R, 1.0).value;
      worst = std::max(worst, rel_err(a, ((idx.l + idx.lp) % 2 ? -1.0 : 1.0) * b, 1e-14));
    }
  return worst;
}

double basis_round_trip(int lmax, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int l = 0; l <= lmax; ++l)
    for (int lp = 0; lp <= lmax; ++lp) {
      std::map<int, double> g;
      for (int j = std::abs(l - lp); j <= l + lp; ++j) g[j] = u(rng);
      const auto back = j_basis_from_canonical(l, lp, canonical_from_j_basis(l, lp, g));
      for (const auto& [j, v] : g) worst = std::max(worst, std::abs(back.at(j) - v));
    }
  return worst;
}

double kernel_symmetry(int lmax, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  const int n = (lmax + 1) * (lmax + 1);
  for (double rho : {0.8, 2.6}) {
    const SphereGeometry g = SphereGeometry::spherical(rho, kPi * u(rng), 2 * kPi * u(rng), 1.0);
    SphereGeometry h = g;
    for (auto& c : h.separation) c = -c;
    const auto A = matrix_block(lmax, g), B = matrix_block(lmax, h);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        worst = std::max(worst, std::abs(A[static_cast<size_t>(r) * n + c] -
                                         std::conj(B[static_cast<size_t>(c) * n + r])));
  }
  return worst;
}

}  // namespace

bool VerifyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string VerifyReport::first_failure() const {
  for (const auto& c : checks)
    if (!c.passed) return c.name;
  return {};
}

std::string VerifyReport::text() const {
  std::string out;
  char buf[160];
  for (const auto& c : checks) {
    std::snprintf(buf, sizeof buf, "%-22s max_error=%.3e %s\n", c.name.c_str(), c.max_error,
                  c.passed ? "PASS" : "FAIL");
    out += buf;
  }
  if (all_passed())
    out += "all checks passed\n";
  else
    out += "first failing check: " + first_failure() + "\n";
  return out;
}

VerifyReport run_verify(const VerifyOptions& opts) {
  if (opts.lmax < 0 || opts.lmax > 4) throw DomainError("verify supports 0 <= lmax <= 4");
  if (!(opts.tol > 0.0)) throw DomainError("tol must be > 0");
  std::mt19937_64 rng(opts.seed);
  VerifyReport rep;
  auto add = [&](const char* name, double err) {
    rep.checks.push_back({name, err, err <= opts.tol});
  };
  add("golden_polynomials", golden_polynomials());
  add("pole_cancellation", pole_residues(opts.lmax));
  add("contact_continuity", contact_continuity(opts.lmax));
  add("exchange_symmetry", exchange_symmetry(opts.lmax));
  add("basis_round_trip", basis_round_trip(opts.lmax, rng));
  add("kernel_symmetry", kernel_symmetry(opts.lmax, rng));
  add("rotation_covariance", rotation_covariance(std::min(opts.lmax, 3), rng));
  add("hankel_oracle", hankel_oracle(opts.lmax));
  add("fourier_consistency", fourier_consistency());
  add("surface_oracle", surface_oracle(std::min(opts.lmax, 2), rng, opts.workers));
  return rep;
}

}  // namespace mpgreen
