#include <doctest.h>

#include <cmath>
#include <random>

#include "mpgreen/errors.hpp"
#include "mpgreen/regularized_series.hpp"

using namespace mpgreen;

namespace {

void check_coeffs(const LaurentValue& v, int low, std::initializer_list<double> want, double tol) {
  int p = low;
  for (double w : want) {
    CAPTURE(p);
    CHECK(std::abs(v.coeff(p) - w) <= tol * std::max(1.0, std::abs(w)));
    ++p;
  }
}

LaurentValue random_series(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_int_distribution<int> lo(-1, 1);
  const int low = lo(rng);
  std::vector<double> c(static_cast<size_t>(2 - low + 1));
  for (auto& x : c) x = u(rng);
  return LaurentValue::from_coefficients(low, c);
}

}  // namespace

TEST_CASE("Gamma Laurent expansion at poles") {
  // Reference coefficients computed to 25 digits in extended precision.
  const LaurentWindow wide{-4, 4};
  check_coeffs(gamma_laurent({-2.0, 1.0}, wide), -1,
               {0.5, 0.4613921675492335696967, 0.9366162489878366322428, 0.7204887516666950190076},
               1e-13);
  check_coeffs(gamma_laurent({-1.0, 1.0}, wide), -1,
               {-1.0, -0.4227843350984671393935, -1.411840330426439694789,
                -0.5043612543455534057723},
               1e-13);
  // Slope rescales eps.
  check_coeffs(gamma_laurent({-1.0, 2.0}), -1, {-0.5, -0.4227843350984671393935}, 1e-13);
  CHECK(gamma_laurent({-1.0, 1.0}).leading_order() == -1);
}

TEST_CASE("Gamma Taylor expansion at a regular point") {
  check_coeffs(gamma_laurent({0.5, 1.0}), 0,
               {1.7724538509055160273, -3.4802309069132620269, 7.7900887212031263903}, 1e-13);
  CHECK(gamma_laurent({4.0, 0.0}).finite_part() == doctest::Approx(6.0));
}

TEST_CASE("Gamma pole without regularizer is an error") {
  CHECK_THROWS_AS(gamma_laurent({-3.0, 0.0}), PoleWithoutRegularizer);
  CHECK_THROWS_AS(gamma_laurent({0.0, 0.0}), PoleWithoutRegularizer);
  CHECK(rgamma_laurent({-3.0, 0.0}).is_zero());
}

TEST_CASE("reciprocal Gamma is exact zero plus linear term at a pole") {
  const auto r = rgamma_laurent({-2.0, 1.0});
  CHECK(r.leading_order() == 1);
  CHECK(r.coeff(1) == doctest::Approx(2.0));
}

TEST_CASE("Pochhammer symbols") {
  CHECK(pochhammer_laurent({1.0, 0.0}, 4).finite_part() == doctest::Approx(24.0));
  const auto p = pochhammer_laurent({-1.0, 1.0}, 2);  // (-1+e) e
  CHECK(p.leading_order() == 1);
  CHECK(p.coeff(1) == doctest::Approx(-1.0));
  CHECK(p.coeff(2) == doctest::Approx(1.0));
  CHECK(pochhammer_laurent({2.5, 0.0}, 2).finite_part() == doctest::Approx(8.75));
  CHECK(pochhammer_laurent({7.3, 0.0}, 0).finite_part() == 1.0);
  CHECK_THROWS_AS(pochhammer_laurent({1.0, 0.0}, -1), DomainError);
}

TEST_CASE("4F3 with cancelling parameters reduces to a geometric series") {
  const auto r = hyper4f3_regularized({{{1.0, 0.0}, {2.2, 0.0}, {3.1, 0.0}, {0.4, 0.0}}},
                                      {{{2.2, 0.0}, {3.1, 0.0}, {0.4, 0.0}}}, 0.5,
                                      {.kmax = 200});
  CHECK(r.converged);
  CHECK(r.value.finite_part() == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("4F3 terminating series") {
  // A regularized -1 numerator stops the series after k = 1 at order 0.
  const auto r = hyper4f3_regularized({{{-1.0, 1.0}, {2.0, 0.0}, {3.0, 0.0}, {0.5, 0.0}}},
                                      {{{1.5, 0.0}, {2.5, 0.0}, {4.0, 0.0}}}, 0.3);
  CHECK(r.value.finite_part() == doctest::Approx(0.94).epsilon(1e-14));
  CHECK_THROWS_AS(hyper4f3_regularized({{{1.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}}},
                                       {{{1.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}}}, 1.5),
                  DomainError);
}

TEST_CASE("window limits") {
  CHECK_THROWS_AS(LaurentValue::from_coefficients(-5, {1.0}), WindowOverflow);
  CHECK_THROWS_AS(LaurentValue::constant(1.0).coeff(3), WindowOverflow);
  const auto w = LaurentWindow{}.widened();
  CHECK(w.min_order == -8);
  CHECK(w.max_order == 4);
  CHECK_NOTHROW(LaurentValue::from_coefficients(-5, {1.0}, w));
  CHECK_THROWS_AS(LaurentValue::constant(1.0) / LaurentValue::zero(), PoleWithoutRegularizer);
}

TEST_CASE("Laurent arithmetic is commutative and associative") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_series(rng), b = random_series(rng), c = random_series(rng);
    const auto ab = a * b, ba = b * a;
    const auto l = (a * b) * c, r = a * (b * c);
    const auto s1 = (a + b) + c, s2 = a + (b + c);
    CHECK(ab.high() == ba.high());
    for (int p = -4; p <= ab.high(); ++p) CHECK(ab.coeff(p) == doctest::Approx(ba.coeff(p)));
    for (int p = -4; p <= std::min(l.high(), r.high()); ++p) CHECK(l.coeff(p) == doctest::Approx(r.coeff(p)).epsilon(1e-12));
    for (int p = -4; p <= s1.high(); ++p) CHECK(s1.coeff(p) == doctest::Approx(s2.coeff(p)).epsilon(1e-12));
    if (!b.is_zero()) {
      const auto back = (a / b) * b;
      for (int p = a.low(); p <= std::min(back.high(), a.high()); ++p)
        CHECK(back.coeff(p) == doctest::Approx(a.coeff(p)).epsilon(1e-9));
    }
  }
}

TEST_CASE("Gamma series agrees with tgamma near regular points") {
  for (double x : {0.3, 1.7, 2.5, 5.25, -0.5, -2.7}) {
    const auto g = gamma_laurent({x, 1.0});
    const double e = 1e-5;
    double s = 0.0;
    for (int p = 0; p <= g.high(); ++p) s += g.coeff(p) * std::pow(e, p);
    CAPTURE(x);
    CHECK(g.finite_part() == doctest::Approx(std::tgamma(x)).epsilon(1e-13));
    CHECK(s == doctest::Approx(std::tgamma(x + e)).epsilon(1e-11));
  }
}

TEST_CASE("reflection identity Gamma(z) Gamma(1-z) = pi / sin(pi z)") {
  for (double z : {0.25, 0.7, 1.3}) {
    const auto lhs = gamma_laurent({z, 1.0}) * gamma_laurent({1.0 - z, -1.0});
    const double pi = 3.14159265358979323846, s = std::sin(pi * z);
    const double f = pi / s, d1 = -pi * pi * std::cos(pi * z) / (s * s);
    CAPTURE(z);
    CHECK(lhs.coeff(0) == doctest::Approx(f).epsilon(1e-13));
    CHECK(lhs.coeff(1) == doctest::Approx(d1).epsilon(1e-12));
  }
}
