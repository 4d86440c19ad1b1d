#pragma once

// Truncated Laurent series in a regularization parameter eps, and the Gamma,
// Pochhammer and 4F3 evaluations built on them. Parameters that sit exactly on
// a Gamma pole are shifted by slope*eps; products of poles and zeros are then
// carried order by order until they cancel.

#include <array>
#include <vector>

namespace mpgreen {

// Retained range of eps powers.
struct LaurentWindow {
  int min_order = -4;
  int max_order = 2;

  LaurentWindow widened() const { return {2 * min_order, 2 * max_order}; }
};

// sum_p c_p eps^p for low() <= p <= high(). Coefficients above high() are
// unknown (truncated); those below low() are exactly zero. Leading exact zeros
// are stripped, so a nonempty series has coeff(low()) != 0.
class LaurentValue {
 public:
  explicit LaurentValue(LaurentWindow w = {});

  static LaurentValue constant(double c, LaurentWindow w = {});
  // base + slope*eps
  static LaurentValue linear(double base, double slope, LaurentWindow w = {});
  // Exact zero, known up to window.max_order.
  static LaurentValue zero(LaurentWindow w = {});
  // coeffs[i] is the coefficient of eps^(low + i); known up to low + coeffs.size() - 1.
  static LaurentValue from_coefficients(int low, std::vector<double> coeffs,
                                        LaurentWindow w = {});

  int low() const { return low_; }
  int high() const { return high_; }
  const LaurentWindow& window() const { return window_; }
  bool is_zero() const { return coeffs_.empty(); }
  // First order with a nonzero coefficient; high()+1 for an exact zero.
  int leading_order() const { return low_; }

  // Coefficient of eps^p. Zero below low(); throws WindowOverflow above high().
  double coeff(int p) const;
  double finite_part() const { return coeff(0); }

  // Largest |c_p| over p < 0.
  double negative_residue() const;
  // All negative orders below tol * max(|c_0|, scale).
  bool is_finite(double tol, double scale = 0.0) const;

  // Drops everything above order p (p may only lower high()).
  LaurentValue truncated(int p) const;
  LaurentValue scaled(double s) const;
  // Same coefficients under another window; truncates above w.max_order.
  LaurentValue rewindowed(LaurentWindow w) const;

  friend LaurentValue operator+(const LaurentValue& a, const LaurentValue& b);
  friend LaurentValue operator-(const LaurentValue& a, const LaurentValue& b);
  friend LaurentValue operator*(const LaurentValue& a, const LaurentValue& b);
  friend LaurentValue operator/(const LaurentValue& a, const LaurentValue& b);
  LaurentValue operator-() const { return scaled(-1.0); }

  // exp(s) for a series whose lowest order is >= 1 (or exact zero).
  static LaurentValue exp(const LaurentValue& s);

 private:
  LaurentValue(LaurentWindow w, int low, int high, std::vector<double> coeffs);
  void normalize();

  LaurentWindow window_;
  int low_;
  int high_;
  std::vector<double> coeffs_;  // coeffs_[i] is order low_ + i
};

// base + slope*eps.
struct RegularizedArgument {
  double base = 0.0;
  double slope = 0.0;
};

// Nonpositive integer within rounding; such bases are Gamma poles.
bool is_nonpositive_integer(double x);

LaurentValue gamma_laurent(RegularizedArgument arg, LaurentWindow w = {});
// 1/Gamma; exact zero at a pole with zero slope.
LaurentValue rgamma_laurent(RegularizedArgument arg, LaurentWindow w = {});
LaurentValue pochhammer_laurent(RegularizedArgument arg, int k, LaurentWindow w = {});

struct HyperOptions {
  int kmax = 64;
  // Highest eps order of the sum that the caller needs exactly; terms that
  // provably start above it are skipped and the result is truncated there.
  int needed_order = 0;
  double rel_tol = 1e-14;
  LaurentWindow window{};
};

struct HyperResult {
  LaurentValue value;
  bool converged = false;
  int terms = 0;
};

// sum_{k=0}^{kmax} prod (alpha_i)_k / prod (beta_i)_k x^k / k!, |x| <= 1.
HyperResult hyper4f3_regularized(const std::array<RegularizedArgument, 4>& alphas,
                                 const std::array<RegularizedArgument, 3>& betas, double x,
                                 const HyperOptions& opts = {});

}  // namespace mpgreen
