#include "mpgreen/regularized_series.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/polygamma.hpp>

#include "mpgreen/errors.hpp"

namespace mpgreen {

namespace {

LaurentWindow merged(const LaurentWindow& a, const LaurentWindow& b) {
  return {std::min(a.min_order, b.min_order), std::max(a.max_order, b.max_order)};
}

}  // namespace

LaurentValue::LaurentValue(LaurentWindow w)
    : window_(w), low_(w.max_order + 1), high_(w.max_order) {}

LaurentValue::LaurentValue(LaurentWindow w, int low, int high, std::vector<double> coeffs)
    : window_(w), low_(low), high_(high), coeffs_(std::move(coeffs)) {
  normalize();
}

LaurentValue LaurentValue::zero(LaurentWindow w) { return LaurentValue(w); }

LaurentValue LaurentValue::from_coefficients(int low, std::vector<double> coeffs,
                                             LaurentWindow w) {
  const int high = low + static_cast<int>(coeffs.size()) - 1;
  return LaurentValue(w, low, high, std::move(coeffs));
}

LaurentValue LaurentValue::rewindowed(LaurentWindow w) const {
  return LaurentValue(w, low_, high_, coeffs_);
}

LaurentValue LaurentValue::constant(double c, LaurentWindow w) {
  std::vector<double> v(w.max_order + 1, 0.0);
  v[0] = c;
  return LaurentValue(w, 0, w.max_order, std::move(v));
}

LaurentValue LaurentValue::linear(double base, double slope, LaurentWindow w) {
  std::vector<double> v(w.max_order + 1, 0.0);
  v[0] = base;
  if (w.max_order >= 1) v[1] = slope;
  return LaurentValue(w, 0, w.max_order, std::move(v));
}

void LaurentValue::normalize() {
  if (high_ > window_.max_order) {
    const int drop = high_ - window_.max_order;
    high_ = window_.max_order;
    const int keep = std::max(0, static_cast<int>(coeffs_.size()) - drop);
    coeffs_.resize(keep);
  }
  size_t first = 0;
  while (first < coeffs_.size() && coeffs_[first] == 0.0) ++first;
  if (first > 0) {
    coeffs_.erase(coeffs_.begin(), coeffs_.begin() + static_cast<long>(first));
    low_ += static_cast<int>(first);
  }
  if (coeffs_.empty()) {
    low_ = high_ + 1;
    return;
  }
  if (low_ < window_.min_order)
    throw WindowOverflow("pole of order " + std::to_string(-low_) +
                         " exceeds the Laurent window (min order " +
                         std::to_string(window_.min_order) + ")");
}

double LaurentValue::coeff(int p) const {
  if (p > high_)
    throw WindowOverflow("coefficient of order " + std::to_string(p) +
                         " is not retained (series known up to order " +
                         std::to_string(high_) + ")");
  if (p < low_) return 0.0;
  return coeffs_[p - low_];
}

double LaurentValue::negative_residue() const {
  double r = 0.0;
  for (int p = low_; p < 0 && p <= high_; ++p) r = std::max(r, std::abs(coeffs_[p - low_]));
  return r;
}

bool LaurentValue::is_finite(double tol, double scale) const {
  const double ref = std::max(std::abs(high_ >= 0 ? coeff(0) : 0.0), scale);
  return negative_residue() <= tol * ref;
}

LaurentValue LaurentValue::truncated(int p) const {
  if (p >= high_) return *this;
  std::vector<double> v;
  for (int q = low_; q <= p; ++q) v.push_back(coeffs_[q - low_]);
  if (v.empty()) {
    LaurentValue z(window_);
    z.high_ = p;
    z.low_ = p + 1;
    return z;
  }
  return LaurentValue(window_, low_, p, std::move(v));
}

LaurentValue LaurentValue::scaled(double s) const {
  std::vector<double> v(coeffs_);
  for (auto& c : v) c *= s;
  return LaurentValue(window_, low_, high_, std::move(v));
}

LaurentValue operator+(const LaurentValue& a, const LaurentValue& b) {
  const LaurentWindow w = merged(a.window_, b.window_);
  const int lo = std::min(a.low_, b.low_);
  const int hi = std::min(a.high_, b.high_);
  if (lo > hi) {
    LaurentValue z(w);
    z.high_ = hi;
    z.low_ = hi + 1;
    return z;
  }
  std::vector<double> v(hi - lo + 1, 0.0);
  for (int p = lo; p <= hi; ++p) {
    if (p >= a.low_) v[p - lo] += a.coeffs_[p - a.low_];
    if (p >= b.low_) v[p - lo] += b.coeffs_[p - b.low_];
  }
  return LaurentValue(w, lo, hi, std::move(v));
}

LaurentValue operator-(const LaurentValue& a, const LaurentValue& b) { return a + (-b); }

LaurentValue operator*(const LaurentValue& a, const LaurentValue& b) {
  const LaurentWindow w = merged(a.window_, b.window_);
  const int lo = a.low_ + b.low_;
  const int hi = std::min({a.high_ + b.low_, b.high_ + a.low_, w.max_order});
  if (lo > hi) {
    LaurentValue z(w);
    z.high_ = hi;
    z.low_ = hi + 1;
    return z;
  }
  std::vector<double> v(hi - lo + 1, 0.0);
  for (int p = lo; p <= hi; ++p) {
    double s = 0.0;
    for (int i = a.low_; i <= std::min(a.high_, p - b.low_); ++i) {
      const int j = p - i;
      if (j > b.high_) continue;
      s += a.coeffs_[i - a.low_] * b.coeffs_[j - b.low_];
    }
    v[p - lo] = s;
  }
  return LaurentValue(w, lo, hi, std::move(v));
}

LaurentValue operator/(const LaurentValue& a, const LaurentValue& b) {
  if (b.is_zero()) throw PoleWithoutRegularizer("division by an exactly vanishing series");
  const LaurentWindow w = merged(a.window_, b.window_);
  const int n = b.high_ - b.low_;
  std::vector<double> r(n + 1, 0.0);
  const double b0 = b.coeffs_[0];
  r[0] = 1.0 / b0;
  for (int k = 1; k <= n; ++k) {
    double s = 0.0;
    for (int i = 1; i <= k; ++i) s += b.coeffs_[i] * r[k - i];
    r[k] = -s / b0;
  }
  // The reciprocal may extend above the window before the product trims it.
  LaurentWindow wide = w;
  wide.max_order = std::max(w.max_order, -b.low_ + n);
  LaurentValue recip(wide, -b.low_, -b.low_ + n, std::move(r));
  LaurentValue out = a * recip;
  out.window_ = w;
  out.normalize();
  return out;
}

LaurentValue LaurentValue::exp(const LaurentValue& s) {
  if (!s.is_zero() && s.low_ < 1)
    throw Error("LaurentValue::exp needs a series without constant or pole part");
  const int hi = std::min(s.high_, s.window_.max_order);
  std::vector<double> e(std::max(hi, 0) + 1, 0.0);
  e[0] = 1.0;
  for (int n = 1; n <= hi; ++n) {
    double acc = 0.0;
    for (int k = 1; k <= n; ++k) acc += k * s.coeff(k) * e[n - k];
    e[n] = acc / n;
  }
  return LaurentValue(s.window_, 0, std::max(hi, 0), std::move(e));
}

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::round(x); }

namespace {

// Gamma(c + slope*eps) for c >= 1, through the polygamma Taylor series of log Gamma.
LaurentValue regular_gamma_series(double c, double slope, LaurentWindow w) {
  const int n = w.max_order;
  std::vector<double> log_coeffs;
  double slope_pow = 1.0, fact = 1.0;
  for (int k = 1; k <= n; ++k) {
    slope_pow *= slope;
    fact *= k;
    const double psi = (k == 1) ? boost::math::digamma(c) : boost::math::polygamma(k - 1, c);
    log_coeffs.push_back(psi * slope_pow / fact);
  }
  LaurentValue log_part = log_coeffs.empty()
                              ? LaurentValue::zero(w)
                              : LaurentValue::from_coefficients(1, std::move(log_coeffs), w);
  return LaurentValue::exp(log_part).scaled(std::tgamma(c));
}

LaurentValue linear_product(double base, double slope, int count, LaurentWindow w) {
  LaurentValue p = LaurentValue::constant(1.0, w);
  for (int i = 0; i < count; ++i) p = p * LaurentValue::linear(base + i, slope, w);
  return p;
}

}  // namespace

LaurentValue gamma_laurent(RegularizedArgument arg, LaurentWindow w) {
  if (is_nonpositive_integer(arg.base)) {
    if (arg.slope == 0.0)
      throw PoleWithoutRegularizer("Gamma evaluated at the pole " + std::to_string(arg.base) +
                                   " without a regularizing slope");
    const int n = static_cast<int>(-arg.base);
    // Gamma(-n + d) = Gamma(1 + d) / (d (d - 1) ... (d - n))
    LaurentWindow ext{w.min_order, w.max_order + 1};
    LaurentValue num = regular_gamma_series(1.0, arg.slope, ext);
    LaurentValue den = linear_product(-static_cast<double>(n), arg.slope, n + 1, ext);
    LaurentValue g = num / den;
    return g.rewindowed(w);
  }
  if (arg.slope == 0.0) return LaurentValue::constant(std::tgamma(arg.base), w);
  const int shift = arg.base < 1.0 ? static_cast<int>(std::ceil(1.0 - arg.base)) : 0;
  LaurentValue g = regular_gamma_series(arg.base + shift, arg.slope, w);
  if (shift > 0) g = g / linear_product(arg.base, arg.slope, shift, w);
  return g;
}

LaurentValue rgamma_laurent(RegularizedArgument arg, LaurentWindow w) {
  if (is_nonpositive_integer(arg.base)) {
    if (arg.slope == 0.0) return LaurentValue::zero(w);
    const int n = static_cast<int>(-arg.base);
    LaurentValue num = linear_product(-static_cast<double>(n), arg.slope, n + 1, w);
    return num / regular_gamma_series(1.0, arg.slope, w);
  }
  return LaurentValue::constant(1.0, w) / gamma_laurent(arg, w);
}

LaurentValue pochhammer_laurent(RegularizedArgument arg, int k, LaurentWindow w) {
  if (k < 0) throw DomainError("Pochhammer index must be >= 0");
  return linear_product(arg.base, arg.slope, k, w);
}

HyperResult hyper4f3_regularized(const std::array<RegularizedArgument, 4>& alphas,
                                 const std::array<RegularizedArgument, 3>& betas, double x,
                                 const HyperOptions& opts) {
  if (std::abs(x) > 1.0) throw DomainError("4F3 argument must satisfy |x| <= 1");
  const LaurentWindow w = opts.window;

  // Last step at which a denominator parameter passes through zero.
  int last_den_zero = -1;
  for (const auto& b : betas) {
    if (is_nonpositive_integer(b.base)) {
      if (b.slope == 0.0)
        throw PoleWithoutRegularizer("4F3 denominator parameter " + std::to_string(b.base) +
                                     " is a nonpositive integer without regularization");
      last_den_zero = std::max(last_den_zero, static_cast<int>(-b.base));
    }
  }

  HyperResult res;
  LaurentValue term = LaurentValue::constant(1.0, w);
  LaurentValue sum = term;
  double recent[3] = {1.0, 1.0, 1.0};

  auto magnitude = [&](const LaurentValue& v) {
    double m = 0.0;
    for (int p = v.low(); p <= std::min(v.high(), opts.needed_order); ++p)
      m = std::max(m, std::abs(v.coeff(p)));
    return m;
  };

  int k = 0;
  for (; k < opts.kmax; ++k) {
    LaurentValue num = LaurentValue::constant(x / (k + 1), w);
    for (const auto& a : alphas) num = num * LaurentValue::linear(a.base + k, a.slope, w);
    LaurentValue den = LaurentValue::constant(1.0, w);
    for (const auto& b : betas) den = den * LaurentValue::linear(b.base + k, b.slope, w);
    term = term * num / den;

    const bool past_poles = k >= last_den_zero;
    if (term.is_zero() && past_poles) {
      res.converged = true;
      break;
    }
    if (past_poles && term.leading_order() > opts.needed_order) {
      res.converged = true;
      break;
    }
    sum = sum + term;

    recent[k % 3] = magnitude(term);
    if (past_poles && k >= 2) {
      const double ref = std::max(magnitude(sum), 1e-300);
      if (std::max({recent[0], recent[1], recent[2]}) < opts.rel_tol * ref) {
        res.converged = true;
        break;
      }
    }
  }
  res.terms = k + 1;
  res.value = sum.truncated(opts.needed_order);
  return res;
}

}  // namespace mpgreen
