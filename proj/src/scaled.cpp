#include "nonauto/scaled.hpp"

#include <cmath>
#include <limits>

namespace nonauto {

namespace {

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) throw MagnitudeOverflow("scaled exponent range exhausted");
  return out;
}

// Beyond this exponent gap the smaller addend is far below one ulp of the larger.
constexpr std::int64_t kNegligibleGap = 2200;

}  // namespace

ScaledComplex::ScaledComplex(Complex value) : mantissa_(value) {
  if (!detail::finite(value)) throw ValidationError("ScaledComplex from a non-finite value");
  normalize();
}

ScaledComplex::ScaledComplex(Complex mantissa, std::int64_t exponent)
    : mantissa_(mantissa), exponent_(exponent) {
  if (!detail::finite(mantissa)) throw ValidationError("ScaledComplex from a non-finite mantissa");
  normalize();
}

void ScaledComplex::normalize() {
  if (mantissa_ == Complex(0)) {
    mantissa_ = Complex(0);
    exponent_ = 0;
    return;
  }
  int e = 0;
  std::frexp(std::abs(mantissa_), &e);
  // |m| = f 2^e with f in [0.5,1); shift so the modulus lands in [1,2).
  const int shift = e - 1;
  if (shift != 0) {
    mantissa_ = {std::ldexp(mantissa_.real(), -shift), std::ldexp(mantissa_.imag(), -shift)};
    exponent_ = checked_add(exponent_, shift);
  }
}

double ScaledComplex::log_abs() const {
  if (is_zero()) return -std::numeric_limits<double>::infinity();
  return std::log(std::abs(mantissa_)) + static_cast<double>(exponent_) * M_LN2;
}

std::optional<Complex> ScaledComplex::to_complex() const {
  if (is_zero()) return Complex(0);
  if (exponent_ > 1023) return std::nullopt;
  auto v = to_complex_saturating();
  if (!detail::finite(v)) return std::nullopt;
  return v;
}

Complex ScaledComplex::to_complex_saturating() const { return detail::ldexp(mantissa_, exponent_); }

ScaledComplex& ScaledComplex::operator*=(const ScaledComplex& rhs) {
  if (is_zero() || rhs.is_zero()) {
    mantissa_ = 0;
    exponent_ = 0;
    return *this;
  }
  mantissa_ *= rhs.mantissa_;
  exponent_ = checked_add(exponent_, rhs.exponent_);
  normalize();
  return *this;
}

ScaledComplex& ScaledComplex::operator+=(const ScaledComplex& rhs) {
  if (rhs.is_zero()) return *this;
  if (is_zero()) return *this = rhs;
  if (exponent_ >= rhs.exponent_) {
    const std::int64_t gap = exponent_ - rhs.exponent_;
    if (gap > kNegligibleGap) return *this;
    mantissa_ += detail::ldexp(rhs.mantissa_, -gap);
  } else {
    const std::int64_t gap = rhs.exponent_ - exponent_;
    if (gap > kNegligibleGap) return *this = rhs;
    mantissa_ = rhs.mantissa_ + detail::ldexp(mantissa_, -gap);
    exponent_ = rhs.exponent_;
  }
  normalize();
  return *this;
}

ScaledComplex& ScaledComplex::scale_by_pow2(std::int64_t k) {
  if (!is_zero()) exponent_ = checked_add(exponent_, k);
  return *this;
}

ScaledComplex eval_scaled(const Poly& p, const ScaledComplex& w) {
  const auto& c = p.coeffs();
  ScaledComplex acc(c[p.degree()]);
  for (int j = p.degree() - 1; j >= 0; --j) {
    acc *= w;
    if (c[j] != Complex(0)) acc += ScaledComplex(c[j]);
  }
  acc.scale_by_pow2(p.scale_exponent());
  return acc;
}

double log_eval_abs(const Poly& p, double log_abs_w) {
  // Horner in log space: acc <- logaddexp(acc + ln|w|, ln|a_j|).
  const auto& c = p.coeffs();
  double acc = std::log(std::abs(c[p.degree()]));
  for (int j = p.degree() - 1; j >= 0; --j) {
    acc += log_abs_w;
    const double a = std::abs(c[j]);
    if (a == 0.0) continue;
    const double la = std::log(a);
    const double hi = std::max(acc, la);
    acc = hi + std::log1p(std::exp(std::min(acc, la) - hi));
  }
  return acc + static_cast<double>(p.scale_exponent()) * M_LN2;
}

}  // namespace nonauto
