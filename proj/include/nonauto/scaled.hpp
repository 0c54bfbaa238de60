#pragma once

#include <complex>
#include <cstdint>
#include <optional>

#include "nonauto/poly.hpp"

namespace nonauto {

/// Complex number mantissa * 2^exponent with |mantissa| in [1,2) (or exactly 0).
///
/// Orbit values w_k = (p_k o ... o p_1)(z) reach moduli like e^{D_k}; the wide
/// exponent keeps them representable long after a double would overflow.
class ScaledComplex {
 public:
  ScaledComplex() = default;
  ScaledComplex(Complex value);  // NOLINT(google-explicit-constructor)
  ScaledComplex(Complex mantissa, std::int64_t exponent);

  const Complex& mantissa() const { return mantissa_; }
  std::int64_t exponent() const { return exponent_; }
  bool is_zero() const { return mantissa_ == Complex(0); }

  /// ln|value|; -inf for zero.
  double log_abs() const;
  /// The value as a double complex, or nullopt when it leaves the finite range.
  std::optional<Complex> to_complex() const;
  /// ldexp of the mantissa; overflows to inf and underflows to 0 silently.
  Complex to_complex_saturating() const;

  ScaledComplex& operator*=(const ScaledComplex& rhs);
  ScaledComplex& operator+=(const ScaledComplex& rhs);
  ScaledComplex& scale_by_pow2(std::int64_t k);

  friend ScaledComplex operator*(ScaledComplex a, const ScaledComplex& b) { return a *= b; }
  friend ScaledComplex operator+(ScaledComplex a, const ScaledComplex& b) { return a += b; }
  friend ScaledComplex operator-(const ScaledComplex& a) {
    return ScaledComplex(-a.mantissa_, a.exponent_);
  }
  friend bool operator==(const ScaledComplex& a, const ScaledComplex& b) {
    return a.mantissa_ == b.mantissa_ && a.exponent_ == b.exponent_;
  }

 private:
  void normalize();

  Complex mantissa_{0.0, 0.0};
  std::int64_t exponent_ = 0;
};

/// p(w) in scaled arithmetic.  Throws MagnitudeOverflow only when the 64-bit
/// exponent itself is exhausted.
ScaledComplex eval_scaled(const Poly& p, const ScaledComplex& w);

/// ln( sum_j |a_j| |w|^j ) given ln|w|; the Horner condition numerator.
double log_eval_abs(const Poly& p, double log_abs_w);

}  // namespace nonauto
