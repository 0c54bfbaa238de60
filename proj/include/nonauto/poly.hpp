#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "nonauto/error.hpp"

namespace nonauto {

using Complex = std::complex<double>;

/// Dense polynomial with complex coefficients stored in ascending power order.
///
/// The represented polynomial is 2^scale_exponent * sum_j coeffs[j] z^j.  The
/// power-of-two scale is 1 for almost every polynomial; it exists so that
/// sequences such as 2^(-n^2) z^n or n^(2^n) z^2 keep well-formed coefficients
/// far beyond the double exponent range.  The leading coefficient is nonzero
/// unless the polynomial is the constant 0.
template <typename Scalar>
class Polynomial {
 public:
  using scalar_type = Scalar;
  using complex_type = std::complex<Scalar>;
  using Coefficients = Eigen::Matrix<complex_type, Eigen::Dynamic, 1>;

  Polynomial() : coeffs_(Coefficients::Zero(1)) {}

  explicit Polynomial(Coefficients coeffs, std::int64_t scale_exponent = 0)
      : coeffs_(std::move(coeffs)), scale_exponent_(scale_exponent) {
    normalize();
  }

  Polynomial(std::initializer_list<complex_type> coeffs)
      : coeffs_(static_cast<Eigen::Index>(coeffs.size())) {
    std::copy(coeffs.begin(), coeffs.end(), coeffs_.data());
    normalize();
  }

  static Polynomial from_vector(const std::vector<complex_type>& coeffs,
                                std::int64_t scale_exponent = 0) {
    Coefficients c(static_cast<Eigen::Index>(coeffs.size()));
    std::copy(coeffs.begin(), coeffs.end(), c.data());
    return Polynomial(std::move(c), scale_exponent);
  }

  static Polynomial constant(complex_type c) { return Polynomial{c}; }

  /// c * z^degree
  static Polynomial monomial(int degree, complex_type c = complex_type(1),
                             std::int64_t scale_exponent = 0) {
    if (degree < 0) throw ValidationError("monomial degree must be nonnegative");
    Coefficients coeffs = Coefficients::Zero(degree + 1);
    coeffs[degree] = c;
    return Polynomial(std::move(coeffs), scale_exponent);
  }

  static Polynomial identity() { return monomial(1); }

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_constant() const { return degree() == 0; }
  bool is_zero() const { return is_constant() && coeffs_[0] == complex_type(0); }

  /// Mantissa coefficients; multiply by 2^scale_exponent() for true values.
  const Coefficients& coeffs() const { return coeffs_; }
  std::int64_t scale_exponent() const { return scale_exponent_; }

  complex_type operator[](int j) const {
    return (j >= 0 && j <= degree()) ? coeffs_[j] : complex_type(0);
  }
  complex_type leading() const { return coeffs_[degree()]; }

  /// True coefficient a_j (may overflow or underflow for large scales).
  complex_type coefficient(int j) const {
    const complex_type c = (*this)[j];
    const auto e = static_cast<int>(std::clamp<std::int64_t>(scale_exponent_, -100000, 100000));
    return {std::ldexp(c.real(), e), std::ldexp(c.imag(), e)};
  }

  /// Natural log of |a_d| including the scale.
  Scalar log_abs_leading() const {
    return std::log(std::abs(leading())) +
           static_cast<Scalar>(scale_exponent_) * static_cast<Scalar>(M_LN2);
  }

  /// max_{j<d} |a_j| / |a_d|, invariant under the common scale.
  Scalar max_coefficient_ratio() const {
    Scalar lead = std::abs(leading());
    Scalar best = 0;
    for (int j = 0; j < degree(); ++j) best = std::max(best, std::abs(coeffs_[j]) / lead);
    return best;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.scale_exponent_ == b.scale_exponent_ && a.coeffs_.size() == b.coeffs_.size() &&
           a.coeffs_ == b.coeffs_;
  }

 private:
  void normalize() {
    if (coeffs_.size() == 0) coeffs_ = Coefficients::Zero(1);
    for (Eigen::Index j = 0; j < coeffs_.size(); ++j) {
      if (!std::isfinite(coeffs_[j].real()) || !std::isfinite(coeffs_[j].imag()))
        throw ValidationError("polynomial coefficient is not finite");
    }
    Eigen::Index n = coeffs_.size();
    while (n > 1 && coeffs_[n - 1] == complex_type(0)) --n;
    if (n != coeffs_.size()) coeffs_.conservativeResize(n);
    if (is_zero()) scale_exponent_ = 0;
  }

  Coefficients coeffs_;
  std::int64_t scale_exponent_ = 0;
};

using Poly = Polynomial<double>;

namespace detail {

template <typename Scalar>
std::complex<Scalar> ldexp(std::complex<Scalar> c, std::int64_t e) {
  const auto k = static_cast<int>(std::clamp<std::int64_t>(e, -100000, 100000));
  return {std::ldexp(c.real(), k), std::ldexp(c.imag(), k)};
}

template <typename Scalar>
bool finite(std::complex<Scalar> c) {
  return std::isfinite(c.real()) && std::isfinite(c.imag());
}

/// Mantissa coefficients with the scale folded in; throws when that overflows.
template <typename Scalar>
typename Polynomial<Scalar>::Coefficients folded(const Polynomial<Scalar>& p) {
  typename Polynomial<Scalar>::Coefficients c = p.coeffs();
  if (p.scale_exponent() == 0) return c;
  for (Eigen::Index j = 0; j < c.size(); ++j) {
    c[j] = ldexp(c[j], p.scale_exponent());
    if (!finite(c[j])) throw MagnitudeOverflow("polynomial scale exceeds double range");
  }
  return c;
}

}  // namespace detail

/// Horner evaluation; nullopt when the result is not finite.
template <typename Scalar>
std::optional<std::complex<Scalar>> try_eval(const Polynomial<Scalar>& p,
                                             std::complex<Scalar> z) {
  const auto& c = p.coeffs();
  std::complex<Scalar> acc = c[p.degree()];
  for (int j = p.degree() - 1; j >= 0; --j) acc = acc * z + c[j];
  if (p.scale_exponent() != 0 && acc != std::complex<Scalar>(0))
    acc = detail::ldexp(acc, p.scale_exponent());
  if (!detail::finite(acc)) return std::nullopt;
  return acc;
}

/// p(z).  Throws MagnitudeOverflow when the value leaves the double range.
template <typename Scalar>
std::complex<Scalar> eval(const Polynomial<Scalar>& p, std::complex<Scalar> z) {
  if (!detail::finite(z)) throw ValidationError("evaluation point is not finite");
  auto v = try_eval(p, z);
  if (!v) throw MagnitudeOverflow("polynomial value overflows double; use eval_scaled");
  return *v;
}

/// sum_j |a_j| |z|^j, the Horner condition numerator.
template <typename Scalar>
Scalar eval_abs(const Polynomial<Scalar>& p, Scalar r) {
  const auto& c = p.coeffs();
  Scalar acc = std::abs(c[p.degree()]);
  for (int j = p.degree() - 1; j >= 0; --j) acc = acc * r + std::abs(c[j]);
  return std::ldexp(acc, static_cast<int>(std::clamp<std::int64_t>(p.scale_exponent(), -100000, 100000)));
}

template <typename Scalar>
Polynomial<Scalar> derivative(const Polynomial<Scalar>& p) {
  if (p.is_constant()) return Polynomial<Scalar>();
  typename Polynomial<Scalar>::Coefficients d(p.degree());
  for (int j = 1; j <= p.degree(); ++j) d[j - 1] = p.coeffs()[j] * static_cast<Scalar>(j);
  return Polynomial<Scalar>(std::move(d), p.scale_exponent());
}

template <typename Scalar>
Polynomial<Scalar> operator*(const Polynomial<Scalar>& p, const Polynomial<Scalar>& q) {
  using Coeffs = typename Polynomial<Scalar>::Coefficients;
  Coeffs out = Coeffs::Zero(p.degree() + q.degree() + 1);
  for (int i = 0; i <= p.degree(); ++i) {
    if (p.coeffs()[i] == std::complex<Scalar>(0)) continue;
    out.segment(i, q.degree() + 1) += p.coeffs()[i] * q.coeffs();
  }
  return Polynomial<Scalar>(std::move(out), p.scale_exponent() + q.scale_exponent());
}

template <typename Scalar>
Polynomial<Scalar> operator+(const Polynomial<Scalar>& p, const Polynomial<Scalar>& q) {
  using Coeffs = typename Polynomial<Scalar>::Coefficients;
  const Coeffs a = detail::folded(p);
  const Coeffs b = detail::folded(q);
  Coeffs out = Coeffs::Zero(std::max(a.size(), b.size()));
  out.head(a.size()) += a;
  out.head(b.size()) += b;
  return Polynomial<Scalar>(std::move(out));
}

template <typename Scalar>
Polynomial<Scalar> operator*(std::complex<Scalar> s, const Polynomial<Scalar>& p) {
  return Polynomial<Scalar>(typename Polynomial<Scalar>::Coefficients(s * p.coeffs()),
                            p.scale_exponent());
}

/// p o q, evaluated as a Horner scheme over polynomials.
template <typename Scalar>
Polynomial<Scalar> compose(const Polynomial<Scalar>& p, const Polynomial<Scalar>& q) {
  using Coeffs = typename Polynomial<Scalar>::Coefficients;
  // p(2^s Q) = sum_j (a_j 2^{s j}) Q^j; fold the inner scale into p's coefficients.
  Coeffs a = p.coeffs();
  if (q.scale_exponent() != 0) {
    for (Eigen::Index j = 0; j < a.size(); ++j) {
      a[j] = detail::ldexp(a[j], q.scale_exponent() * j);
      if (!detail::finite(a[j])) throw MagnitudeOverflow("composition scale exceeds double range");
    }
  }
  const Polynomial<Scalar> inner(q.coeffs());
  Polynomial<Scalar> acc = Polynomial<Scalar>::constant(a[p.degree()]);
  for (int j = p.degree() - 1; j >= 0; --j)
    acc = acc * inner + Polynomial<Scalar>::constant(a[j]);
  return Polynomial<Scalar>(acc.coeffs(), p.scale_exponent());
}

inline constexpr int kChebyshevMaxDegree = 1000;

namespace detail {

inline void check_chebyshev_degree(int n) {
  if (n < 0) throw ValidationError("Chebyshev degree must be nonnegative");
  if (n > kChebyshevMaxDegree)
    throw ValidationError("Chebyshev degree " + std::to_string(n) + " exceeds cap " +
                          std::to_string(kChebyshevMaxDegree));
}

}  // namespace detail

/// Monic minimal polynomial on [-1,1], t_n = 2^{1-n} T_n, from the monic form of
/// T_{n+1} = 2 z T_n - T_{n-1}: t_{k+1} = z t_k - t_{k-1} / 4 with t_0 = 2, t_1 = z.
/// Every step is exact in binary while the coefficients are exact integers / 2^k.
template <typename Scalar = double>
Polynomial<Scalar> chebyshev_minimal(int n) {
  using Coeffs = typename Polynomial<Scalar>::Coefficients;
  if (n < 1) throw ValidationError("minimal Chebyshev polynomial needs degree >= 1");
  detail::check_chebyshev_degree(n);
  Coeffs prev = Coeffs::Zero(n + 1);
  Coeffs cur = Coeffs::Zero(n + 1);
  prev[0] = 2;
  cur[1] = 1;
  for (int k = 1; k < n; ++k) {
    Coeffs next = Scalar(-0.25) * prev;
    next.segment(1, k + 1) += cur.head(k + 1);
    prev = std::move(cur);
    cur = std::move(next);
  }
  return Polynomial<Scalar>(std::move(cur));
}

/// Classical Chebyshev polynomial T_n = 2^{n-1} t_n.  Past degree ~800 the plain
/// coefficients leave the double range and the factor stays in the scale exponent.
template <typename Scalar = double>
Polynomial<Scalar> chebyshev_T(int n) {
  detail::check_chebyshev_degree(n);
  if (n == 0) return Polynomial<Scalar>::constant(1);
  typename Polynomial<Scalar>::Coefficients c = chebyshev_minimal<Scalar>(n).coeffs();
  bool fits = true;
  for (Eigen::Index j = 0; j < c.size() && fits; ++j) {
    c[j] = detail::ldexp(c[j], n - 1);
    fits = detail::finite(c[j]);
  }
  if (fits) return Polynomial<Scalar>(std::move(c));
  return Polynomial<Scalar>(chebyshev_minimal<Scalar>(n).coeffs(), n - 1);
}

/// 1 + max_{j<d} |a_j|/|a_d|: every zero lies in the closed disk of this radius.
template <typename Scalar>
Scalar cauchy_root_bound(const Polynomial<Scalar>& p) {
  if (p.degree() < 1) throw ValidationError("root bound of a constant polynomial");
  return Scalar(1) + p.max_coefficient_ratio();
}

/// Coefficient-wise comparison: |a_j - b_j| <= rel * max(|a_j|,|b_j|) + abs.
template <typename Scalar>
bool approx_equal(const Polynomial<Scalar>& p, const Polynomial<Scalar>& q, Scalar rel = 1e-9,
                  Scalar abs_floor = 1e-12) {
  const auto a = detail::folded(p);
  const auto b = detail::folded(q);
  const Eigen::Index n = std::max(a.size(), b.size());
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto x = j < a.size() ? a[j] : std::complex<Scalar>(0);
    const auto y = j < b.size() ? b[j] : std::complex<Scalar>(0);
    if (std::abs(x - y) > rel * std::max(std::abs(x), std::abs(y)) + abs_floor) return false;
  }
  return true;
}

}  // namespace nonauto
