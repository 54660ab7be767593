#pragma once

// Truncated power series over a generic coefficient ring. Arithmetic is closed
// at a fixed order K: products discard every term above z^K.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "multicrit/errors.hpp"

namespace multicrit {

using Rational = boost::multiprecision::cpp_rational;

namespace detail {

inline double exact_sqrt(double x) { return std::sqrt(x); }

/// Square root of a rational that is a perfect square; throws otherwise.
inline Rational exact_sqrt(const Rational& x) {
  using boost::multiprecision::cpp_int;
  if (x < 0) throw ConfigError("square root of a negative rational");
  const cpp_int num = boost::multiprecision::numerator(x);
  const cpp_int den = boost::multiprecision::denominator(x);
  const cpp_int rn = boost::multiprecision::sqrt(num);
  const cpp_int rd = boost::multiprecision::sqrt(den);
  if (rn * rn != num || rd * rd != den)
    throw ConfigError("leading coefficient is not a rational square");
  return Rational(rn, rd);
}

template <class T>
struct RationalCast {
  static T apply(const Rational& r) { return T(r); }
};

template <>
struct RationalCast<double> {
  static double apply(const Rational& r) { return r.convert_to<double>(); }
};

}  // namespace detail

template <class T>
class PowerSeries {
public:
  explicit PowerSeries(int order = 0) : coeffs_(static_cast<std::size_t>(order) + 1, T{}) {
    detail::require(order >= 0, "series order must be non-negative");
  }

  PowerSeries(std::vector<T> coeffs, int order) : PowerSeries(order) {
    const std::size_t n = std::min(coeffs.size(), coeffs_.size());
    for (std::size_t k = 0; k < n; ++k) coeffs_[k] = std::move(coeffs[k]);
  }

  static PowerSeries constant(const T& value, int order) {
    PowerSeries s(order);
    s.coeffs_[0] = value;
    return s;
  }

  int order() const { return static_cast<int>(coeffs_.size()) - 1; }
  const T& operator[](int k) const { return coeffs_[static_cast<std::size_t>(k)]; }
  T& operator[](int k) { return coeffs_[static_cast<std::size_t>(k)]; }
  const std::vector<T>& coefficients() const { return coeffs_; }

  PowerSeries& operator+=(const PowerSeries& o) {
    same_order(o);
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] = coeffs_[k] + o.coeffs_[k];
    return *this;
  }
  PowerSeries& operator-=(const PowerSeries& o) {
    same_order(o);
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] = coeffs_[k] - o.coeffs_[k];
    return *this;
  }
  template <class S>
  PowerSeries& scale(const S& s) {
    for (auto& c : coeffs_) c = c * s;
    return *this;
  }

  friend PowerSeries operator+(PowerSeries a, const PowerSeries& b) { return a += b; }
  friend PowerSeries operator-(PowerSeries a, const PowerSeries& b) { return a -= b; }
  friend PowerSeries operator-(PowerSeries a) {
    for (auto& c : a.coeffs_) c = T{} - c;
    return a;
  }

  friend PowerSeries operator*(const PowerSeries& a, const PowerSeries& b) {
    a.same_order(b);
    const int K = a.order();
    PowerSeries out(K);
    for (int i = 0; i <= K; ++i)
      for (int j = 0; i + j <= K; ++j) out[i + j] = out[i + j] + a[i] * b[j];
    return out;
  }

  /// Exact derivative; the result has order K-1.
  PowerSeries derivative() const {
    const int K = std::max(order() - 1, 0);
    PowerSeries out(K);
    for (int k = 1; k <= order(); ++k) out[k - 1] = coeffs_[static_cast<std::size_t>(k)] * T(k);
    return out;
  }

  /// Keeps only even (parity = 0) or odd (parity = 1) powers.
  PowerSeries part(int parity) const {
    PowerSeries out(order());
    for (int k = parity; k <= order(); k += 2) out[k] = coeffs_[static_cast<std::size_t>(k)];
    return out;
  }

  template <class X>
  X evaluate(const X& x) const {
    X acc = X(coeffs_.back());
    for (std::size_t k = coeffs_.size() - 1; k-- > 0;) acc = acc * x + X(coeffs_[k]);
    return acc;
  }

private:
  void same_order(const PowerSeries& o) const {
    detail::require(o.order() == order(), "series orders differ");
  }

  std::vector<T> coeffs_;
};

/// Number of Newton sweeps that doubles precision past order K.
inline int newton_sweeps(int order) {
  int sweeps = 1;
  for (int precision = 1; precision <= order; precision *= 2) ++sweeps;
  return sweeps;
}

/// 1/s by Newton iteration r <- r (2 - s r); requires s[0] != 0.
template <class T>
PowerSeries<T> reciprocal(const PowerSeries<T>& s) {
  detail::require(s[0] != T{}, "reciprocal of a series with zero constant term");
  const int K = s.order();
  auto r = PowerSeries<T>::constant(T(1) / s[0], K);
  const auto two = PowerSeries<T>::constant(T(2), K);
  for (int it = 0; it < newton_sweeps(K); ++it) r = r * (two - s * r);
  return r;
}

/// sqrt(s) by Newton iteration q <- (q + s/q)/2; requires s[0] > 0.
template <class T>
PowerSeries<T> sqrt(const PowerSeries<T>& s) {
  detail::require(s[0] > T{}, "series square root needs a positive constant term");
  const int K = s.order();
  auto q = PowerSeries<T>::constant(detail::exact_sqrt(s[0]), K);
  const T half = T(1) / T(2);
  for (int it = 0; it < newton_sweeps(K); ++it) {
    q = q + s * reciprocal(q);
    q.scale(half);
  }
  return q;
}

/// Binomial coefficient C(1/2, k) as a rational.
inline Rational half_binomial(int k) {
  Rational c = 1;
  for (int i = 0; i < k; ++i) c = c * (Rational(1, 2) - i) / (i + 1);
  return c;
}

/// sqrt(1 + x) via the binomial series; x must have zero constant term. Works
/// over any ring that can be scaled by rationals (used for exact arithmetic).
template <class T>
PowerSeries<T> sqrt1p(const PowerSeries<T>& x) {
  detail::require(x[0] == T{}, "sqrt1p needs a series without constant term");
  const int K = x.order();
  PowerSeries<T> out(K);
  auto power = PowerSeries<T>::constant(T(1), K);
  for (int k = 0; k <= K; ++k) {
    auto term = power;
    term.scale(detail::RationalCast<T>::apply(half_binomial(k)));
    out += term;
    power = power * x;
  }
  return out;
}

}  // namespace multicrit
