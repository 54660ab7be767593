#pragma once

// Mean-field energy functional per qubit (units of Omega) and its Landau normal
// form around z = 0:
//   E(z) = E0 + v (r z^2/2 + sum_j u_j z^(2j+2)/(2j+2) + z^(2M+4)/(2M+4))
// and, to linear order in the symmetry-breaking biases h_j,
//   E_ns(z) = E(z - z0) + v sum_{j=1}^{M+1} w_j (z - z0)^(2j-1)/(2j-1).

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "multicrit/errors.hpp"
#include "multicrit/model.hpp"
#include "multicrit/power_series.hpp"

namespace multicrit {

namespace detail {

inline void require_coupling(const ModelParams& params) {
  params.validate();
  if (!(params.g_tilde > 0.0))
    throw ConfigError("energy functional is degenerate at g_tilde = 0");
}

/// Transverse offsets s = +-eps_j + h_j of the two halves of subset j.
inline double half_offset(const ModelParams& params, std::size_t j, int half) {
  return (half == 0 ? params.bias(j) : -params.bias(j)) + params.field(j);
}

}  // namespace detail

/// E_ns(z): reduces to the symmetric functional when every h_j vanishes.
inline double energy_functional_ns(double z, const ModelParams& params) {
  detail::require_coupling(params);
  double e = z * z / (4.0 * params.g_tilde * params.g_tilde);
  for (std::size_t j = 0; j < params.subsets(); ++j) {
    double s = 0.0;
    for (int half = 0; half < 2; ++half) {
      const double x = z + detail::half_offset(params, j, half);
      s += std::sqrt(x * x + 1.0);
    }
    e -= 0.25 * params.n_fractions[j] * s;
  }
  return e;
}

/// E(z) of the unbiased-by-h model; any h_tilde in params is ignored.
inline double energy_functional(double z, const ModelParams& params) {
  ModelParams symmetric = params;
  symmetric.h_tilde.clear();
  return energy_functional_ns(z, symmetric);
}

/// Analytic derivative d^k E_ns / dz^k for k = 1, 2, 3.
inline double energy_derivative(double z, const ModelParams& params, int k) {
  detail::require_coupling(params);
  detail::require(k >= 1 && k <= 3, "only derivatives of order 1..3 are available");
  const double g2 = params.g_tilde * params.g_tilde;
  double d = (k == 1) ? z / (2.0 * g2) : (k == 2 ? 1.0 / (2.0 * g2) : 0.0);
  for (std::size_t j = 0; j < params.subsets(); ++j) {
    double s = 0.0;
    for (int half = 0; half < 2; ++half) {
      const double x = z + detail::half_offset(params, j, half);
      const double q = x * x + 1.0;
      const double rt = std::sqrt(q);
      if (k == 1) s += x / rt;
      else if (k == 2) s += 1.0 / (q * rt);
      else s += -3.0 * x / (q * q * rt);
    }
    d -= 0.25 * params.n_fractions[j] * s;
  }
  return d;
}

/// 2 g^2 d^2E_ns/dz^2, written so that it stays finite at g = 0.
inline double scaled_curvature(double z, const ModelParams& params) {
  params.validate();
  const double g2 = params.g_tilde * params.g_tilde;
  double s = 0.0;
  for (std::size_t j = 0; j < params.subsets(); ++j) {
    double t = 0.0;
    for (int half = 0; half < 2; ++half) {
      const double x = z + detail::half_offset(params, j, half);
      const double q = x * x + 1.0;
      t += 1.0 / (q * std::sqrt(q));
    }
    s += params.n_fractions[j] * t;
  }
  return 1.0 - 0.5 * g2 * s;
}

namespace detail {

/// Series of sqrt((z + s)^2 + 1) around z = 0.
inline PowerSeries<double> shifted_root_series(double s, int order) {
  PowerSeries<double> inner({1.0 + s * s, 2.0 * s, 1.0}, order);
  return sqrt(inner);
}

}  // namespace detail

/// Taylor series of E_ns around z = 0 truncated at z^order.
inline PowerSeries<double> taylor_expand(const ModelParams& params, int order) {
  detail::require_coupling(params);
  const int M = static_cast<int>(params.subsets());
  detail::require(order >= 2 * M + 4, "Taylor order must be at least 2M+4");
  PowerSeries<double> series(order);
  series[2] = 1.0 / (4.0 * params.g_tilde * params.g_tilde);
  for (std::size_t j = 0; j < params.subsets(); ++j)
    for (int half = 0; half < 2; ++half) {
      auto root = detail::shifted_root_series(detail::half_offset(params, j, half), order);
      root.scale(-0.25 * params.n_fractions[j]);
      series += root;
    }
  return series;
}

/// Series of dE_ns/dh_k at h = 0, i.e. the odd response per unit bias h_k.
inline PowerSeries<double> field_response_series(const ModelParams& params, std::size_t k,
                                                 int order) {
  detail::require_coupling(params);
  detail::require(k < params.subsets(), "subset index out of range");
  // h shifts z inside both roots, so d/dh = d/dz of the h = 0 roots.
  PowerSeries<double> roots(order + 1);
  for (int half = 0; half < 2; ++half) {
    const double s = half == 0 ? params.bias(k) : -params.bias(k);
    roots += detail::shifted_root_series(s, order + 1);
  }
  auto response = roots.derivative();
  response.scale(-0.25 * params.n_fractions[k]);
  return response;
}

struct LandauCoefficients {
  double E0 = 0.0;
  double v = 0.0;
  double r = 0.0;
  std::vector<double> u;
  std::vector<double> w;
  double z0 = 0.0;
  /// dw_j/dh_k, shape (M+1) x M. Filled by landau_coefficients().
  Eigen::MatrixXd w_per_h;
  /// dz0/dh_k.
  Eigen::VectorXd z0_per_h;

  /// False when v <= 0: the (M+2)-order normal form does not apply here.
  bool v_positive() const { return v > 0.0; }

  /// Re-expands the even normal form to a series of the given order.
  PowerSeries<double> even_series(int order) const {
    const int M = static_cast<int>(u.size());
    PowerSeries<double> s(order);
    s[0] = E0;
    if (order >= 2) s[2] = v * r / 2.0;
    for (int j = 1; j <= M && 2 * j + 2 <= order; ++j) s[2 * j + 2] = v * u[j - 1] / (2 * j + 2);
    if (2 * M + 4 <= order) s[2 * M + 4] = v / (2 * M + 4);
    return s;
  }
};

/// Maps series coefficients onto the normal form. Even coefficients fix
/// (E0, v, r, u); odd coefficients are treated as linear response and fix
/// (z0, w) by removing the z^(2M+3) term after the shift z -> z - z0.
inline LandauCoefficients normal_form(const PowerSeries<double>& series, std::size_t subsets) {
  const int M = static_cast<int>(subsets);
  detail::require(M >= 1, "normal form needs M >= 1");
  detail::require(series.order() >= 2 * M + 4, "series order must be at least 2M+4");
  LandauCoefficients lc;
  lc.E0 = series[0];
  lc.v = (2 * M + 4) * series[2 * M + 4];
  lc.r = 2.0 * series[2] / lc.v;
  for (int j = 1; j <= M; ++j) lc.u.push_back((2 * j + 2) * series[2 * j + 2] / lc.v);
  const double top_odd = series.order() >= 2 * M + 3 ? series[2 * M + 3] : 0.0;
  lc.z0 = -top_odd / lc.v;
  for (int j = 1; j <= M + 1; ++j) {
    const double shifted = series[2 * j - 1] + lc.z0 * (2 * j) * series[2 * j];
    lc.w.push_back((2 * j - 1) * shifted / lc.v);
  }
  return lc;
}

/// Normal form at params: even sector from the h = 0 functional, odd sector as
/// the directional derivative in h evaluated at h = 0 and contracted with h.
inline LandauCoefficients landau_coefficients(const ModelParams& params, int order = -1) {
  const std::size_t M = params.subsets();
  if (order < 0) order = 2 * static_cast<int>(M) + 4;
  ModelParams symmetric = params;
  symmetric.h_tilde.clear();
  const auto even = taylor_expand(symmetric, order).part(0);
  LandauCoefficients lc = normal_form(even, M);
  lc.w_per_h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(M + 1), static_cast<Eigen::Index>(M));
  lc.z0_per_h = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(M));
  for (std::size_t k = 0; k < M; ++k) {
    const auto unit = normal_form(even + field_response_series(symmetric, k, order), M);
    for (std::size_t j = 0; j <= M; ++j) lc.w_per_h(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = unit.w[j];
    lc.z0_per_h(static_cast<Eigen::Index>(k)) = unit.z0;
  }
  Eigen::VectorXd h = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(M));
  for (std::size_t k = 0; k < M; ++k) h(static_cast<Eigen::Index>(k)) = params.field(k);
  const Eigen::VectorXd w = lc.w_per_h * h;
  lc.w.assign(w.data(), w.data() + w.size());
  lc.z0 = lc.z0_per_h.dot(h);
  return lc;
}

// ---------------------------------------------------------------------------
// Exact rational treatment of the M = 1 tricritical conditions.

/// Dense rational polynomial, coefficients in increasing degree.
using RationalPolynomial = std::vector<Rational>;

namespace detail {

inline Rational evaluate(const RationalPolynomial& p, const Rational& x) {
  Rational acc = 0;
  for (std::size_t k = p.size(); k-- > 0;) acc = acc * x + p[k];
  return acc;
}

/// Coefficient of z^power in a^order (sqrt((z+e)^2+1) + sqrt((z-e)^2+1)) / sqrt(a),
/// a = 1 + e^2. Exact: the binomial expansion of sqrt(1 + (z^2 +- 2ez)/a).
inline Rational scaled_root_coefficient(const Rational& e, int power, int order) {
  const Rational a = 1 + e * e;
  Rational total = 0;
  for (int sign : {1, -1}) {
    PowerSeries<Rational> x({Rational(0), Rational(2 * sign) * e / a, Rational(1) / a}, order);
    total += sqrt1p(x)[power];
  }
  Rational scale = 1;
  for (int i = 0; i < order; ++i) scale *= a;
  return total * scale;
}

/// Lagrange interpolation through (x_i, y_i), returned in monomial form.
inline RationalPolynomial interpolate(const std::vector<Rational>& xs, const std::vector<Rational>& ys) {
  const std::size_t n = xs.size();
  RationalPolynomial result(n, Rational(0));
  for (std::size_t i = 0; i < n; ++i) {
    RationalPolynomial basis{Rational(1)};
    Rational denom = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      RationalPolynomial next(basis.size() + 1, Rational(0));
      for (std::size_t k = 0; k < basis.size(); ++k) {
        next[k + 1] += basis[k];
        next[k] -= basis[k] * xs[j];
      }
      basis = std::move(next);
      denom *= xs[i] - xs[j];
    }
    for (std::size_t k = 0; k < n; ++k) result[k] += basis[k] * ys[i] / denom;
  }
  while (result.size() > 1 && result.back() == 0) result.pop_back();
  return result;
}

inline std::vector<boost::multiprecision::cpp_int> divisors(boost::multiprecision::cpp_int n) {
  using boost::multiprecision::cpp_int;
  if (n < 0) n = -n;
  std::vector<cpp_int> out;
  for (cpp_int d = 1; d * d <= n; ++d)
    if (n % d == 0) {
      out.push_back(d);
      if (d * d != n) out.push_back(n / d);
    }
  return out;
}

}  // namespace detail

/// All exact rational roots of p (rational root theorem), ascending, without
/// multiplicity. The zero root is included when p(0) = 0.
inline std::vector<Rational> rational_roots(RationalPolynomial p) {
  using boost::multiprecision::cpp_int;
  while (p.size() > 1 && p.back() == 0) p.pop_back();
  detail::require(!(p.size() == 1 && p[0] == 0), "zero polynomial has no isolated roots");
  std::vector<Rational> roots;
  std::size_t shift = 0;
  while (shift < p.size() && p[shift] == 0) ++shift;
  if (shift > 0) roots.push_back(0);
  p.erase(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(shift));
  if (p.size() <= 1) return roots;
  cpp_int lcm = 1;
  for (const auto& c : p) {
    const cpp_int d = boost::multiprecision::denominator(c);
    lcm = lcm / boost::multiprecision::gcd(lcm, d) * d;
  }
  std::vector<cpp_int> ints;
  for (const auto& c : p) ints.push_back(boost::multiprecision::numerator(Rational(c * lcm)));
  cpp_int content = 0;
  for (const auto& c : ints) content = boost::multiprecision::gcd(content, c);
  for (auto& c : ints) c /= content;
  for (const auto& num : detail::divisors(ints.front()))
    for (const auto& den : detail::divisors(ints.back()))
      for (int sign : {1, -1}) {
        const Rational cand = Rational(num * sign, den);
        if (detail::evaluate(p, cand) == 0 &&
            std::find(roots.begin(), roots.end(), cand) == roots.end())
          roots.push_back(cand);
      }
  std::sort(roots.begin(), roots.end());
  return roots;
}

struct ExactTricriticalPoint {
  /// eps_tilde at the tricritical point, exact.
  Rational eps;
  /// g_tilde^4 = (1 + eps^2)^3, exact.
  Rational g_fourth;
  double g_tilde = 0.0;
  /// Numerator polynomial of u_1 in eps (up to a positive factor).
  RationalPolynomial u_numerator;
};

/// Tricritical point of the single-subset model in exact arithmetic: on r = 0,
/// u_1 vanishes where a polynomial in eps does; its positive rational root with
/// v > 0 is returned.
inline ExactTricriticalPoint locate_tricritical_exact() {
  constexpr int order = 6;
  constexpr int degree = 2 * order;
  std::vector<Rational> xs, ys;
  for (int i = 0; i <= degree; ++i) {
    xs.emplace_back(i, 3);
    ys.push_back(detail::scaled_root_coefficient(xs.back(), 4, order));
  }
  ExactTricriticalPoint point;
  point.u_numerator = detail::interpolate(xs, ys);
  for (const auto& root : rational_roots(point.u_numerator)) {
    if (root <= 0) continue;
    const Rational a = 1 + root * root;
    ModelParams p;
    p.n_fractions = {1.0};
    p.eps_tilde = {root.convert_to<double>()};
    p.g_tilde = std::pow(a.convert_to<double>(), 0.75);
    if (!landau_coefficients(p).v_positive()) continue;
    point.eps = root;
    point.g_fourth = a * a * a;
    point.g_tilde = p.g_tilde;
    return point;
  }
  throw ConvergenceError("no positive rational tricritical bias with v > 0");
}

}  // namespace multicrit
