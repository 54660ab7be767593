#pragma once

// Exponent family of the (M+2)-order points, log-log power-law fits and the
// quench scaling collapse with a binned relative-spread metric.

#include <cmath>

// Boost 1.74's pchip calls isnan unqualified.
namespace boost::math::interpolators {
using std::isnan;
}
#include <boost/math/interpolators/pchip.hpp>
#include <boost/rational.hpp>

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "multicrit/errors.hpp"

namespace multicrit {

using Fraction = boost::rational<long long>;

inline double to_double(const Fraction& f) { return boost::rational_cast<double>(f); }

struct ExponentTable {
  int M = 0;
  Fraction beta_r;
  /// beta_u[j-1] for j = 1..M; j = M evaluates to 1/2.
  std::vector<Fraction> beta_u;
  /// beta_w[j-1] for j = 1..M+1.
  std::vector<Fraction> beta_w;
  Fraction gamma_eps_w1, gamma_eps_r, xi_r, xi_w1, delta_eps;

  /// Order-parameter exponent of a named scaling variable: "r", "u<j>", "w<j>".
  Fraction beta(const std::string& name) const {
    if (name == "r") return beta_r;
    detail::require(name.size() >= 2 && (name[0] == 'u' || name[0] == 'w'), "unknown scaling variable " + name);
    const int j = std::stoi(name.substr(1));
    const auto& list = name[0] == 'u' ? beta_u : beta_w;
    detail::require(j >= 1 && j <= static_cast<int>(list.size()), "scaling variable index out of range: " + name);
    return list[static_cast<std::size_t>(j - 1)];
  }

  /// Crossover exponent phi_{A1,A2} = beta_A1 / beta_A2.
  Fraction crossover(const std::string& a1, const std::string& a2) const { return beta(a1) / beta(a2); }

  std::vector<std::string> variables() const {
    std::vector<std::string> names{"r"};
    for (std::size_t j = 1; j <= beta_u.size(); ++j) names.push_back("u" + std::to_string(j));
    for (std::size_t j = 1; j <= beta_w.size(); ++j) names.push_back("w" + std::to_string(j));
    return names;
  }

  /// Collapse exponents (a, b): <J_z>_r = eta^a S(tau eta^b).
  std::pair<Fraction, Fraction> quench_exponents() const {
    return {Fraction(1) - gamma_eps_r / xi_r, (Fraction(1) + gamma_eps_r) / xi_r};
  }
};

/// Exact exponents for M >= 0 (M = 0 is the Dicke class).
inline ExponentTable predicted_exponents(int M) {
  detail::require(M >= 0, "M must be non-negative");
  ExponentTable t;
  t.M = M;
  t.beta_r = Fraction(1, 2 * M + 2);
  for (int j = 1; j <= M; ++j) t.beta_u.emplace_back(1, 2 * M - 2 * j + 2);
  for (int j = 1; j <= M + 1; ++j) t.beta_w.emplace_back(1, 2 * M - 2 * j + 5);
  t.gamma_eps_w1 = Fraction(M + 1, 2 * M + 3);
  t.gamma_eps_r = Fraction(1, 2);
  t.xi_r = Fraction(M + 3, 2 * M + 2);
  t.xi_w1 = Fraction(M + 3, 2 * M + 3);
  t.delta_eps = Fraction(M + 1, M + 3);
  return t;
}

// ---------------------------------------------------------------------------
// Power-law fits.

struct FitResult {
  double exponent = 0.0;
  double prefactor = 0.0;
  double stderr_ = 0.0;
  std::pair<double, double> window{0.0, 0.0};
  int n_points = 0;
};

/// Least-squares slope of log y against log x over points with x in [lo, hi].
inline FitResult fit_power_law(const std::vector<std::pair<double, double>>& points,
                               std::optional<std::pair<double, double>> window = std::nullopt) {
  std::vector<double> lx, ly;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  for (const auto& [x, y] : points) {
    if (window && (x < window->first || x > window->second)) continue;
    detail::require(x > 0.0 && y > 0.0, "power-law fit needs positive data");
    lx.push_back(std::log(x));
    ly.push_back(std::log(y));
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
  }
  const auto n = lx.size();
  detail::require(n >= 3, "power-law fit needs at least three points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  detail::require(sxx > 0.0, "power-law fit needs distinct abscissae");
  FitResult fit;
  fit.exponent = sxy / sxx;
  const double intercept = my - fit.exponent * mx;
  fit.prefactor = std::exp(intercept);
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - intercept - fit.exponent * lx[i];
    ssr += r * r;
  }
  fit.stderr_ = n > 2 ? std::sqrt(ssr / double(n - 2) / sxx) : 0.0;
  fit.window = {xmin, xmax};
  fit.n_points = static_cast<int>(n);
  return fit;
}

/// Fits over consecutive windows of `width` points, ordered from the largest
/// abscissae towards the smallest (i.e. approaching a critical point at x = 0).
inline std::vector<FitResult> sliding_window_fits(std::vector<std::pair<double, double>> points, int width) {
  detail::require(width >= 3, "sliding window needs at least three points");
  std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<FitResult> out;
  for (std::size_t start = 0; start + static_cast<std::size_t>(width) <= points.size(); ++start)
    out.push_back(fit_power_law({points.begin() + static_cast<std::ptrdiff_t>(start),
                                 points.begin() + static_cast<std::ptrdiff_t>(start) + width}));
  return out;
}

// ---------------------------------------------------------------------------
// Scaling collapse.

struct ScalingCurve {
  double eta = 0.0;
  /// (tau, residual) pairs.
  std::vector<std::pair<double, double>> points;
};

struct CollapsedCurve {
  double eta = 0.0;
  bool reference = false;
  /// (X, Y) = (tau eta^b, eta^-a residual), ascending in X.
  std::vector<std::pair<double, double>> points;
};

struct CollapseResult {
  double a = 0.0, b = 0.0;
  std::vector<CollapsedCurve> curves;
  /// Max over grid bins holding at least two curves of (max Y - min Y) / median Y.
  double spread = 0.0;
  int overlapping_bins = 0;
  double spread_x = 0.0;
};

struct CollapseOptions {
  /// Log-spaced common X grid size.
  int grid_points = 64;
};

namespace detail {

inline CollapsedCurve rescale(const ScalingCurve& c, double a, double b, bool reference) {
  require(c.eta > 0.0, "collapse needs positive eta");
  CollapsedCurve out{c.eta, reference, {}};
  for (const auto& [tau, res] : c.points) out.points.emplace_back(tau * std::pow(c.eta, b), std::pow(c.eta, -a) * res);
  std::sort(out.points.begin(), out.points.end());
  return out;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

/// Rescales each curve with exponents (a, b), interpolates monotonically
/// (pchip in log X) onto a common log-spaced grid, and reports the worst
/// relative spread among curves covering the same X. The optional reference
/// curve joins the comparison as one more curve.
inline CollapseResult collapse(const std::vector<ScalingCurve>& curves, double a, double b,
                               const std::optional<ScalingCurve>& reference = std::nullopt,
                               const CollapseOptions& opts = {}) {
  std::vector<double> etas;
  for (const auto& c : curves) {
    detail::require(c.points.size() >= 2, "every collapse curve needs at least two points");
    if (std::find(etas.begin(), etas.end(), c.eta) == etas.end()) etas.push_back(c.eta);
  }
  detail::require(etas.size() >= 2 || (reference && !etas.empty()), "collapse needs at least two distinct eta values");
  CollapseResult res;
  res.a = a;
  res.b = b;
  for (const auto& c : curves) res.curves.push_back(detail::rescale(c, a, b, false));
  if (reference) res.curves.push_back(detail::rescale(*reference, a, b, true));

  struct Interp {
    double lo, hi;
    std::optional<boost::math::interpolators::pchip<std::vector<double>>> f;
    double constant = 0.0;
    double operator()(double logx) const { return f ? (*f)(logx) : constant; }
  };
  std::vector<Interp> interps;
  double xmin = std::numeric_limits<double>::infinity(), xmax = 0.0;
  for (const auto& c : res.curves) {
    std::vector<double> lx, y;
    for (const auto& [x, yy] : c.points) {
      detail::require(x > 0.0, "rescaled abscissa must be positive");
      if (!lx.empty() && std::log(x) <= lx.back()) continue;
      lx.push_back(std::log(x));
      y.push_back(yy);
    }
    Interp in{lx.front(), lx.back(), std::nullopt, y.front()};
    if (lx.size() >= 4) in.f.emplace(std::move(lx), std::move(y));
    else if (lx.size() >= 2) {
      // pchip needs four nodes; pad linear segments with midpoints
      std::vector<double> px, py;
      for (std::size_t i = 0; i + 1 < lx.size(); ++i) {
        for (int k = 0; k < 3; ++k) {
          const double s = k / 3.0;
          px.push_back(lx[i] + s * (lx[i + 1] - lx[i]));
          py.push_back(y[i] + s * (y[i + 1] - y[i]));
        }
      }
      px.push_back(lx.back());
      py.push_back(y.back());
      in.f.emplace(std::move(px), std::move(py));
    }
    xmin = std::min(xmin, in.lo);
    xmax = std::max(xmax, in.hi);
    interps.push_back(std::move(in));
  }
  for (int g = 0; g < opts.grid_points; ++g) {
    const double lx = xmin + (xmax - xmin) * g / (opts.grid_points - 1);
    std::vector<double> ys;
    for (const auto& in : interps)
      if (lx >= in.lo - 1e-12 && lx <= in.hi + 1e-12) ys.push_back(in(std::clamp(lx, in.lo, in.hi)));
    if (ys.size() < 2) continue;
    ++res.overlapping_bins;
    const auto [mn, mx] = std::minmax_element(ys.begin(), ys.end());
    const double spread = (*mx - *mn) / std::abs(detail::median(ys));
    if (spread > res.spread) {
      res.spread = spread;
      res.spread_x = std::exp(lx);
    }
  }
  if (res.overlapping_bins == 0) throw ConfigError("rescaled curves do not overlap; no collapse can be measured");
  return res;
}

inline CollapseResult collapse(const std::vector<ScalingCurve>& curves, const ExponentTable& table,
                               const std::optional<ScalingCurve>& reference = std::nullopt,
                               const CollapseOptions& opts = {}) {
  const auto [a, b] = table.quench_exponents();
  return collapse(curves, to_double(a), to_double(b), reference, opts);
}

}  // namespace multicrit
