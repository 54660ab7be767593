#pragma once

// Mean-field scans towards a located multicritical point and the exponent fits
// built on them: z_G against |r| on the ordered side, the gap against r on the
// normal side and the gap against w_1 at the point itself.

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "multicrit/landau.hpp"
#include "multicrit/phase.hpp"
#include "multicrit/scaling.hpp"
#include "multicrit/spectrum.hpp"

namespace multicrit {

struct ScanOptions {
  /// Log-spaced distances from the critical point along the scan direction.
  double delta_min = 1e-9;
  double delta_max = 1e-3;
  int points = 25;
  /// Field range for the w_1 scan.
  double h_min = 1e-11;
  double h_max = 1e-6;
  /// Points per sliding window.
  int window = 7;
};

inline std::vector<double> log_grid(double lo, double hi, int n) {
  detail::require(lo > 0 && hi > lo && n >= 2, "log grid needs 0 < lo < hi and n >= 2");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, double(i) / (n - 1));
  return out;
}

namespace detail {

inline Eigen::VectorXd critical_coordinates(const CriticalPoint& cp) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(cp.eps_tilde.size() + 1));
  x(0) = cp.g_tilde;
  for (std::size_t j = 0; j < cp.eps_tilde.size(); ++j) x(static_cast<Eigen::Index>(j) + 1) = cp.eps_tilde[j];
  return x;
}

inline ModelParams at_coordinates(const CriticalPoint& cp, const Eigen::VectorXd& x) {
  ModelParams p = cp.params();
  p.g_tilde = x(0);
  p.eps_tilde.assign(x.data() + 1, x.data() + x.size());
  return p;
}

/// Smallest positive stationary point of the symmetric functional, which is
/// the ordered minimum on the r < 0 side close to the point.
inline double ordered_branch(const ModelParams& p, double z_hint) {
  const auto d1 = [&](double z) { return energy_derivative(z, p, 1); };
  double lo = 1e-3 * z_hint;
  require(d1(lo) < 0, "no ordered branch: the origin is not a maximum");
  double hi = z_hint;
  while (d1(hi) < 0) {
    lo = hi;
    hi *= 2;
    require(hi < 1e3, "ordered branch not bracketed");
  }
  return solve_bracketed(d1, lo, hi);
}

}  // namespace detail

/// Unit direction in (g, eps_1..eps_M) along which every u_j stays zero to
/// first order, oriented so that r decreases (into the ordered phase).
inline Eigen::VectorXd pure_r_direction(const CriticalPoint& cp, double step = 1e-6) {
  const Eigen::VectorXd x = detail::critical_coordinates(cp);
  const auto n = x.size();
  Eigen::MatrixXd J(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::VectorXd xp = x, xm = x;
    xp(k) += step;
    xm(k) -= step;
    J.col(k) = (detail::multicritical_residual(cp.n_fractions, xp) - detail::multicritical_residual(cp.n_fractions, xm)) /
               (2 * step);
  }
  Eigen::VectorXd d;
  if (n == 1) {
    d = Eigen::VectorXd::Ones(1);
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J.bottomRows(n - 1), Eigen::ComputeFullV);
    d = svd.matrixV().col(n - 1);
  }
  if (J.row(0).dot(d) > 0) d = -d;
  return d.normalized();
}

using Points = std::vector<std::pair<double, double>>;

/// (|r|, z_G) along the pure-r direction into the ordered side.
inline Points order_parameter_scan(const CriticalPoint& cp, const ScanOptions& o = {}) {
  const Eigen::VectorXd x = detail::critical_coordinates(cp);
  const Eigen::VectorXd d = pure_r_direction(cp);
  Points out;
  for (double delta : log_grid(o.delta_min, o.delta_max, o.points)) {
    const ModelParams p = detail::at_coordinates(cp, x + delta * d);
    const auto lc = landau_coefficients(p);
    const double guess = std::pow(std::abs(lc.r), 1.0 / (2 * double(cp.n_fractions.size()) + 2));
    out.emplace_back(std::abs(lc.r), detail::ordered_branch(p, guess));
  }
  return out;
}

/// (r, mean-field gap) along the pure-r direction into the normal side.
inline Points gap_vs_r_scan(const CriticalPoint& cp, const ScanOptions& o = {}) {
  const Eigen::VectorXd x = detail::critical_coordinates(cp);
  const Eigen::VectorXd d = pure_r_direction(cp);
  Points out;
  for (double delta : log_grid(o.delta_min, o.delta_max, o.points)) {
    const ModelParams p = detail::at_coordinates(cp, x - delta * d);
    out.emplace_back(landau_coefficients(p).r, mf_gap(p));
  }
  return out;
}

/// (|w_1|, mean-field gap) at the critical point with a uniform field h on
/// every subset.
inline Points gap_vs_w1_scan(const CriticalPoint& cp, const ScanOptions& o = {}) {
  const ModelParams base = cp.params();
  const auto lc = landau_coefficients(base);
  const double w1_per_h = lc.w_per_h.row(0).sum();
  detail::require(w1_per_h != 0.0, "field does not couple to w_1");
  Points out;
  for (double h : log_grid(o.h_min, o.h_max, o.points)) {
    ModelParams p = base;
    p.h_tilde.assign(base.subsets(), h);
    out.emplace_back(std::abs(w1_per_h * h), mf_gap(p));
  }
  return out;
}

struct ExponentFits {
  FitResult beta_r, gamma_eps_r, gamma_eps_w1;
  std::vector<FitResult> beta_r_windows, gamma_eps_r_windows, gamma_eps_w1_windows;
  Points z_vs_r, gap_vs_r, gap_vs_w1;
};

/// Headline fits use the innermost window (closest to the point).
inline ExponentFits fit_critical_exponents(const CriticalPoint& cp, const ScanOptions& o = {}) {
  ExponentFits f;
  f.z_vs_r = order_parameter_scan(cp, o);
  f.gap_vs_r = gap_vs_r_scan(cp, o);
  f.gap_vs_w1 = gap_vs_w1_scan(cp, o);
  f.beta_r_windows = sliding_window_fits(f.z_vs_r, o.window);
  f.gamma_eps_r_windows = sliding_window_fits(f.gap_vs_r, o.window);
  f.gamma_eps_w1_windows = sliding_window_fits(f.gap_vs_w1, o.window);
  f.beta_r = f.beta_r_windows.back();
  f.gamma_eps_r = f.gamma_eps_r_windows.back();
  f.gamma_eps_w1 = f.gamma_eps_w1_windows.back();
  return f;
}

}  // namespace multicrit
