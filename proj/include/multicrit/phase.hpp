#pragma once

// Mean-field phase structure: global minimization of E_ns(z), boundary tracing
// and multicritical point location.

#include <Eigen/Dense>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "multicrit/errors.hpp"
#include "multicrit/landau.hpp"
#include "multicrit/model.hpp"

namespace multicrit {

inline constexpr double kEnergyDegeneracyTol = 1e-11;
inline constexpr double kMinimizerMergeTol = 1e-8;

struct LocalMinimum {
  double z = 0.0;
  double energy = 0.0;
  double curvature = 0.0;
};

struct PhasePoint {
  ModelParams params;
  /// Global minimizers, ascending.
  std::vector<double> minimizers;
  /// NP, SP, SP_pair, SP_two_pairs or coexistence-k.
  std::string phase;
  double energy = 0.0;
  /// Every local minimum found, ascending in z (includes metastable branches).
  std::vector<LocalMinimum> local_minima;
  double z_cap = 0.0;
};

namespace detail {

inline double solve_bracketed(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  std::uintmax_t iters = 200;
  auto tol = [](double a, double b) { return std::abs(a - b) <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(a)); };
  auto res = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  return 0.5 * (res.first + res.second);
}

inline LocalMinimum make_minimum(double z, const ModelParams& p) {
  return {z, energy_functional_ns(z, p), energy_derivative(z, p, 2)};
}

/// Every local minimum of E_ns on [-z_cap, z_cap] from a symmetric grid of
/// 2 * half_cells + 1 points, polished to machine precision.
inline std::vector<LocalMinimum> local_minima_on_grid(const ModelParams& p, double z_cap,
                                                      int half_cells) {
  const auto dE = [&](double z) { return energy_derivative(z, p, 1); };
  const int n = 2 * half_cells;
  std::vector<double> zs(static_cast<std::size_t>(n) + 1), ds(zs.size());
  for (int i = 0; i <= n; ++i) {
    zs[static_cast<std::size_t>(i)] = z_cap * double(i - half_cells) / half_cells;
    ds[static_cast<std::size_t>(i)] = dE(zs[static_cast<std::size_t>(i)]);
  }
  std::vector<LocalMinimum> found;
  auto add = [&](double z) {
    for (const auto& m : found)
      if (std::abs(m.z - z) < kMinimizerMergeTol) return;
    found.push_back(make_minimum(z, p));
  };
  // Brackets a minimum inside (a, b) starting just right of a stationary point a.
  auto search_right_of_max = [&](double a, double b) {
    double step = (b - a) * 1e-9;
    if (dE(a + step) < 0.0 && dE(b) > 0.0) add(solve_bracketed(dE, a + step, b));
  };
  auto search_left_of_max = [&](double a, double b) {
    double step = (b - a) * 1e-9;
    if (dE(b - step) > 0.0 && dE(a) < 0.0) add(solve_bracketed(dE, a, b - step));
  };
  for (int i = 0; i <= n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (ds[k] == 0.0) {
      const double curv = energy_derivative(zs[k], p, 2);
      if (curv > 0.0) {
        add(zs[k]);
      } else if (curv < 0.0) {
        if (i < n) search_right_of_max(zs[k], zs[k + 1]);
        if (i > 0) search_left_of_max(zs[k - 1], zs[k]);
      } else {
        // Flat stationary point: a minimum when the slope rises on both sides.
        const double h = (z_cap / half_cells) * 1e-6;
        if (dE(zs[k] - h) <= 0.0 && dE(zs[k] + h) >= 0.0) add(zs[k]);
      }
      continue;
    }
    if (i < n && ds[k] < 0.0 && ds[k + 1] > 0.0) add(solve_bracketed(dE, zs[k], zs[k + 1]));
  }
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.z < b.z; });
  return found;
}

inline std::string classify(const std::vector<double>& zs) {
  const auto is_zero = [](double z) { return std::abs(z) < kMinimizerMergeTol; };
  const auto has_partner = [&](double z) {
    for (double o : zs)
      if (std::abs(o + z) < 1e-7 * std::max(1.0, std::abs(z))) return true;
    return false;
  };
  bool symmetric = true;
  for (double z : zs) symmetric = symmetric && has_partner(z);
  if (zs.size() == 1) return is_zero(zs[0]) ? "NP" : "SP";
  if (zs.size() == 2 && symmetric) return "SP_pair";
  if (zs.size() == 4 && symmetric) return "SP_two_pairs";
  return "coexistence-" + std::to_string(zs.size());
}

}  // namespace detail

/// Global minimizers of E_ns by dense bracketing on |z| <= z_cap followed by a
/// bracketed Newton-type polish. The cap doubles when a minimum sits at the edge.
inline PhasePoint minimize(const ModelParams& params) {
  detail::require_coupling(params);
  double max_offset = 0.0;
  for (std::size_t j = 0; j < params.subsets(); ++j)
    max_offset = std::max(max_offset, std::abs(params.bias(j)) + std::abs(params.field(j)));
  PhasePoint pt;
  pt.params = params;
  pt.z_cap = max_offset + 2.0 * params.g_tilde * params.g_tilde + 2.0;
  constexpr int half_cells = 1000;
  for (int attempt = 0;; ++attempt) {
    pt.local_minima = detail::local_minima_on_grid(params, pt.z_cap, half_cells);
    const double edge = pt.z_cap * (1.0 - 1.0 / half_cells);
    const bool at_edge = std::any_of(pt.local_minima.begin(), pt.local_minima.end(),
                                     [&](const auto& m) { return std::abs(m.z) >= edge; });
    if (!at_edge && !pt.local_minima.empty()) break;
    if (attempt >= 10) throw ConvergenceError("minimizer search failed to enclose the minimum");
    pt.z_cap *= 2.0;
  }
  double emin = std::numeric_limits<double>::infinity();
  for (const auto& m : pt.local_minima) emin = std::min(emin, m.energy);
  for (const auto& m : pt.local_minima)
    if (m.energy <= emin + kEnergyDegeneracyTol) pt.minimizers.push_back(m.z);
  pt.energy = emin;
  pt.phase = detail::classify(pt.minimizers);
  return pt;
}

// ---------------------------------------------------------------------------
// Multicritical points.

struct CriticalPoint {
  std::vector<double> n_fractions;
  double g_tilde = 0.0;
  std::vector<double> eps_tilde;
  /// M + 2 for a full multicritical point.
  int order = 0;
  /// |r|, |u_1| ... |u_M| at the solution.
  std::vector<double> residuals;
  double v = 0.0;
  int iterations = 0;

  ModelParams params() const {
    ModelParams p;
    p.n_fractions = n_fractions;
    p.g_tilde = g_tilde;
    p.eps_tilde = eps_tilde;
    return p;
  }
  double max_residual() const {
    double m = 0.0;
    for (double r : residuals) m = std::max(m, r);
    return m;
  }
};

struct MulticriticalOptions {
  double tolerance = 1e-10;
  int max_iterations = 100;
  /// Number of best coarse-grid points tried as Newton seeds.
  int seeds = 8;
};

namespace detail {

/// (r, u_1..u_M) at x = (g, eps_1..eps_M), and v.
inline Eigen::VectorXd multicritical_residual(const std::vector<double>& n, const Eigen::VectorXd& x,
                                              double* v_out = nullptr) {
  ModelParams p;
  p.n_fractions = n;
  p.g_tilde = x(0);
  p.eps_tilde.assign(x.data() + 1, x.data() + x.size());
  const auto lc = normal_form(taylor_expand(p, 2 * static_cast<int>(n.size()) + 4).part(0), n.size());
  Eigen::VectorXd f(x.size());
  f(0) = lc.r;
  for (std::size_t j = 0; j < lc.u.size(); ++j) f(static_cast<Eigen::Index>(j) + 1) = lc.u[j];
  if (v_out) *v_out = lc.v;
  return f;
}

struct NewtonOutcome {
  Eigen::VectorXd x;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Damped Newton with a central finite-difference Jacobian.
inline NewtonOutcome newton_fd(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                               Eigen::VectorXd x, double tol, int max_iter) {
  NewtonOutcome out;
  Eigen::VectorXd fx = f(x);
  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it;
    if (!fx.allFinite()) break;
    if (fx.cwiseAbs().maxCoeff() < tol) {
      out.converged = true;
      break;
    }
    const Eigen::Index n = x.size();
    Eigen::MatrixXd jac(fx.size(), n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double h = 1e-7 * std::max(1.0, std::abs(x(k)));
      Eigen::VectorXd xp = x, xm = x;
      xp(k) += h;
      xm(k) -= h;
      jac.col(k) = (f(xp) - f(xm)) / (2.0 * h);
    }
    const Eigen::VectorXd step = jac.colPivHouseholderQr().solve(-fx);
    if (!step.allFinite()) break;
    double lambda = 1.0;
    const double norm0 = fx.norm();
    Eigen::VectorXd xn, fn;
    for (int ls = 0; ls < 30; ++ls) {
      xn = x + lambda * step;
      fn = f(xn);
      if (fn.allFinite() && fn.norm() < norm0) break;
      lambda *= 0.5;
    }
    x = xn;
    fx = fn;
  }
  out.x = x;
  out.residual = fx.allFinite() ? fx.cwiseAbs().maxCoeff() : std::numeric_limits<double>::infinity();
  if (!out.converged && out.residual < tol) out.converged = true;
  return out;
}

/// Even Taylor coefficients of sqrt((z+e)^2+1) + sqrt((z-e)^2+1).
inline PowerSeries<double> root_pair_series(double e, int order) {
  return shifted_root_series(e, order) + shifted_root_series(-e, order);
}

}  // namespace detail

/// Coarse-grid seeds: g in [1, 2] step 0.05, eps_j in [0, 1.2] step 0.05,
/// ranked by r^2 + sum u_j^2.
inline std::vector<Eigen::VectorXd> multicritical_seeds(const std::vector<double>& n, int count) {
  const int M = static_cast<int>(n.size());
  const int K = 2 * M + 4;
  constexpr int ne = 25, ng = 21;
  std::vector<PowerSeries<double>> cache;
  for (int i = 0; i < ne; ++i) cache.push_back(detail::root_pair_series(0.05 * i, K));
  std::vector<std::pair<double, Eigen::VectorXd>> best;
  std::vector<int> idx(static_cast<std::size_t>(M), 0);
  for (;;) {
    PowerSeries<double> roots(K);
    for (int j = 0; j < M; ++j) {
      auto term = cache[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
      term.scale(-0.25 * n[static_cast<std::size_t>(j)]);
      roots += term;
    }
    const double v = K * roots[K];
    double usum = 0.0;
    for (int j = 1; j <= M; ++j) usum += std::pow((2 * j + 2) * roots[2 * j + 2] / v, 2);
    for (int ig = 0; ig < ng; ++ig) {
      const double g = 1.0 + 0.05 * ig;
      const double r = 2.0 * (roots[2] + 1.0 / (4.0 * g * g)) / v;
      const double score = r * r + usum;
      if (!std::isfinite(score)) continue;
      Eigen::VectorXd x(M + 1);
      x(0) = g;
      for (int j = 0; j < M; ++j) x(j + 1) = 0.05 * idx[static_cast<std::size_t>(j)];
      best.emplace_back(score, x);
      if (best.size() > static_cast<std::size_t>(4 * count)) {
        std::nth_element(best.begin(), best.begin() + count, best.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        best.resize(static_cast<std::size_t>(count));
      }
    }
    int j = 0;
    while (j < M && ++idx[static_cast<std::size_t>(j)] == ne) idx[static_cast<std::size_t>(j++)] = 0;
    if (j == M) break;
  }
  std::sort(best.begin(), best.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Eigen::VectorXd> seeds;
  for (std::size_t i = 0; i < best.size() && seeds.size() < static_cast<std::size_t>(count); ++i)
    seeds.push_back(best[i].second);
  return seeds;
}

/// Solves r = u_1 = ... = u_M = 0 in (g, eps_1..eps_M) and requires v > 0.
/// Biases are reported non-negative, ordered descending among equal fractions.
inline CriticalPoint locate_multicritical(const std::vector<double>& n_fractions,
                                          std::optional<std::vector<double>> initial_guess = std::nullopt,
                                          const MulticriticalOptions& opts = {}) {
  ModelParams check;
  check.n_fractions = n_fractions;
  check.eps_tilde.assign(n_fractions.size(), 0.0);
  check.validate();
  const std::size_t M = n_fractions.size();
  std::vector<Eigen::VectorXd> seeds;
  if (initial_guess) {
    detail::require(initial_guess->size() == M + 1, "initial guess needs (g, eps_1..eps_M)");
    seeds.push_back(Eigen::Map<const Eigen::VectorXd>(initial_guess->data(), static_cast<Eigen::Index>(M + 1)));
  } else {
    seeds = multicritical_seeds(n_fractions, opts.seeds);
  }
  const auto f = [&](const Eigen::VectorXd& x) { return detail::multicritical_residual(n_fractions, x); };
  for (const auto& seed : seeds) {
    detail::NewtonOutcome res;
    try {
      res = detail::newton_fd(f, seed, opts.tolerance, opts.max_iterations);
    } catch (const ConfigError&) {
      // the iterate left the valid domain (g <= 0)
      continue;
    }
    if (!res.converged || res.x(0) <= 0.0) continue;
    double v = 0.0;
    const Eigen::VectorXd fr = detail::multicritical_residual(n_fractions, res.x, &v);
    if (!(v > 0.0)) continue;
    CriticalPoint cp;
    cp.n_fractions = n_fractions;
    cp.g_tilde = res.x(0);
    for (std::size_t j = 0; j < M; ++j) cp.eps_tilde.push_back(std::abs(res.x(static_cast<Eigen::Index>(j) + 1)));
    // Subsets with equal fractions are interchangeable.
    for (std::size_t a = 0; a < M; ++a)
      for (std::size_t b = a + 1; b < M; ++b)
        if (n_fractions[a] == n_fractions[b] && cp.eps_tilde[b] > cp.eps_tilde[a])
          std::swap(cp.eps_tilde[a], cp.eps_tilde[b]);
    cp.order = static_cast<int>(M) + 2;
    for (Eigen::Index k = 0; k < fr.size(); ++k) cp.residuals.push_back(std::abs(fr(k)));
    cp.v = v;
    cp.iterations = res.iterations;
    return cp;
  }
  throw ConvergenceError("multicritical Newton iteration did not converge to a point with v > 0");
}

// ---------------------------------------------------------------------------
// Second-order surface r = 0.

struct SurfacePoint {
  std::vector<double> eps_tilde;
  double g_r = 0.0;
};

/// Coupling on L_lambda for the given biases: solves r(g) = 0, where the
/// z^2 coefficient 1/(4g^2) - S(eps) decreases monotonically in g.
inline double critical_coupling(const std::vector<double>& n_fractions, const std::vector<double>& eps) {
  ModelParams p;
  p.n_fractions = n_fractions;
  p.eps_tilde = eps;
  p.g_tilde = 1.0;
  p.validate();
  const auto c2 = [&](double g) {
    p.g_tilde = g;
    return taylor_expand(p, 2 * static_cast<int>(n_fractions.size()) + 4)[2];
  };
  double lo = 0.5, hi = 2.0;
  for (int i = 0; i < 60 && c2(lo) <= 0.0; ++i) lo *= 0.5;
  for (int i = 0; i < 60 && c2(hi) >= 0.0; ++i) hi *= 2.0;
  if (!(c2(lo) > 0.0 && c2(hi) < 0.0)) throw ConvergenceError("no sign change of r in the coupling bracket");
  return detail::solve_bracketed(c2, lo, hi);
}

inline std::vector<SurfacePoint> second_order_surface(const std::vector<double>& n_fractions,
                                                      const std::vector<std::vector<double>>& eps_grid) {
  std::vector<SurfacePoint> out;
  out.reserve(eps_grid.size());
  for (const auto& eps : eps_grid) out.push_back({eps, critical_coupling(n_fractions, eps)});
  return out;
}

// ---------------------------------------------------------------------------
// First-order manifolds.

/// Straight segment in (g, eps, h) between two parameter sets of equal shape.
struct ParameterPath {
  ModelParams start;
  ModelParams end;
  int samples = 200;

  ModelParams at(double s) const {
    ModelParams p = start;
    p.g_tilde = (1 - s) * start.g_tilde + s * end.g_tilde;
    for (std::size_t j = 0; j < p.eps_tilde.size(); ++j)
      p.eps_tilde[j] = (1 - s) * start.eps_tilde[j] + s * end.eps_tilde[j];
    if (!start.h_tilde.empty() || !end.h_tilde.empty()) {
      p.h_tilde.assign(p.n_fractions.size(), 0.0);
      for (std::size_t j = 0; j < p.h_tilde.size(); ++j)
        p.h_tilde[j] = (1 - s) * start.field(j) + s * end.field(j);
    }
    return p;
  }
};

struct CoexistencePoint {
  double s = 0.0;
  ModelParams params;
  std::vector<double> minimizers;
  /// S_0, S_plus, S_minus, L_tau, L_chi or coexistence-k.
  std::string label;
  /// |E_A - E_B| between the two competing branches at s.
  double energy_split = 0.0;
};

struct TraceResult {
  std::vector<CoexistencePoint> points;
  /// Path positions where a tracked branch disappeared before the crossing.
  std::vector<double> lost_branches;
};

namespace detail {

/// Local minimum at p continuing a branch last seen at z (nearest minimum).
inline std::optional<LocalMinimum> continue_branch(const ModelParams& p, double z, double max_jump) {
  const auto pt = minimize(p);
  std::optional<LocalMinimum> best;
  for (const auto& m : pt.local_minima)
    if (!best || std::abs(m.z - z) < std::abs(best->z - z)) best = m;
  if (best && std::abs(best->z - z) > max_jump) return std::nullopt;
  return best;
}

inline double representative(const PhasePoint& pt) { return pt.minimizers.back(); }

inline std::string coexistence_label(const ModelParams& p, const std::vector<double>& zs) {
  double hsum = 0.0;
  for (std::size_t j = 0; j < p.subsets(); ++j) hsum += p.field(j);
  const bool symmetric_plane = std::abs(hsum) < 1e-10 && !p.has_symmetry_breaking();
  const auto cls = classify(zs);
  if (symmetric_plane || std::abs(hsum) < 1e-10) {
    const bool has_zero = std::any_of(zs.begin(), zs.end(), [](double z) { return std::abs(z) < kMinimizerMergeTol; });
    if (zs.size() == 3 && has_zero) return "L_tau";
    if (cls == "SP_two_pairs") return "L_chi";
    if (cls == "SP_pair") return "S_0";
  }
  if (zs.size() == 2) return hsum > 0 ? "S_plus" : "S_minus";
  return "coexistence-" + std::to_string(zs.size());
}

}  // namespace detail

/// Detects points along the path where two distinct branches of local minima
/// exchange global stability (first-order crossings), refined by bisection on
/// their energy difference.
inline TraceResult trace_first_order(const ParameterPath& path, double jump_tol = 1e-3) {
  detail::require(path.samples >= 2, "path needs at least two samples");
  TraceResult out;
  std::vector<PhasePoint> pts;
  for (int i = 0; i <= path.samples; ++i) pts.push_back(minimize(path.at(double(i) / path.samples)));
  for (int i = 0; i < path.samples; ++i) {
    const double s0 = double(i) / path.samples, s1 = double(i + 1) / path.samples;
    const double za = detail::representative(pts[static_cast<std::size_t>(i)]);
    const double zb = detail::representative(pts[static_cast<std::size_t>(i) + 1]);
    if (std::abs(za - zb) <= jump_tol) continue;
    // Branch A continued forward, branch B backward; both must exist at both ends.
    const auto a1 = detail::continue_branch(pts[static_cast<std::size_t>(i) + 1].params, za, 0.5 * std::abs(za - zb));
    const auto b0 = detail::continue_branch(pts[static_cast<std::size_t>(i)].params, zb, 0.5 * std::abs(za - zb));
    if (!a1 || !b0) {
      // Minimum moved continuously but fast (steep second-order onset), or a
      // branch ended inside the interval.
      if (!a1 && !b0) continue;
      out.lost_branches.push_back(0.5 * (s0 + s1));
      continue;
    }
    double lo = s0, hi = s1, zA = za, zB = b0->z;
    double split = 0.0;
    bool lost = false;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      const auto p = path.at(mid);
      const double dz = 0.5 * std::abs(zA - zB);
      const auto A = detail::continue_branch(p, zA, dz);
      const auto B = detail::continue_branch(p, zB, dz);
      if (!A || !B) {
        lost = true;
        break;
      }
      split = A->energy - B->energy;
      if (std::abs(split) < 1e-14) {
        lo = hi = mid;
        zA = A->z;
        zB = B->z;
        break;
      }
      if (split < 0) {
        lo = mid;
        zA = A->z;
      } else {
        hi = mid;
        zB = B->z;
      }
    }
    if (lost) {
      out.lost_branches.push_back(0.5 * (lo + hi));
      continue;
    }
    CoexistencePoint cp;
    cp.s = 0.5 * (lo + hi);
    cp.params = path.at(cp.s);
    const auto pt = minimize(cp.params);
    cp.minimizers = pt.minimizers;
    if (cp.minimizers.size() < 2) cp.minimizers = {std::min(zA, zB), std::max(zA, zB)};
    cp.label = detail::coexistence_label(cp.params, cp.minimizers);
    cp.energy_split = std::abs(split);
    out.points.push_back(cp);
  }
  return out;
}

/// Traces a two-parameter patch as a family of parallel paths.
inline std::vector<TraceResult> trace_first_order_patch(const std::vector<ParameterPath>& paths) {
  std::vector<TraceResult> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(trace_first_order(p));
  return out;
}

// ---------------------------------------------------------------------------
// Wing critical lines (M = 1, h != 0).

struct WingPoint {
  double h_tilde = 0.0;
  double g_tilde = 0.0;
  double eps_tilde = 0.0;
  /// Order parameter where the two competing minima merge.
  double z = 0.0;
};

namespace detail {

inline ModelParams single_subset(double g, double eps, double h) {
  ModelParams p;
  p.n_fractions = {1.0};
  p.g_tilde = g;
  p.eps_tilde = {eps};
  p.h_tilde = {h};
  return p;
}

/// Size of the first-order jump in z when g is scanned across L_lambda at fixed
/// (eps, h); zero when the crossing is continuous.
inline std::optional<CoexistencePoint> crossing_along_g(double eps, double h, int samples = 120) {
  const double gr = critical_coupling({1.0}, {eps});
  ParameterPath path{single_subset(gr - 0.25, eps, h), single_subset(gr + 0.25, eps, h), samples};
  auto tr = trace_first_order(path);
  for (const auto& p : tr.points)
    if (p.minimizers.size() >= 2) return p;
  return std::nullopt;
}

}  // namespace detail

/// Endpoint of the first-order surface at fixed h: solves E' = E'' = E''' = 0 in
/// (z, g, eps). The seed comes from a bias scan for the vanishing jump.
inline WingPoint wing_critical_point(double h, std::optional<WingPoint> guess = std::nullopt) {
  detail::require(h != 0.0, "wing lines live at nonzero symmetry-breaking bias");
  Eigen::Vector3d x;
  if (guess) {
    x << guess->z, guess->g_tilde, guess->eps_tilde;
  } else {
    // Bisect on eps between a continuous crossing and a first-order one.
    double lo = 0.5, hi = 0.5 + 0.5;
    for (int i = 0; i < 20 && detail::crossing_along_g(lo, h); ++i) lo -= 0.05;
    if (!detail::crossing_along_g(hi, h)) throw ConvergenceError("no first-order segment found for wing search");
    std::optional<CoexistencePoint> last = detail::crossing_along_g(hi, h);
    for (int i = 0; i < 40 && hi - lo > 1e-7; ++i) {
      const double mid = 0.5 * (lo + hi);
      auto c = detail::crossing_along_g(mid, h);
      if (c) {
        hi = mid;
        last = c;
      } else {
        lo = mid;
      }
    }
    const double zmid = 0.5 * (last->minimizers.front() + last->minimizers.back());
    x << zmid, last->params.g_tilde, hi;
  }
  const auto f = [h](const Eigen::VectorXd& y) {
    const auto p = detail::single_subset(y(1), y(2), h);
    Eigen::VectorXd r(3);
    r << energy_derivative(y(0), p, 1), energy_derivative(y(0), p, 2), energy_derivative(y(0), p, 3);
    return r;
  };
  auto res = detail::newton_fd(f, x, 1e-12, 100);
  if (!res.converged) throw ConvergenceError("wing critical point Newton iteration did not converge");
  return {h, res.x(1), res.x(2), res.x(0)};
}

/// L_+ (h > 0) and L_- (h < 0) samples for the requested bias values.
inline std::vector<WingPoint> wing_critical_lines(const std::vector<double>& h_values) {
  std::vector<WingPoint> out;
  std::optional<WingPoint> prev;
  for (double h : h_values) {
    std::optional<WingPoint> seed;
    if (prev && (prev->h_tilde > 0) == (h > 0) && std::abs(prev->h_tilde - h) < 0.5 * std::abs(h)) seed = prev;
    out.push_back(wing_critical_point(h, seed));
    prev = out.back();
  }
  return out;
}

}  // namespace multicrit
