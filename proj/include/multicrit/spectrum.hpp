#pragma once

// Excitation energies: the eta -> 0 curvature formula and finite-eta exact
// diagonalization with adaptive Fock truncation.

#include <cmath>
#include <complex>
#include <optional>
#include <utility>
#include <ostream>
#include <vector>

#include "multicrit/eigensolver.hpp"
#include "multicrit/errors.hpp"
#include "multicrit/landau.hpp"
#include "multicrit/model.hpp"
#include "multicrit/parallel.hpp"
#include "multicrit/phase.hpp"

namespace multicrit {

/// Mean-field excitation energy in units of omega, eps = sqrt(2 g^2 E''(z_G)).
/// Returns 0 on critical points (curvature zero within tolerance).
inline double mf_gap(const ModelParams& params, double curvature_tol = 1e-10) {
  params.validate();
  double z = 0.0;
  if (params.g_tilde > 0.0) {
    // Degenerate minima share the curvature by symmetry; take the softest one.
    const auto pt = minimize(params);
    double softest = std::numeric_limits<double>::infinity();
    for (double zm : pt.minimizers) {
      const double c = scaled_curvature(zm, params);
      if (c < softest) {
        softest = c;
        z = zm;
      }
    }
  }
  const double c = scaled_curvature(z, params);
  if (c < -curvature_tol) throw ConvergenceError("negative curvature at a reported minimum");
  return c <= curvature_tol ? 0.0 : std::sqrt(c);
}

struct SpectrumOptions {
  int count = 4;
  int n_max_start = 16;
  int n_max_cap = 512;
  /// Relative change of ground energy and gap accepted between doublings.
  double truncation_tol = 1e-9;
  EigenOptions eigen{};
};

struct SpectrumResult {
  std::vector<double> eigenvalues;
  /// E_1 - E_0.
  double gap = 0.0;
  /// E_d - E_0 where d is the number of degenerate mean-field minima (1 in the
  /// normal phase, 2 for a superradiant pair): the gap above the tunneling
  /// multiplet, comparable with mf_gap.
  double excitation_gap = 0.0;
  int ground_multiplicity = 1;
  /// Total <J_z> summed over all halves.
  double jz = 0.0;
  std::complex<double> a{};
  double photon_number = 0.0;
  /// <(a + a^dag)^2>, nonzero in both phases; usable when <a> vanishes by parity.
  double quadrature_sq = 0.0;
  int n_max_used = 0;
  bool converged = false;
  Eigen::VectorXd ground_state;
};

namespace detail {

inline int ground_multiplicity(const ModelParams& p) {
  if (!(p.g_tilde > 0.0)) return 1;
  const auto pt = minimize(p);
  return static_cast<int>(pt.minimizers.size());
}

/// Isometries onto the +1 and -1 eigenspaces of a signed permutation P with P^2 = 1.
inline std::pair<SparseMatrix, SparseMatrix> parity_sectors(const SparseMatrix& P) {
  const Eigen::Index n = P.rows();
  std::vector<Eigen::Index> target(static_cast<std::size_t>(n));
  std::vector<double> sign(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < n; ++r)
    for (SparseMatrix::InnerIterator it(P, r); it; ++it) {
      target[static_cast<std::size_t>(it.col())] = r;
      sign[static_cast<std::size_t>(it.col())] = it.value();
    }
  std::vector<Eigen::Triplet<double>> plus, minus;
  Eigen::Index np = 0, nm = 0;
  const double inv = 1.0 / std::sqrt(2.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j = target[static_cast<std::size_t>(i)];
    const double s = sign[static_cast<std::size_t>(i)];
    if (j == i) {
      (s > 0 ? plus : minus).emplace_back(i, s > 0 ? np++ : nm++, 1.0);
    } else if (i < j) {
      plus.emplace_back(i, np, inv);
      plus.emplace_back(j, np++, s * inv);
      minus.emplace_back(i, nm, inv);
      minus.emplace_back(j, nm++, -s * inv);
    }
  }
  SparseMatrix qp(n, np), qm(n, nm);
  qp.setFromTriplets(plus.begin(), plus.end());
  qm.setFromTriplets(minus.begin(), minus.end());
  return {qp, qm};
}

/// Lowest eigenpairs, solved per parity sector when the Hamiltonian has the
/// half-swapped Z2 symmetry (no symmetry-breaking bias). Superradiant tunneling
/// doublets are numerically degenerate and would otherwise be missed by Krylov
/// iteration; each member lives in a different sector.
inline EigenPairs lowest_with_symmetry(const SparseMatrix& H, const HilbertSpace& space, bool symmetric,
                                       EigenOptions eo) {
  if (!symmetric) return lowest_eigenpairs(H, eo);
  const auto [qp, qm] = parity_sectors(parity_operator(space, true));
  std::vector<std::pair<double, Eigen::VectorXd>> all;
  for (const SparseMatrix* q : {&qp, &qm}) {
    if (q->cols() == 0) continue;
    const SparseMatrix qt = q->transpose();
    const SparseMatrix hs = qt * H * (*q);
    EigenOptions so = eo;
    so.count = std::min<int>(eo.count, static_cast<int>(hs.rows()));
    const auto part = lowest_eigenpairs(hs, so);
    for (Eigen::Index i = 0; i < part.values.size(); ++i)
      all.emplace_back(part.values(i), (*q) * part.vectors.col(i));
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  EigenPairs out;
  const auto k = std::min<std::size_t>(all.size(), static_cast<std::size_t>(eo.count));
  out.values.resize(static_cast<Eigen::Index>(k));
  out.vectors.resize(H.rows(), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    out.values(static_cast<Eigen::Index>(i)) = all[i].first;
    out.vectors.col(static_cast<Eigen::Index>(i)) = all[i].second;
  }
  return out;
}

inline SpectrumResult spectrum_at(const ModelParams& params, int n_max, int multiplicity,
                                  const SpectrumOptions& opts) {
  const auto space = HilbertSpace::for_params(params, n_max);
  const auto ops = build_operators(params, space);
  EigenOptions eo = opts.eigen;
  eo.count = std::min<int>(std::max(opts.count, multiplicity + 1), static_cast<int>(space.total_dim()));
  const auto pairs =
      lowest_with_symmetry(ops.hamiltonian(params.g_tilde), space, !params.has_symmetry_breaking(), eo);
  SpectrumResult res;
  res.eigenvalues.assign(pairs.values.data(), pairs.values.data() + pairs.values.size());
  res.gap = res.eigenvalues.at(1) - res.eigenvalues.at(0);
  res.ground_multiplicity = multiplicity;
  res.excitation_gap = res.eigenvalues.at(static_cast<std::size_t>(multiplicity)) - res.eigenvalues.at(0);
  const Eigen::VectorXd psi = pairs.vectors.col(0);
  res.jz = psi.dot(ops.jz_total * psi);
  res.a = psi.dot(ops.annihilation * psi);
  res.photon_number = psi.dot(ops.number * psi);
  const SparseMatrix x = ops.annihilation + SparseMatrix(ops.annihilation.transpose());
  const Eigen::VectorXd xpsi = x * psi;
  res.quadrature_sq = xpsi.squaredNorm();
  res.n_max_used = n_max;
  res.ground_state = psi;
  return res;
}

inline bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)) || std::abs(a - b) < 1e-300;
}

}  // namespace detail

/// Lowest eigenpairs at finite eta with n_max doubled from n_max_start until
/// the ground energy and both gaps change by less than truncation_tol. A
/// tunneling splitting is compared on the scale of the excitation gap, since it
/// sits at rounding level deep in the superradiant phase.
inline SpectrumResult exact_spectrum(const ModelParams& params, const SpectrumOptions& opts = {}) {
  params.validate();
  detail::require(opts.n_max_start >= 1 && opts.n_max_cap >= opts.n_max_start, "invalid Fock truncation range");
  const int d = detail::ground_multiplicity(params);
  std::optional<SpectrumResult> prev;
  for (int n_max = opts.n_max_start;; n_max = std::min(2 * n_max, opts.n_max_cap)) {
    auto cur = detail::spectrum_at(params, n_max, d, opts);
    if (prev && detail::close_rel(cur.eigenvalues[0], prev->eigenvalues[0], opts.truncation_tol) &&
        std::abs(cur.gap - prev->gap) <= opts.truncation_tol * std::max(cur.gap, cur.excitation_gap) &&
        detail::close_rel(cur.excitation_gap, prev->excitation_gap, opts.truncation_tol)) {
      cur.converged = true;
      return cur;
    }
    if (n_max == opts.n_max_cap) return cur;
    prev = std::move(cur);
  }
}

struct GapScanRow {
  double eta = 0.0;
  SpectrumResult spectrum;
};

/// exact_spectrum across eta values, each with its own adaptive truncation.
inline std::vector<GapScanRow> gap_scan(const ModelParams& params, std::vector<double> etas,
                                        const SpectrumOptions& opts = {}, int jobs = 1) {
  detail::require(!etas.empty(), "gap scan needs at least one eta");
  std::sort(etas.begin(), etas.end());
  return parallel_map<GapScanRow>(etas.size(), [&](std::size_t i) {
    ModelParams p = params;
    p.eta = etas[i];
    auto s = exact_spectrum(p, opts);
    s.ground_state = Eigen::VectorXd();
    return GapScanRow{etas[i], std::move(s)};
  }, jobs);
}

inline void write_gap_csv(std::ostream& os, const std::vector<GapScanRow>& rows) {
  os << "eta,gap,excitation_gap,jz,photon_number,n_max_used,converged\n";
  os.precision(17);
  for (const auto& r : rows)
    os << r.eta << ',' << r.spectrum.gap << ',' << r.spectrum.excitation_gap << ',' << r.spectrum.jz << ','
       << r.spectrum.photon_number << ',' << r.spectrum.n_max_used << ',' << (r.spectrum.converged ? 1 : 0) << '\n';
}

}  // namespace multicrit
