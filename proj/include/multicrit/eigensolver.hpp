#pragma once

// Lowest eigenpairs of a real symmetric matrix: dense solve for small problems,
// thick-restart Lanczos with full reorthogonalization otherwise.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <random>

#include "multicrit/errors.hpp"
#include "multicrit/model.hpp"

namespace multicrit {

struct EigenOptions {
  int count = 4;
  /// Dense solver below this dimension.
  Eigen::Index dense_threshold = 2000;
  /// Residual tolerance relative to the spectral scale.
  double tol = 1e-10;
  int max_restarts = 500;
  /// Krylov basis size; 0 picks max(2 count + 20, 60).
  int basis_size = 0;
};

struct EigenPairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  int restarts = 0;
  bool dense = false;
};

namespace detail {

inline void orthogonalize(Eigen::Ref<Eigen::VectorXd> w, const Eigen::MatrixXd& V, Eigen::Index cols) {
  // two passes of classical Gram-Schmidt
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::VectorXd c = V.leftCols(cols).transpose() * w;
    w -= V.leftCols(cols) * c;
  }
}

inline EigenPairs lanczos_lowest(const SparseMatrix& H, const EigenOptions& opts) {
  const Eigen::Index n = H.rows();
  const int k = opts.count;
  const int m = static_cast<int>(std::min<Eigen::Index>(n, opts.basis_size > 0 ? opts.basis_size : std::max(2 * k + 20, 60)));
  detail::require(m > k, "Krylov basis must exceed the number of wanted pairs");
  Eigen::MatrixXd V(n, m), W(n, m);
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd start(n);
  for (Eigen::Index i = 0; i < n; ++i) start(i) = gauss(rng);
  V.col(0) = start.normalized();
  Eigen::Index filled = 0;  // columns of V with H V stored in W
  Eigen::Index basis = 1;
  const double scale = std::max(1.0, H.cwiseAbs().sum() / static_cast<double>(n));
  EigenPairs out;
  for (int restart = 0; restart <= opts.max_restarts; ++restart) {
    // expand to m vectors: new vector = H (last vector), orthogonalized
    while (true) {
      for (; filled < basis; ++filled) W.col(filled) = H * V.col(filled);
      if (basis == m) break;
      Eigen::VectorXd w = W.col(basis - 1);
      orthogonalize(w, V, basis);
      const double nrm = w.norm();
      if (nrm < 1e-12 * scale) {
        // invariant subspace: continue with a fresh random direction
        for (Eigen::Index i = 0; i < n; ++i) w(i) = gauss(rng);
        orthogonalize(w, V, basis);
      }
      V.col(basis++) = w.normalized();
    }
    const Eigen::MatrixXd T = V.transpose() * W;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (T + T.transpose()));
    const Eigen::MatrixXd Y = V * es.eigenvectors();
    const Eigen::MatrixXd HY = W * es.eigenvectors();
    double worst = 0.0;
    Eigen::Index worst_idx = 0;
    for (Eigen::Index i = 0; i < k; ++i) {
      const double res = (HY.col(i) - es.eigenvalues()(i) * Y.col(i)).norm();
      if (res > worst) {
        worst = res;
        worst_idx = i;
      }
    }
    out.restarts = restart;
    if (worst <= opts.tol * scale) {
      out.values = es.eigenvalues().head(k);
      out.vectors = Y.leftCols(k);
      return out;
    }
    // thick restart: keep the lowest p Ritz vectors plus the residual direction
    const Eigen::Index p = std::max<Eigen::Index>(k + 1, (m + k) / 2);
    Eigen::VectorXd r = HY.col(worst_idx) - es.eigenvalues()(worst_idx) * Y.col(worst_idx);
    V.leftCols(p) = Y.leftCols(p);
    W.leftCols(p) = HY.leftCols(p);
    orthogonalize(r, V, p);
    V.col(p) = r.normalized();
    filled = p;
    basis = p + 1;
  }
  throw ConvergenceError("Lanczos eigensolver did not converge");
}

}  // namespace detail

inline EigenPairs lowest_eigenpairs(const SparseMatrix& H, const EigenOptions& opts = {}) {
  detail::require(H.rows() == H.cols(), "eigensolver needs a square matrix");
  detail::require(opts.count >= 1 && opts.count <= H.rows(), "invalid eigenpair count");
  if (H.rows() < opts.dense_threshold) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(H)};
    if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed");
    EigenPairs out;
    out.values = es.eigenvalues().head(opts.count);
    out.vectors = es.eigenvectors().leftCols(opts.count);
    out.dense = true;
    return out;
  }
  return detail::lanczos_lowest(H, opts);
}

}  // namespace multicrit
