#pragma once

// Biased multi-subset qubit-boson model on a truncated Fock space times the
// maximal-spin sector of each qubit half.
//
// Conventions (all energies in units of the boson frequency omega):
//   W = Omega/omega = 1/(2 N eta)
//   H/omega = a^dag a + W sum_k S_z,k
//           + W sum_j [ eps_j (S_x,2j-1 - S_x,2j) + h_j (S_x,2j-1 + S_x,2j) ]
//           + g/(2 N sqrt(eta)) (a + a^dag) sum_k S_x,k
// where S are spin-(N_j/2) operators of half k. Each qubit then sees
// (Omega/2) sigma_z +- (eps_j/2) sigma_x, so the mean-field energy per qubit is
// z^2/(4 g^2) - 1/4 sum_j n_j (sqrt((z+eps_j)^2+1) + sqrt((z-eps_j)^2+1))
// with z = 2 sqrt(eta) g <a>, and the normal-phase gap is sqrt(1 - g^2).

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "multicrit/errors.hpp"

namespace multicrit {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct ModelParams {
  std::vector<double> n_fractions{1.0};
  double g_tilde = 0.0;
  std::vector<double> eps_tilde{0.0};
  /// Symmetry-breaking biases; empty means all zero.
  std::vector<double> h_tilde{};
  /// eta = omega / (2 N Omega).
  double eta = 1e-2;
  /// Qubits per half summed over subsets (each half of subset j holds n_j N qubits).
  int N = 1;
  double omega = 1.0;

  std::size_t subsets() const { return n_fractions.size(); }
  double bias(std::size_t j) const { return eps_tilde[j]; }
  double field(std::size_t j) const { return h_tilde.empty() ? 0.0 : h_tilde[j]; }

  bool has_symmetry_breaking() const {
    for (double h : h_tilde)
      if (h != 0.0) return true;
    return false;
  }

  /// Omega / omega.
  double qubit_frequency() const { return 1.0 / (2.0 * N * eta); }

  void validate() const {
    using detail::require;
    require(!n_fractions.empty(), "model needs at least one subset (M >= 1)");
    require(eps_tilde.size() == n_fractions.size(),
            "eps_tilde must have one entry per subset");
    require(h_tilde.empty() || h_tilde.size() == n_fractions.size(),
            "h_tilde must be empty or have one entry per subset");
    double total = 0.0;
    for (double n : n_fractions) {
      require(n > 0.0, "all number fractions n_j must be positive");
      total += n;
    }
    require(std::abs(total - 1.0) <= 1e-12, "number fractions must sum to 1");
    require(g_tilde >= 0.0, "g_tilde must be non-negative");
    require(eta > 0.0, "eta must be positive");
    require(std::isfinite(g_tilde) && std::isfinite(eta), "parameters must be finite");
  }

  /// Qubits per half N_j = n_j N; throws unless every N_j is a positive integer.
  std::vector<int> half_sizes() const {
    validate();
    detail::require(N >= 1, "N must be at least 1 for a finite Hilbert space");
    std::vector<int> sizes;
    for (double n : n_fractions) {
      const double exact = n * N;
      const double rounded = std::round(exact);
      detail::require(std::abs(exact - rounded) <= 1e-9 && rounded >= 1.0,
                      "n_j * N must be a positive integer for every subset");
      sizes.push_back(static_cast<int>(rounded));
    }
    return sizes;
  }
};

/// Fock truncation times per-half spin dimensions, basis |n> (x) |m_1> ... |m_2M>
/// with the Fock index varying slowest.
class HilbertSpace {
public:
  HilbertSpace(int n_max, std::vector<int> half_sizes) : n_max_(n_max) {
    detail::require(n_max >= 1, "Fock truncation n_max must be at least 1");
    for (int n : half_sizes) {
      detail::require(n >= 1, "half sizes must be positive");
      spin_dims_.push_back(n + 1);
      spin_dims_.push_back(n + 1);
      half_sizes_.push_back(n);
      half_sizes_.push_back(n);
    }
  }

  static HilbertSpace for_params(const ModelParams& params, int n_max) {
    return HilbertSpace(n_max, params.half_sizes());
  }

  int n_max() const { return n_max_; }
  int fock_dim() const { return n_max_ + 1; }
  /// Qubit count of each of the 2M halves.
  const std::vector<int>& half_sizes() const { return half_sizes_; }
  const std::vector<int>& spin_dims() const { return spin_dims_; }

  Eigen::Index spin_dim() const {
    Eigen::Index d = 1;
    for (int s : spin_dims_) d *= s;
    return d;
  }
  Eigen::Index total_dim() const { return fock_dim() * spin_dim(); }

  bool matches(const ModelParams& params) const {
    auto sizes = params.half_sizes();
    if (2 * sizes.size() != half_sizes_.size()) return false;
    for (std::size_t j = 0; j < sizes.size(); ++j)
      if (sizes[j] != half_sizes_[2 * j]) return false;
    return true;
  }

private:
  int n_max_;
  std::vector<int> half_sizes_;
  std::vector<int> spin_dims_;
};

struct SpinMatrices {
  Eigen::MatrixXcd x, y, z;
};

namespace detail {

inline SparseMatrix identity(Eigen::Index n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

/// Spin-(N/2) matrices in the basis m = j, j-1, ..., -j.
inline void spin_real_parts(int half_size, SparseMatrix& sx, SparseMatrix& sz) {
  const int d = half_size + 1;
  const double j = 0.5 * half_size;
  std::vector<Eigen::Triplet<double>> tx, tz;
  for (int i = 0; i < d; ++i) {
    const double m = j - i;
    tz.emplace_back(i, i, m);
    if (i > 0) {
      // <m+1| J+ |m>
      const double lad = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
      tx.emplace_back(i - 1, i, 0.5 * lad);
      tx.emplace_back(i, i - 1, 0.5 * lad);
    }
  }
  sx.resize(d, d);
  sz.resize(d, d);
  sx.setFromTriplets(tx.begin(), tx.end());
  sz.setFromTriplets(tz.begin(), tz.end());
}

/// Embeds a single-half operator at position k of the spin register.
inline SparseMatrix embed(const SparseMatrix& local, std::size_t k,
                          const std::vector<int>& dims) {
  Eigen::Index before = 1, after = 1;
  for (std::size_t i = 0; i < k; ++i) before *= dims[i];
  for (std::size_t i = k + 1; i < dims.size(); ++i) after *= dims[i];
  SparseMatrix left = Eigen::kroneckerProduct(identity(before), local).eval();
  return Eigen::kroneckerProduct(left, identity(after)).eval();
}

inline SparseMatrix annihilation(int n_max) {
  std::vector<Eigen::Triplet<double>> t;
  for (int n = 1; n <= n_max; ++n) t.emplace_back(n - 1, n, std::sqrt(double(n)));
  SparseMatrix a(n_max + 1, n_max + 1);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

}  // namespace detail

inline SpinMatrices collective_spin_ops(int half_size) {
  detail::require(half_size >= 1, "collective spin needs at least one qubit");
  SparseMatrix sx, sz;
  detail::spin_real_parts(half_size, sx, sz);
  const int d = half_size + 1;
  const double j = 0.5 * half_size;
  Eigen::MatrixXcd jp = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 1; i < d; ++i) {
    const double m = j - i;
    jp(i - 1, i) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
  }
  SpinMatrices s;
  s.x = Eigen::MatrixXd(sx).cast<std::complex<double>>();
  s.z = Eigen::MatrixXd(sz).cast<std::complex<double>>();
  s.y = (jp - jp.adjoint()) / std::complex<double>(0.0, 2.0);
  return s;
}

/// The Hamiltonian split as H(g) = bare + g * coupling, plus observables, all in
/// the same basis. Immutable after construction.
struct ModelOperators {
  HilbertSpace space;
  SparseMatrix bare;
  SparseMatrix coupling;
  SparseMatrix jz_total;
  SparseMatrix number;
  SparseMatrix annihilation;

  SparseMatrix hamiltonian(double g_tilde) const {
    SparseMatrix h = bare + g_tilde * coupling;
    h.makeCompressed();
    return h;
  }
};

inline ModelOperators build_operators(const ModelParams& params, const HilbertSpace& space) {
  params.validate();
  detail::require(space.matches(params), "Hilbert space does not match the model's subsets");
  const auto& dims = space.spin_dims();
  const Eigen::Index ds = space.spin_dim();
  const double w = params.qubit_frequency();

  SparseMatrix spin_bare(ds, ds), sx_total(ds, ds), sz_total(ds, ds);
  for (std::size_t k = 0; k < dims.size(); ++k) {
    SparseMatrix sx, sz;
    detail::spin_real_parts(space.half_sizes()[k], sx, sz);
    const SparseMatrix sxk = detail::embed(sx, k, dims);
    const SparseMatrix szk = detail::embed(sz, k, dims);
    const std::size_t j = k / 2;
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    const double transverse = sign * params.bias(j) + params.field(j);
    spin_bare += w * szk + (w * transverse) * sxk;
    sx_total += sxk;
    sz_total += szk;
  }

  const SparseMatrix a = detail::annihilation(space.n_max());
  const SparseMatrix adag = a.transpose();
  const SparseMatrix num = (adag * a).pruned();
  const SparseMatrix x = a + adag;
  const SparseMatrix id_f = detail::identity(space.fock_dim());
  const SparseMatrix id_s = detail::identity(ds);

  ModelOperators ops{space, {}, {}, {}, {}, {}};
  ops.bare = Eigen::kroneckerProduct(num, id_s).eval();
  ops.bare += SparseMatrix(Eigen::kroneckerProduct(id_f, spin_bare).eval());
  ops.coupling = Eigen::kroneckerProduct(x, sx_total).eval();
  ops.coupling *= 1.0 / (2.0 * params.N * std::sqrt(params.eta));
  ops.jz_total = Eigen::kroneckerProduct(id_f, sz_total).eval();
  ops.number = Eigen::kroneckerProduct(num, id_s).eval();
  ops.annihilation = Eigen::kroneckerProduct(a, id_s).eval();
  for (SparseMatrix* m : {&ops.bare, &ops.coupling, &ops.jz_total, &ops.number, &ops.annihilation}) {
    m->prune(0.0);
    m->makeCompressed();
  }
  return ops;
}

/// H/omega at params.g_tilde, or at g_tilde_override when given (used by ramps).
inline SparseMatrix build_hamiltonian(const ModelParams& params, const HilbertSpace& space,
                                      std::optional<double> g_tilde_override = std::nullopt) {
  const double g = g_tilde_override.value_or(params.g_tilde);
  detail::require(g >= 0.0, "coupling override must be non-negative");
  return build_operators(params, space).hamiltonian(g);
}

/// Product of the Fock vacuum and the local ground state of every half.
inline Eigen::VectorXd ground_state_at_zero_coupling(const ModelParams& params,
                                                     const HilbertSpace& space) {
  params.validate();
  const auto& halves = space.half_sizes();
  Eigen::VectorXd state = Eigen::VectorXd::Unit(space.fock_dim(), 0);
  for (std::size_t k = 0; k < halves.size(); ++k) {
    SparseMatrix sx, sz;
    detail::spin_real_parts(halves[k], sx, sz);
    const std::size_t j = k / 2;
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    const Eigen::MatrixXd local =
        Eigen::MatrixXd(sz) + (sign * params.bias(j) + params.field(j)) * Eigen::MatrixXd(sx);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(local);
    Eigen::VectorXd v = es.eigenvectors().col(0);
    Eigen::Index imax;
    v.cwiseAbs().maxCoeff(&imax);
    if (v(imax) < 0) v = -v;
    state = Eigen::kroneckerProduct(state, v).eval();
  }
  state.normalize();
  return state;
}

/// Z2 parity exp(i pi [a^dag a + sum_k (S_z,k + N_k/2)]). With swap_halves the
/// two halves of every subset are exchanged as well, which is the symmetry that
/// survives nonzero eps_j (but not h_j).
inline SparseMatrix parity_operator(const HilbertSpace& space, bool swap_halves) {
  const auto& dims = space.spin_dims();
  const std::size_t nh = dims.size();
  const Eigen::Index ds = space.spin_dim();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(space.total_dim()));
  std::vector<int> digits(nh);
  for (Eigen::Index s = 0; s < ds; ++s) {
    Eigen::Index rest = s;
    for (std::size_t k = nh; k-- > 0;) {
      digits[k] = static_cast<int>(rest % dims[k]);
      rest /= dims[k];
    }
    int excitations = 0;  // N_k/2 + m_k = N_k - index
    for (std::size_t k = 0; k < nh; ++k) excitations += (dims[k] - 1) - digits[k];
    std::vector<int> target = digits;
    if (swap_halves)
      for (std::size_t k = 0; k + 1 < nh; k += 2) std::swap(target[k], target[k + 1]);
    Eigen::Index s2 = 0;
    for (std::size_t k = 0; k < nh; ++k) s2 = s2 * dims[k] + target[k];
    for (int n = 0; n < space.fock_dim(); ++n) {
      const double sign = ((n + excitations) % 2 == 0) ? 1.0 : -1.0;
      t.emplace_back(n * ds + s2, n * ds + s, sign);
    }
  }
  SparseMatrix p(space.total_dim(), space.total_dim());
  p.setFromTriplets(t.begin(), t.end());
  return p;
}

}  // namespace multicrit
