#pragma once

// Linear coupling quench g(t) = g_final t / tau from the g = 0 ground state,
// closed (state vector) or with phonon heating/damping (Lindblad, dense rho).

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <optional>
#include <ostream>
#include <vector>

#include "multicrit/errors.hpp"
#include "multicrit/model.hpp"
#include "multicrit/parallel.hpp"
#include "multicrit/spectrum.hpp"

namespace multicrit {

using cplx = std::complex<double>;

struct NoiseRates {
  /// gamma (n_th + 1), units of omega.
  double gamma_down = 0.0;
  /// gamma n_th, units of omega.
  double gamma_up = 0.0;
};

struct QuenchSpec {
  /// Biases fixed at the target point; params.g_tilde is the ramp endpoint.
  ModelParams params;
  /// Ramp duration in units of 1/omega.
  double tau = 1.0;
  std::optional<NoiseRates> noise;
  /// Local error tolerance; 0 picks 1e-9 (unitary) or 1e-8 (Lindblad).
  double integrator_tol = 0.0;
  int n_max = 32;
  int n_max_cap = 512;
  /// Number of trajectory samples including both ends.
  int samples = 21;

  double tolerance() const { return integrator_tol > 0 ? integrator_tol : (noise ? 1e-8 : 1e-9); }

  void validate() const {
    params.validate();
    detail::require(tau > 0.0, "quench duration tau must be positive");
    detail::require(!params.has_symmetry_breaking(), "quenches run at zero symmetry-breaking bias");
    if (noise) detail::require(noise->gamma_down >= 0.0 && noise->gamma_up >= 0.0, "noise rates must be non-negative");
    detail::require(samples >= 2, "trajectory needs at least two samples");
    detail::require(n_max >= 4 && n_max_cap >= n_max, "invalid Fock truncation for the quench");
  }
};

struct QuenchResult {
  std::vector<double> times;
  std::vector<double> jz;
  std::vector<double> photon_number;
  /// Norm squared (unitary) or trace (Lindblad) at each sample.
  std::vector<double> trace;
  /// <a> at each sample; stays zero by parity.
  std::vector<double> coherence;
  double jz_final = 0.0;
  double jz_ground = 0.0;
  double jz_residual = 0.0;
  double eta = 0.0;
  double tau = 0.0;
  bool noisy = false;
  int n_max_used = 0;
  double max_trace_error = 0.0;
  /// Most negative eigenvalue of rho seen at the samples (Lindblad only).
  double min_eigenvalue = 0.0;
  std::size_t steps = 0;
  double wall_seconds = 0.0;
};

namespace detail {

/// Explicit Runge-Kutta steps lose norm systematically; the per-step target sits
/// two decades below the requested tolerance so the accumulated drift stays within it.
inline constexpr double kLocalErrorFraction = 1e-2;

struct TruncationOverflow {};

/// Ground-state <J_z> at the ramp endpoint (shared by every tau at one eta).
inline double ground_jz(const ModelParams& params) { return exact_spectrum(params).jz; }

/// Weight in the top Fock levels n >= n_max - 2.
inline double top_weight(const Eigen::VectorXd& fock_populations) {
  const Eigen::Index n = fock_populations.size();
  return fock_populations.tail(std::min<Eigen::Index>(3, n)).sum();
}

template <class Stepper, class State, class System, class AfterStep, class Sample>
std::size_t integrate_sampled(Stepper stepper, System&& sys, State& x, double t_end, int samples,
                              double dt0, AfterStep&& after_step, Sample&& sample) {
  namespace odeint = boost::numeric::odeint;
  double t = 0.0, dt = dt0;
  std::size_t steps = 0;
  sample(0, t, x);
  for (int k = 1; k < samples; ++k) {
    const double target = t_end * k / (samples - 1);
    while (t < target) {
      double step = std::min(dt, target - t);
      const double t_before = t;
      if (stepper.try_step(sys, x, t, step) == odeint::success) {
        ++steps;
        if (after_step(x)) {
          if constexpr (requires { stepper.reset(); }) stepper.reset();
        }
        if (t >= target - 1e-14 * std::max(1.0, t_end)) t = target;
      }
      if (t == t_before && step < 1e-15 * std::max(1.0, t_end)) throw ConvergenceError("integrator step size underflow");
      dt = step;
      if (steps > 50000000) throw ConvergenceError("integrator exceeded the step budget");
    }
    sample(k, t, x);
  }
  return steps;
}

inline QuenchResult evolve_unitary_at(const QuenchSpec& spec, int n_max, double jz_ground) {
  namespace odeint = boost::numeric::odeint;
  const auto space = HilbertSpace::for_params(spec.params, n_max);
  const auto ops = build_operators(spec.params, space);
  const SparseMatrix& H0 = ops.bare;
  const SparseMatrix& H1 = ops.coupling;
  const double rate = spec.params.g_tilde / spec.tau;
  const Eigen::Index d = space.total_dim();
  const Eigen::Index ds = space.spin_dim();
  using State = std::vector<cplx>;
  State psi(static_cast<std::size_t>(d));
  const Eigen::VectorXd psi0 = ground_state_at_zero_coupling(spec.params, space);
  for (Eigen::Index i = 0; i < d; ++i) psi[static_cast<std::size_t>(i)] = psi0(i);

  auto sys = [&](const State& x, State& dx, double t) {
    Eigen::Map<const Eigen::VectorXcd> v(x.data(), d);
    Eigen::Map<Eigen::VectorXcd> dv(dx.data(), d);
    dv.noalias() = H0 * v;
    dv.noalias() += (rate * t) * (H1 * v);
    dv *= cplx(0.0, -1.0);
  };
  QuenchResult res;
  res.times.resize(static_cast<std::size_t>(spec.samples));
  res.jz.resize(res.times.size());
  res.photon_number.resize(res.times.size());
  res.trace.resize(res.times.size());
  res.coherence.resize(res.times.size());
  auto sample = [&](int k, double t, const State& x) {
    Eigen::Map<const Eigen::VectorXcd> v(x.data(), d);
    const auto kk = static_cast<std::size_t>(k);
    res.times[kk] = t;
    res.trace[kk] = v.squaredNorm();
    res.jz[kk] = v.dot(ops.jz_total * v).real();
    res.photon_number[kk] = v.dot(ops.number * v).real();
    res.coherence[kk] = std::abs(v.dot(ops.annihilation * v));
    Eigen::VectorXd pops(space.fock_dim());
    for (int n = 0; n < space.fock_dim(); ++n) pops(n) = v.segment(n * ds, ds).squaredNorm();
    if (top_weight(pops) > 1e-10) throw TruncationOverflow{};
  };
  const double tol = spec.tolerance();
  const double local = kLocalErrorFraction * tol;
  auto stepper = odeint::make_controlled(local, local, odeint::runge_kutta_fehlberg78<State>());
  res.steps = integrate_sampled(stepper, sys, psi, spec.tau, spec.samples, 1e-3, [](State&) { return false; }, sample);
  for (double tr : res.trace) res.max_trace_error = std::max(res.max_trace_error, std::abs(tr - 1.0));
  res.jz_final = res.jz.back();
  res.jz_ground = jz_ground;
  res.jz_residual = std::abs(res.jz_final - jz_ground);
  res.n_max_used = n_max;
  return res;
}

inline QuenchResult evolve_lindblad_at(const QuenchSpec& spec, int n_max, double jz_ground) {
  namespace odeint = boost::numeric::odeint;
  const auto space = HilbertSpace::for_params(spec.params, n_max);
  const auto ops = build_operators(spec.params, space);
  const NoiseRates noise = spec.noise.value_or(NoiseRates{});
  const double rate = spec.params.g_tilde / spec.tau;
  const Eigen::Index d = space.total_dim();
  const Eigen::Index ds = space.spin_dim();
  using SpC = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
  const SpC H0 = ops.bare.cast<cplx>();
  const SpC H1 = ops.coupling.cast<cplx>();
  const SpC A = ops.annihilation.cast<cplx>();
  const SpC Ad = SpC(A.adjoint());
  const SparseMatrix n_op = ops.number;
  const SparseMatrix id = detail::identity(d);
  // Non-Hermitian part: -i H - (gd/2) a^dag a - (gu/2) a a^dag
  const SpC decay = (0.5 * noise.gamma_down * n_op + 0.5 * noise.gamma_up * (n_op + id)).cast<cplx>();

  using State = std::vector<cplx>;
  State rho(static_cast<std::size_t>(d * d), cplx(0.0));
  {
    const Eigen::VectorXd psi0 = ground_state_at_zero_coupling(spec.params, space);
    Eigen::Map<Eigen::MatrixXcd> r(rho.data(), d, d);
    r = (psi0 * psi0.transpose()).cast<cplx>();
  }
  Eigen::MatrixXcd K(d, d), tmp(d, d);
  auto sys = [&](const State& x, State& dx, double t) {
    Eigen::Map<const Eigen::MatrixXcd> r(x.data(), d, d);
    Eigen::Map<Eigen::MatrixXcd> dr(dx.data(), d, d);
    // K rho + rho K^dag with K = -i H - decay, then the jump terms.
    K.noalias() = H0 * r;
    K.noalias() += (rate * t) * (H1 * r);
    K *= cplx(0.0, -1.0);
    K.noalias() -= decay * r;
    dr = K + K.adjoint();
    if (noise.gamma_down > 0.0) {
      tmp.noalias() = A * r;
      dr.noalias() += noise.gamma_down * (tmp * Ad);
    }
    if (noise.gamma_up > 0.0) {
      tmp.noalias() = Ad * r;
      dr.noalias() += noise.gamma_up * (tmp * A);
    }
  };
  QuenchResult res;
  res.noisy = true;
  res.times.resize(static_cast<std::size_t>(spec.samples));
  res.jz.resize(res.times.size());
  res.photon_number.resize(res.times.size());
  res.trace.resize(res.times.size());
  res.coherence.resize(res.times.size());
  auto symmetrize = [&](State& x) {
    Eigen::Map<Eigen::MatrixXcd> r(x.data(), d, d);
    tmp = 0.5 * (r + r.adjoint());
    r = tmp;
    return true;
  };
  auto sample = [&](int k, double t, const State& x) {
    Eigen::Map<const Eigen::MatrixXcd> r(x.data(), d, d);
    const auto kk = static_cast<std::size_t>(k);
    res.times[kk] = t;
    res.trace[kk] = r.trace().real();
    res.jz[kk] = (ops.jz_total.cast<cplx>() * r).trace().real();
    res.photon_number[kk] = (ops.number.cast<cplx>() * r).trace().real();
    res.coherence[kk] = std::abs((A * r).trace());
    Eigen::VectorXd pops(space.fock_dim());
    for (int n = 0; n < space.fock_dim(); ++n) pops(n) = r.diagonal().segment(n * ds, ds).real().sum();
    if (top_weight(pops) > 1e-10) throw TruncationOverflow{};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r, Eigen::EigenvaluesOnly);
    res.min_eigenvalue = std::min(res.min_eigenvalue, es.eigenvalues()(0));
  };
  const double tol = spec.tolerance();
  const double local = kLocalErrorFraction * tol;
  auto stepper = odeint::make_controlled(local, local, odeint::runge_kutta_fehlberg78<State>());
  res.steps = integrate_sampled(stepper, sys, rho, spec.tau, spec.samples, 1e-3, symmetrize, sample);
  for (double tr : res.trace) res.max_trace_error = std::max(res.max_trace_error, std::abs(tr - 1.0));
  if (res.max_trace_error > 10 * tol) throw ConvergenceError("Lindblad evolution lost trace beyond tolerance");
  if (res.min_eigenvalue < -10 * tol) throw ConvergenceError("density matrix lost positivity beyond tolerance");
  res.jz_final = res.jz.back();
  res.jz_ground = jz_ground;
  res.jz_residual = std::abs(res.jz_final - jz_ground);
  res.n_max_used = n_max;
  return res;
}

template <class F>
QuenchResult with_truncation_growth(const QuenchSpec& spec, std::optional<double> jz_ground, F&& run) {
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const double jg = jz_ground ? *jz_ground : ground_jz(spec.params);
  for (int n_max = spec.n_max;; n_max = std::min(2 * n_max, spec.n_max_cap)) {
    try {
      auto res = run(spec, n_max, jg);
      res.eta = spec.params.eta;
      res.tau = spec.tau;
      res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return res;
    } catch (const TruncationOverflow&) {
      if (n_max == spec.n_max_cap) throw ConvergenceError("photon population reached the Fock truncation cap");
    }
  }
}

}  // namespace detail

/// Closed-system quench; restarts with doubled n_max when the top Fock levels fill.
inline QuenchResult evolve_unitary(const QuenchSpec& spec, std::optional<double> jz_ground = std::nullopt) {
  detail::require(!spec.noise, "evolve_unitary takes a noiseless spec");
  return detail::with_truncation_growth(spec, jz_ground, detail::evolve_unitary_at);
}

/// Master-equation quench with D[a] and D[a^dag] at the configured rates.
inline QuenchResult evolve_lindblad(const QuenchSpec& spec, std::optional<double> jz_ground = std::nullopt) {
  return detail::with_truncation_growth(spec, jz_ground, detail::evolve_lindblad_at);
}

inline QuenchResult evolve(const QuenchSpec& spec, std::optional<double> jz_ground = std::nullopt) {
  return spec.noise ? evolve_lindblad(spec, jz_ground) : evolve_unitary(spec, jz_ground);
}

/// Cartesian (eta, tau) sweep around a template spec; ordered eta-major.
inline std::vector<QuenchResult> quench_sweep(const QuenchSpec& base, std::vector<double> etas,
                                              std::vector<double> taus, int jobs = 1) {
  detail::require(!etas.empty() && !taus.empty(), "quench sweep needs eta and tau values");
  std::sort(etas.begin(), etas.end());
  std::sort(taus.begin(), taus.end());
  std::vector<double> ground = parallel_map<double>(etas.size(), [&](std::size_t i) {
    ModelParams p = base.params;
    p.eta = etas[i];
    return detail::ground_jz(p);
  }, jobs);
  return parallel_map<QuenchResult>(etas.size() * taus.size(), [&](std::size_t k) {
    QuenchSpec s = base;
    s.params.eta = etas[k / taus.size()];
    s.tau = taus[k % taus.size()];
    return evolve(s, ground[k / taus.size()]);
  }, jobs);
}

inline void write_trajectory_csv(std::ostream& os, const QuenchResult& r) {
  os << "t,jz,photon_number,trace\n";
  os.precision(17);
  for (std::size_t i = 0; i < r.times.size(); ++i)
    os << r.times[i] << ',' << r.jz[i] << ',' << r.photon_number[i] << ',' << r.trace[i] << '\n';
}

}  // namespace multicrit
