#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "multicrit/spectrum.hpp"

using namespace multicrit;

namespace {

ModelParams single(double g, double eps, double eta) {
  ModelParams p;
  p.g_tilde = g;
  p.eps_tilde = {eps};
  p.eta = eta;
  return p;
}

}  // namespace

TEST(Eigensolver, LanczosMatchesDenseOnRandomBandedMatrix) {
  std::mt19937 rng(4);
  std::normal_distribution<double> gauss;
  const int n = 1200;
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 0.01 * i + gauss(rng));
    for (int d = 1; d <= 3 && i + d < n; ++d) {
      const double v = 0.3 * gauss(rng);
      t.emplace_back(i, i + d, v);
      t.emplace_back(i + d, i, v);
    }
  }
  SparseMatrix h(n, n);
  h.setFromTriplets(t.begin(), t.end());
  EigenOptions lanczos;
  lanczos.count = 5;
  lanczos.dense_threshold = 10;
  const auto a = lowest_eigenpairs(h, lanczos);
  EXPECT_FALSE(a.dense);
  EigenOptions dense;
  dense.count = 5;
  dense.dense_threshold = n + 1;
  const auto b = lowest_eigenpairs(h, dense);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(a.values(i), b.values(i), 1e-10 * std::max(1.0, std::abs(b.values(i))));
  for (int i = 0; i < 5; ++i) EXPECT_LT((h * a.vectors.col(i) - a.values(i) * a.vectors.col(i)).norm(), 1e-8);
}

TEST(Eigensolver, ParitySectorsReproduceFullSpectrum) {
  ModelParams p = single(1.3, 0.4, 0.05);
  const HilbertSpace space(30, {1});
  const auto h = build_hamiltonian(p, space);
  EigenOptions eo;
  eo.count = 8;
  const auto full = lowest_eigenpairs(h, eo);
  const auto split = detail::lowest_with_symmetry(h, space, true, eo);
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(full.values(i), split.values(i), 1e-10);
  const auto [qp, qm] = detail::parity_sectors(parity_operator(space, true));
  EXPECT_EQ(qp.cols() + qm.cols(), space.total_dim());
}

TEST(MfGap, ClosedFormValues) {
  EXPECT_NEAR(mf_gap(single(0.0, 0.0, 1e-2)), 1.0, 1e-15);
  EXPECT_NEAR(mf_gap(single(0.6, 0.0, 1e-2)), 0.8, 1e-14);
  EXPECT_EQ(mf_gap(single(std::pow(1.25, 0.75), 0.5, 1e-2)), 0.0);
  EXPECT_EQ(mf_gap(single(1.0, 0.0, 1e-2)), 0.0);
}

TEST(ExactSpectrum, DecoupledGap) {
  // min(1, W) with W = 1/(2 N eta)
  EXPECT_NEAR(exact_spectrum(single(0.0, 0.0, 1.0)).gap, 0.5, 1e-12);
  EXPECT_NEAR(exact_spectrum(single(0.0, 0.0, 0.01)).gap, 1.0, 1e-12);
}

TEST(ExactSpectrum, ConvergedMetadataAndVariationalEnergy) {
  const auto p = single(0.9, 0.3, 0.01);
  const auto s = exact_spectrum(p);
  EXPECT_TRUE(s.converged);
  EXPECT_GE(s.n_max_used, 32);
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {4, 8, 16, 32}) {
    const auto e = detail::spectrum_at(p, n, 1, SpectrumOptions{}).eigenvalues[0];
    EXPECT_LE(e, prev + 1e-12);
    prev = e;
  }
  for (std::size_t i = 1; i < s.eigenvalues.size(); ++i) EXPECT_GE(s.eigenvalues[i], s.eigenvalues[i - 1]);
  EXPECT_GE(s.gap, 0.0);
}

TEST(ExactSpectrum, GapShrinksWithEtaAtTricriticalPoint) {
  const auto p = single(std::pow(1.25, 0.75), 0.5, 1e-2);
  const auto rows = gap_scan(p, {1e-3, 1e-2});
  EXPECT_LT(rows[0].spectrum.gap, rows[1].spectrum.gap);
  EXPECT_TRUE(rows[0].spectrum.converged);
}

TEST(ExactSpectrum, GappedPhaseSaturates) {
  const auto rows = gap_scan(single(0.5, 0.2, 1e-2), {1e-3, 2e-3, 4e-3});
  const double slope = std::log(rows[2].spectrum.gap / rows[0].spectrum.gap) / std::log(4.0);
  EXPECT_LT(std::abs(slope), 0.01);
}

TEST(ExactSpectrum, AgreesWithMeanFieldInSuperradiantPhase) {
  const auto p = single(1.5, 0.3, 1e-3);
  SpectrumOptions o;
  o.n_max_cap = 4096;
  const auto s = exact_spectrum(p, o);
  EXPECT_EQ(s.ground_multiplicity, 2);
  EXPECT_NEAR(s.excitation_gap / mf_gap(p), 1.0, 0.02);
  EXPECT_LT(s.gap, 1e-6);  // tunneling doublet
}

TEST(ExactSpectrum, OrderParameterWithTinyBias) {
  auto p = single(1.5, 0.3, 1e-3);
  p.h_tilde = {1e-6};
  SpectrumOptions o;
  o.n_max_cap = 4096;
  const auto s = exact_spectrum(p, o);
  const double z = 2.0 * std::sqrt(p.eta) * p.g_tilde * s.a.real();
  const double zg = minimize(single(1.5, 0.3, 1e-3)).minimizers.back();
  EXPECT_NEAR(std::abs(z) / zg, 1.0, 0.02);
}

TEST(ExactSpectrum, QuadratureInNormalPhase) {
  // <(a + a^dag)^2> -> 1/sqrt(1 - g^2) for the Rabi-limit normal phase
  const auto s = exact_spectrum(single(0.6, 0.0, 1e-3));
  EXPECT_NEAR(s.quadrature_sq, 1.0 / 0.8, 0.02);
  EXPECT_NEAR(std::abs(s.a), 0.0, 1e-10);
}

TEST(GapScan, CsvColumns) {
  const auto rows = gap_scan(single(0.5, 0.0, 1e-2), {1e-2, 5e-3}, {}, 2);
  EXPECT_LT(rows[0].eta, rows[1].eta);
  std::ostringstream os;
  write_gap_csv(os, rows);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "eta,gap,excitation_gap,jz,photon_number,n_max_used,converged");
}
