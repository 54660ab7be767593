#include <gtest/gtest.h>

#include <chrono>
#include <random>

#include "multicrit/phase.hpp"

using namespace multicrit;

namespace {

ModelParams single(double g, double eps, double h = 0.0) {
  ModelParams p;
  p.g_tilde = g;
  p.eps_tilde = {eps};
  if (h != 0.0) p.h_tilde = {h};
  return p;
}

ModelParams tetra(double g, double e1, double e2) {
  ModelParams p;
  p.n_fractions = {0.75, 0.25};
  p.g_tilde = g;
  p.eps_tilde = {e1, e2};
  return p;
}

// Independent oracle: global minima on a fine uniform grid.
std::vector<double> grid_minimizers(const ModelParams& p, double zmax, int n, double tol) {
  std::vector<double> e(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) e[static_cast<std::size_t>(i)] = energy_functional_ns(-zmax + 2 * zmax * i / n, p);
  const double emin = *std::min_element(e.begin(), e.end());
  std::vector<double> out;
  for (int i = 1; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (e[k] <= e[k - 1] && e[k] <= e[k + 1] && e[k] < emin + tol) out.push_back(-zmax + 2 * zmax * i / n);
  }
  return out;
}

}  // namespace

TEST(Minimize, NormalPhase) {
  const auto pt = minimize(single(0.5, 0.0));
  ASSERT_EQ(pt.minimizers.size(), 1u);
  EXPECT_EQ(pt.minimizers[0], 0.0);
  EXPECT_EQ(pt.phase, "NP");
}

TEST(Minimize, SuperradiantPair) {
  const auto pt = minimize(single(std::sqrt(2.0), 0.0));
  ASSERT_EQ(pt.minimizers.size(), 2u);
  EXPECT_NEAR(pt.minimizers[0], -std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(pt.minimizers[1], std::sqrt(3.0), 1e-12);
  EXPECT_EQ(pt.phase, "SP_pair");
  EXPECT_NEAR(pt.energy, -5.0 / 8.0, 1e-14);
}

TEST(Minimize, StationarityAndSymmetryForRandomParams) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 40; ++t) {
    auto p = tetra(0.8 + 1.0 * u(rng), 1.5 * u(rng), 1.5 * u(rng));
    const auto pt = minimize(p);
    for (double z : pt.minimizers) {
      EXPECT_LT(std::abs(energy_derivative(z, p, 1)), 1e-10);
      EXPECT_GT(energy_derivative(z, p, 2), -1e-10);
      bool partner = std::abs(z) < 1e-8;
      for (double o : pt.minimizers) partner = partner || std::abs(o + z) < 1e-7;
      EXPECT_TRUE(partner);
    }
    // grid oracle agrees on the deepest minimum
    const auto oracle = grid_minimizers(p, pt.z_cap, 200000, 1e-7);
    ASSERT_FALSE(oracle.empty());
    double best = 1e9;
    for (double z : oracle) best = std::min(best, std::abs(std::abs(z) - std::abs(pt.minimizers.back())));
    EXPECT_LT(best, 1e-3);
  }
}

TEST(Minimize, SymmetryBreakingFieldSelectsOneSide) {
  const auto pt = minimize(single(1.5, 0.2, 0.05));
  ASSERT_EQ(pt.minimizers.size(), 1u);
  EXPECT_GT(pt.minimizers[0], 0.0);
  EXPECT_EQ(pt.phase, "SP");
}

TEST(SecondOrderSurface, SingleSubsetClosedForm) {
  std::vector<std::vector<double>> grid;
  for (int i = 0; i < 100; ++i) grid.push_back({1.5 * i / 99.0});
  const auto pts = second_order_surface({1.0}, grid);
  for (const auto& p : pts)
    EXPECT_NEAR(p.g_r, std::pow(1 + p.eps_tilde[0] * p.eps_tilde[0], 0.75), 1e-10);
  EXPECT_NEAR(critical_coupling({1.0}, {0.0}), 1.0, 1e-14);
}

TEST(LocateMulticritical, Tricritical) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cp = locate_multicritical({1.0});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_NEAR(cp.g_tilde, std::pow(1.25, 0.75), 1e-8);
  EXPECT_NEAR(cp.eps_tilde[0], 0.5, 1e-8);
  EXPECT_LT(cp.max_residual(), 1e-10);
  EXPECT_GT(cp.v, 0.0);
  EXPECT_EQ(cp.order, 3);
  EXPECT_LT(secs, 1.0);
}

TEST(LocateMulticritical, Tetracritical) {
  const auto cp = locate_multicritical({0.75, 0.25});
  EXPECT_NEAR(cp.g_tilde, 1.29955698, 1e-7);
  EXPECT_NEAR(cp.eps_tilde[0], 0.81233467, 1e-7);
  EXPECT_NEAR(cp.eps_tilde[1], 0.15353662, 1e-7);
  EXPECT_LT(cp.max_residual(), 1e-10);
  // lies on the second-order surface
  EXPECT_NEAR(critical_coupling({0.75, 0.25}, cp.eps_tilde), cp.g_tilde, 1e-9);
}

TEST(LocateMulticritical, Pentacritical) {
  const auto cp = locate_multicritical({2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0});
  EXPECT_NEAR(cp.g_tilde, 1.36352429, 1e-7);
  EXPECT_NEAR(cp.eps_tilde[0], 0.98405314, 1e-7);
  EXPECT_NEAR(cp.eps_tilde[1], 0.37422241, 1e-7);
  EXPECT_NEAR(cp.eps_tilde[2], 0.17196263, 1e-7);
  EXPECT_LT(cp.max_residual(), 1e-10);
}

TEST(LocateMulticritical, ExplicitGuessAndFailure) {
  const auto cp = locate_multicritical({1.0}, std::vector<double>{1.2, 0.45});
  EXPECT_NEAR(cp.eps_tilde[0], 0.5, 1e-8);
  // the unbiased Dicke point has v < 0 and cannot be returned
  EXPECT_THROW(locate_multicritical({1.0}, std::vector<double>{1.0, 0.0}), ConvergenceError);
}

TEST(TraceFirstOrder, TripleLineAboveTricriticalBias) {
  const double eps = 0.8;
  const double gr = critical_coupling({1.0}, {eps});
  ParameterPath path{single(gr - 0.2, eps), single(gr + 0.2, eps), 100};
  const auto tr = trace_first_order(path);
  ASSERT_EQ(tr.points.size(), 1u);
  const auto& cp = tr.points[0];
  EXPECT_EQ(cp.label, "L_tau");
  ASSERT_EQ(cp.minimizers.size(), 3u);
  EXPECT_NEAR(cp.minimizers[1], 0.0, 1e-12);
  EXPECT_LT(cp.params.g_tilde, gr);  // first-order jump preempts L_lambda
  const double e0 = energy_functional(0.0, cp.params), e1 = energy_functional(cp.minimizers[2], cp.params);
  EXPECT_LT(std::abs(e0 - e1), 1e-11);
}

TEST(TraceFirstOrder, ContinuousBelowTricriticalBias) {
  const double eps = 0.3;
  const double gr = critical_coupling({1.0}, {eps});
  ParameterPath path{single(gr - 0.2, eps), single(gr + 0.2, eps), 100};
  const auto tr = trace_first_order(path);
  EXPECT_TRUE(tr.points.empty());
  // oracle: dense scan shows the minimizer grows continuously from zero
  double prev = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const auto pt = minimize(path.at(i / 400.0));
    const double z = pt.minimizers.back();
    EXPECT_LT(z - prev, 0.1);
    prev = z;
  }
}

TEST(TraceFirstOrder, SymmetricSurfaceAcrossZeroField) {
  ParameterPath path{single(1.6, 0.2, -0.05), single(1.6, 0.2, 0.05), 20};
  const auto tr = trace_first_order(path);
  ASSERT_EQ(tr.points.size(), 1u);
  EXPECT_EQ(tr.points[0].label, "S_0");
  EXPECT_NEAR(tr.points[0].params.h_tilde[0], 0.0, 1e-12);
}

TEST(TraceFirstOrder, QuadrupleLineTetracritical) {
  // fixed small eps_2 below the tetracritical value, scan eps_1 deep in the SP
  const auto te = locate_multicritical({0.75, 0.25});
  const double e2 = 0.05;
  ParameterPath path{tetra(te.g_tilde + 0.4, 1.0, e2), tetra(te.g_tilde + 0.4, 1.9, e2), 200};
  const auto tr = trace_first_order(path);
  bool found = false;
  for (const auto& cp : tr.points) {
    if (cp.label != "L_chi") continue;
    found = true;
    ASSERT_EQ(cp.minimizers.size(), 4u);
    const auto pt = minimize(cp.params);
    EXPECT_EQ(pt.phase, "SP_two_pairs");
    // oracle: fine grid shows two distinct |z| values at the same energy
    const auto oracle = grid_minimizers(cp.params, pt.z_cap, 400000, 1e-9);
    EXPECT_EQ(oracle.size(), 4u);
  }
  EXPECT_TRUE(found);
}

TEST(WingLines, ApproachTricriticalPointAsFieldVanishes) {
  const auto pts = wing_critical_lines({0.01, 0.003, 0.001, 0.0003});
  double prev = 1.0;
  for (const auto& w : pts) {
    const double dist = std::hypot(w.g_tilde - std::pow(1.25, 0.75), w.eps_tilde - 0.5);
    EXPECT_LT(dist, prev);
    prev = dist;
  }
  EXPECT_LT(prev, 0.05);
}

TEST(WingLines, ParityMapsPlusOntoMinus) {
  const auto plus = wing_critical_point(0.01);
  const auto minus = wing_critical_point(-0.01);
  EXPECT_NEAR(plus.g_tilde, minus.g_tilde, 1e-9);
  EXPECT_NEAR(plus.eps_tilde, minus.eps_tilde, 1e-9);
  EXPECT_NEAR(plus.z, -minus.z, 1e-9);
}

TEST(WingLines, BruteForceMergeScan) {
  // Along g at the wing's eps: slightly above eps_w two local minima coexist
  // somewhere, slightly below they never do.
  const auto w = wing_critical_point(0.01);
  auto count_double = [&](double eps) {
    int hits = 0;
    for (int i = 0; i <= 400; ++i) {
      const double g = w.g_tilde - 0.05 + 0.1 * i / 400.0;
      const auto p = single(g, eps, 0.01);
      // local minima on the positive branch region near the merge point
      int mins = 0;
      const int n = 4000;
      double a = energy_functional_ns(w.z - 0.6, p), b = energy_functional_ns(w.z - 0.6 + 1.2 / n, p);
      for (int k = 2; k <= n; ++k) {
        const double c = energy_functional_ns(w.z - 0.6 + 1.2 * k / n, p);
        if (b < a && b < c) ++mins;
        a = b;
        b = c;
      }
      if (mins >= 2) ++hits;
    }
    return hits;
  };
  EXPECT_GT(count_double(w.eps_tilde + 0.02), 0);
  EXPECT_EQ(count_double(w.eps_tilde - 0.02), 0);
}
