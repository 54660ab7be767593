#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "cli/manifest.hpp"
#include "multicrit/errors.hpp"

using namespace multicrit;
using namespace multicrit::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("multicrit_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

RunOptions in(const fs::path& dir, int jobs = 1) {
  RunOptions o;
  o.out_dir = dir;
  o.jobs = jobs;
  return o;
}

}  // namespace

TEST(Cli, LocateTricriticalExact) {
  const auto dir = scratch("locate");
  ASSERT_EQ(run_and_report("locate", R"({"n_fractions": [1.0], "exact_rational": true})", in(dir)), kSuccess);
  const auto j = read_json(dir / "locate.json");
  EXPECT_NEAR(j["g_tilde"].get<double>(), std::pow(1.25, 0.75), 1e-10);
  EXPECT_NEAR(j["eps_tilde"][0].get<double>(), 0.5, 1e-10);
  EXPECT_LT(j["max_residual"].get<double>(), 1e-10);
  EXPECT_EQ(j["exact"]["eps_tilde"], "1/2");
  EXPECT_EQ(j["exact"]["g_tilde_fourth"], "125/64");
  EXPECT_TRUE(verify_manifest(dir).ok);
}

TEST(Cli, LocateBadGuessReportsNonConvergence) {
  const auto dir = scratch("locate_bad");
  const int code = run_and_report("locate", R"({"n_fractions": [1.0], "initial_guess": [0.05, 40.0], "max_iterations": 3})",
                                  in(dir));
  EXPECT_EQ(code, kNonConvergence);
  EXPECT_TRUE(fs::exists(dir / "failure.json"));
  EXPECT_FALSE(fs::exists(dir / "locate.json"));
}

TEST(Cli, UnknownKeyIsRejectedWithLine) {
  const auto dir = scratch("unknown");
  try {
    run_command("locate", "{\n  \"n_fractions\": [1.0],\n  \"tolerence\": 1e-9\n}", in(dir));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("tolerence"), std::string::npos) << e.what();
  }
  EXPECT_FALSE(fs::exists(dir));
  EXPECT_EQ(run_and_report("locate", "{ not json", in(dir)), kConfigError);
  EXPECT_EQ(run_and_report("no-such-command", "{}", in(dir)), kConfigError);
}

TEST(Cli, EmptyGridWritesNothing) {
  const auto dir = scratch("empty");
  const std::string cfg = R"({"g_tilde": {"start": 0.5, "stop": 2, "points": 0}, "eps_tilde_1": 0.0})";
  EXPECT_EQ(run_and_report("phase-diagram", cfg, in(dir)), kConfigError);
  EXPECT_FALSE(fs::exists(dir));
}

TEST(Cli, PhaseBoundaryThroughDickeAndTricriticalPoints) {
  const auto dir = scratch("pd1");
  const std::string cfg = R"({"g_tilde": [0.99, 1.01, 1.18, 1.185], "eps_tilde_1": [0.0, 0.5]})";
  ASSERT_EQ(run_and_report("phase-diagram", cfg, in(dir)), kSuccess);
  std::istringstream csv(slurp(dir / "phase_diagram.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "g_tilde,eps_tilde_1,h_tilde_1,phase_label,n_minimizers,minimizers,z_G,energy");
  std::map<std::pair<std::string, std::string>, std::string> phase;
  while (std::getline(csv, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    phase[{cells[0], cells[1]}] = cells[3];
  }
  EXPECT_EQ((phase[{"0.98999999999999999", "0"}]), "NP");
  EXPECT_EQ((phase[{"1.01", "0"}]), "SP_pair");
  EXPECT_EQ((phase[{"1.1799999999999999", "0.5"}]), "NP");
  EXPECT_EQ((phase[{"1.1850000000000001", "0.5"}]), "SP_pair");
}

TEST(Cli, QuadrupleLineInTetracriticalSlice) {
  const auto dir = scratch("pd2");
  const std::string cfg = R"({
    "n_fractions": [0.75, 0.25], "g_tilde": 1.7, "eps_tilde_1": [1.2, 1.8], "eps_tilde_2": 0.05,
    "coexistence_paths": [{"start": {"g_tilde": 1.6995569775560463, "eps_tilde": [1.0, 0.05]},
                           "end": {"g_tilde": 1.6995569775560463, "eps_tilde": [1.9, 0.05]}, "samples": 120}]})";
  ASSERT_EQ(run_and_report("phase-diagram", cfg, in(dir)), kSuccess);
  const std::string coex = slurp(dir / "coexistence.csv");
  EXPECT_NE(coex.find(",L_chi,4,"), std::string::npos) << coex;
}

TEST(Cli, SerialAndParallelOutputsIdentical) {
  const std::string cfg = R"({"g_tilde": {"start": 0.8, "stop": 1.6, "points": 9}, "eps_tilde_1": {"start": 0, "stop": 1, "points": 5}})";
  const auto a = scratch("rep_a"), b = scratch("rep_b"), c = scratch("rep_c");
  RunOptions serial = in(a);
  serial.serial = true;
  run_command("phase-diagram", cfg, serial);
  run_command("phase-diagram", cfg, in(b, 1));
  run_command("phase-diagram", cfg, in(c, 3));
  const auto ha = sha256_file(a / "phase_diagram.csv");
  EXPECT_EQ(ha, sha256_file(b / "phase_diagram.csv"));
  EXPECT_EQ(ha, sha256_file(c / "phase_diagram.csv"));
  EXPECT_EQ(read_json(a / "manifest.json")["config_sha256"], sha256_hex(cfg));
}

TEST(Cli, VerifyDetectsTampering) {
  const auto dir = scratch("tamper");
  ASSERT_EQ(run_and_report("locate", R"({"n_fractions": [0.75, 0.25]})", in(dir)), kSuccess);
  EXPECT_TRUE(verify_manifest(dir).ok);
  std::ofstream(dir / "locate.json", std::ios::app) << " ";
  const auto r = verify_manifest(dir);
  EXPECT_FALSE(r.ok);
  ASSERT_EQ(r.problems.size(), 1u);
}

TEST(Cli, ExponentsRecoverInjectedSlope) {
  const auto dir = scratch("inject");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "synthetic.csv");
    f.precision(17);
    f << "x,y\n";
    for (int i = 0; i < 20; ++i) {
      const double x = std::pow(10.0, -4 + 0.2 * i);
      f << x << ',' << 3 * std::pow(x, 0.4) << '\n';
    }
  }
  const fs::path out = dir / "out";
  const std::string cfg = R"({"mode": "data", "data_csv": ")" + (dir / "synthetic.csv").string() + R"(", "sliding_width": 5})";
  ASSERT_EQ(run_and_report("exponents", cfg, in(out)), kSuccess);
  EXPECT_NEAR(read_json(out / "fits.json")["fit"]["exponent"].get<double>(), 0.4, 1e-12);
}

TEST(Cli, MeanFieldExponentsAtTricriticalPoint) {
  const auto dir = scratch("exps");
  ASSERT_EQ(run_and_report("exponents", R"({"n_fractions": [1.0]})", in(dir)), kSuccess);
  const auto j = read_json(dir / "fits.json");
  EXPECT_NEAR(j["gamma_eps_r"]["exponent"].get<double>(), 0.5, 1e-3);
  EXPECT_NEAR(j["beta_r"]["exponent"].get<double>(), 0.25, 1e-2);
  EXPECT_NEAR(j["gamma_eps_w1"]["exponent"].get<double>(), 0.4, 1e-2);
  EXPECT_EQ(j["predicted"]["delta_eps"], "1/2");
}

TEST(Cli, GapScanAtDickePoint) {
  const auto dir = scratch("gap");
  const std::string cfg = R"({"g_tilde": 1.0, "eps_tilde": [0.0], "compare_order_M": 0,
    "eta_values": {"start": 0.001, "stop": 0.01, "points": 4, "log": true}})";
  ASSERT_EQ(run_and_report("gap-scan", cfg, in(dir, 2)), kSuccess);
  const auto j = read_json(dir / "fit.json");
  EXPECT_NEAR(j["delta_eps"]["exponent"].get<double>(), 1.0 / 3, 0.05);
  EXPECT_TRUE(j["all_converged"].get<bool>());
  EXPECT_EQ(read_json(dir / "manifest.json")["points"].size(), 4u);
}

TEST(Cli, QuenchCollapseNeedsTwoEtas) {
  const auto dir = scratch("q1");
  const std::string cfg = R"({"eta_values": [0.01], "omega_tau_values": [0.75, 1.0]})";
  try {
    run_command("quench-collapse", cfg, in(dir));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("need >= 2 eta"), std::string::npos);
  }
}

TEST(Cli, QuenchCollapseSmallSweep) {
  const auto dir = scratch("q2");
  const std::string cfg = R"({"eta_values": [0.02, 0.01], "omega_tau_values": [0.75, 1.5],
    "reference": {"eta": 0.01, "omega_tau_values": [0.75, 1.5, 3.0]}, "samples": 5})";
  ASSERT_EQ(run_and_report("quench-collapse", cfg, in(dir)), kSuccess);
  const auto j = read_json(dir / "collapse.json");
  EXPECT_EQ(j["a"].get<double>(), 0.5);
  EXPECT_EQ(j["b"].get<double>(), 1.5);
  EXPECT_GT(j["overlapping_bins"].get<int>(), 0);
  EXPECT_EQ(j["perturbed"].size(), 4u);
}

TEST(Cli, IonFeasibility) {
  const auto dir = scratch("ion");
  const std::string cfg = R"({"omega": "2pi*200Hz", "Omega_over_omega": [50, 400], "eta0": 0.06})";
  ASSERT_EQ(run_and_report("ion", cfg, in(dir)), kSuccess);
  const auto j = read_json(dir / "ion.json");
  EXPECT_NEAR(j["settings"][0]["Omega0_kHz"].get<double>(), 9.9, 0.05);
  EXPECT_NEAR(j["settings"][1]["Omega0_kHz"].get<double>(), 27.9, 0.05);
  EXPECT_NEAR(j["settings"][0]["Omega_p_kHz"].get<double>(), 5.0, 1e-9);
  EXPECT_TRUE(j["settings"][0]["feasibility"]["pass"].get<bool>());
  const std::string lab = R"({"lab": {"delta_b": "2pi*50.2kHz", "delta_r": "2pi*49.8kHz", "Omega0": "2pi*40kHz",
    "Omega_p": "2pi*25kHz", "eta0": 0.06}})";
  const auto lab_dir = scratch("ion_lab");
  ASSERT_EQ(run_and_report("ion", lab, in(lab_dir)), kSuccess);
  const auto k = read_json(lab_dir / "ion.json");
  EXPECT_FALSE(k["lab"]["feasibility"]["checks"]["Omega0_kHz"]["pass"].get<bool>());
  EXPECT_EQ(run_and_report("ion", R"({"omega": "fast", "Omega_over_omega": 50, "eta0": 0.06})", in(scratch("ion_bad"))),
            kConfigError);
}

TEST(CliConfig, GridForms) {
  auto c = ConfigSection::parse(R"({"a": 2, "b": [1, 3], "c": {"start": 1, "stop": 100, "points": 3, "log": true}})");
  EXPECT_EQ(c.grid("a"), std::vector<double>{2});
  EXPECT_EQ(c.grid("b"), (std::vector<double>{1, 3}));
  const auto g = c.grid("c");
  ASSERT_EQ(g.size(), 3u);
  EXPECT_NEAR(g[1], 10, 1e-12);
  EXPECT_NO_THROW(c.finish());
  auto d = ConfigSection::parse(R"({"c": {"start": 1, "stop": 2, "points": 3, "step": 1}})");
  EXPECT_THROW(d.grid("c"), ConfigError);
}
