#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "cli/commands.hpp"
#include "cli/manifest.hpp"
#include "multicrit/errors.hpp"

namespace cli = multicrit::cli;

int main(int argc, char** argv) {
  CLI::App app{"multicritical qubit-boson model toolkit"};
  app.set_version_flag("--version", cli::tool_version());
  app.require_subcommand(1);

  std::string config_path;
  cli::RunOptions opts;
  double tol = 0;
  for (const auto& name : cli::command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    sub->add_option("--jobs", opts.jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--tol", tol, "override the command's main tolerance")->check(CLI::PositiveNumber);
    sub->add_flag("--serial", opts.serial, "single thread, bit-reproducible");
  }
  auto* verify = app.add_subcommand("verify", "re-check output hashes against manifest.json");
  verify->add_option("--out", opts.out_dir, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kConfigError;
  }

  if (verify->parsed()) {
    try {
      const auto r = cli::verify_manifest(opts.out_dir);
      for (const auto& p : r.problems) std::cerr << p << "\n";
      std::cout << (r.ok ? "ok" : "MISMATCH") << ": " << r.checked << " outputs checked\n";
      return r.ok ? cli::kSuccess : cli::kFailure;
    } catch (const multicrit::ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return cli::kConfigError;
    }
  }

  const std::string command = app.get_subcommands().front()->get_name();
  if (tol > 0) opts.tol = tol;
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "config error: cannot read " << config_path << "\n";
    return cli::kConfigError;
  }
  std::stringstream text;
  text << in.rdbuf();
  const int code = cli::run_and_report(command, text.str(), opts);
  if (code == cli::kSuccess) std::cout << command << ": wrote " << opts.out_dir.string() << "\n";
  return code;
}
