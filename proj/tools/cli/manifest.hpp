#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace multicrit::cli {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& file);

/// Collects output files and per-point metadata, then writes manifest.json.
class RunManifest {
public:
  RunManifest(std::string command, const std::string& config_text, int jobs, bool serial);

  /// Writes `content` to dir/name and records its hash.
  void write_output(const std::filesystem::path& dir, const std::string& name, const std::string& content);
  void add_point(nlohmann::json meta) { points_.push_back(std::move(meta)); }
  void set(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }
  void finish(const std::filesystem::path& dir, double wall_seconds);

  const nlohmann::json& outputs() const { return outputs_; }

private:
  std::string command_, config_hash_;
  nlohmann::json config_;
  int jobs_;
  bool serial_;
  nlohmann::json outputs_ = nlohmann::json::array();
  nlohmann::json points_ = nlohmann::json::array();
  nlohmann::json extra_ = nlohmann::json::object();
};

struct VerifyResult {
  bool ok = true;
  std::vector<std::string> problems;
  int checked = 0;
};

/// Re-hashes every output listed in dir/manifest.json.
VerifyResult verify_manifest(const std::filesystem::path& dir);

const char* tool_version();

}  // namespace multicrit::cli
