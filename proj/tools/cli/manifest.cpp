#include "cli/manifest.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "multicrit/errors.hpp"

#ifndef MULTICRIT_VERSION
#define MULTICRIT_VERSION "dev"
#endif

namespace multicrit::cli {

const char* tool_version() { return MULTICRIT_VERSION; }

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

std::string sha256_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

RunManifest::RunManifest(std::string command, const std::string& config_text, int jobs, bool serial)
    : command_(std::move(command)), config_hash_(sha256_hex(config_text)), jobs_(jobs), serial_(serial) {
  try {
    config_ = nlohmann::json::parse(config_text);
  } catch (const nlohmann::json::parse_error&) {
    config_ = config_text;
  }
}

void RunManifest::write_output(const std::filesystem::path& dir, const std::string& name, const std::string& content) {
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  out << content;
  out.close();
  outputs_.push_back({{"file", name}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
}

void RunManifest::finish(const std::filesystem::path& dir, double wall_seconds) {
  nlohmann::json m;
  m["tool"] = "multicrit";
  m["version"] = tool_version();
  m["command"] = command_;
  m["config_sha256"] = config_hash_;
  m["config"] = config_;
  m["jobs"] = jobs_;
  m["serial"] = serial_;
  m["outputs"] = outputs_;
  m["points"] = points_;
  for (auto it = extra_.begin(); it != extra_.end(); ++it) m[it.key()] = it.value();
  m["wall_seconds"] = wall_seconds;
  std::ofstream out(dir / "manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
  out << m.dump(2) << "\n";
}

VerifyResult verify_manifest(const std::filesystem::path& dir) {
  VerifyResult r;
  std::ifstream in(dir / "manifest.json");
  if (!in) throw ConfigError("no manifest.json in " + dir.string());
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("manifest.json is not valid JSON: ") + e.what());
  }
  if (!m.contains("outputs") || !m["outputs"].is_array()) throw ConfigError("manifest.json has no outputs list");
  for (const auto& o : m["outputs"]) {
    const std::string name = o.value("file", "");
    const std::string want = o.value("sha256", "");
    ++r.checked;
    if (!std::filesystem::exists(dir / name)) {
      r.ok = false;
      r.problems.push_back(name + ": missing");
      continue;
    }
    const std::string got = sha256_file(dir / name);
    if (got != want) {
      r.ok = false;
      r.problems.push_back(name + ": sha256 " + got + " != " + want);
    }
  }
  return r;
}

}  // namespace multicrit::cli
