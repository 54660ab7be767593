#pragma once

// Strict JSON config access: every key must be consumed, errors carry the
// source line of the offending key.

#include <nlohmann/json.hpp>

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "multicrit/errors.hpp"

namespace multicrit::cli {

class ConfigSection {
public:
  ConfigSection(nlohmann::json node, std::string path, std::shared_ptr<const std::string> text);

  static ConfigSection parse(const std::string& text);

  bool has(const std::string& key) const;
  const nlohmann::json& raw(const std::string& key);

  double number(const std::string& key);
  double number(const std::string& key, double fallback);
  int integer(const std::string& key);
  int integer(const std::string& key, int fallback);
  bool boolean(const std::string& key, bool fallback);
  std::string string(const std::string& key);
  std::string string(const std::string& key, const std::string& fallback);
  std::vector<double> numbers(const std::string& key);
  std::optional<std::vector<double>> optional_numbers(const std::string& key);

  /// A grid is a number, a list of numbers, or {"start", "stop", "points", "log"}.
  std::vector<double> grid(const std::string& key);
  std::vector<double> grid(const std::string& key, std::vector<double> fallback);

  ConfigSection section(const std::string& key);
  std::vector<ConfigSection> sections(const std::string& key);

  /// Throws on any key that was never read.
  void finish() const;

  [[noreturn]] void fail(const std::string& key, const std::string& message) const;
  std::string where(const std::string& key) const;

private:
  std::vector<double> grid_from(const std::string& key, const nlohmann::json& v);

  nlohmann::json node_;
  std::string path_;
  std::shared_ptr<const std::string> text_;
  std::set<std::string> used_;
};

}  // namespace multicrit::cli
