#include "cli/config.hpp"

#include <algorithm>
#include <cmath>

namespace multicrit::cli {

ConfigSection::ConfigSection(nlohmann::json node, std::string path, std::shared_ptr<const std::string> text)
    : node_(std::move(node)), path_(std::move(path)), text_(std::move(text)) {
  if (!node_.is_object()) throw ConfigError("config" + (path_.empty() ? "" : " section '" + path_ + "'") + " must be an object");
}

ConfigSection ConfigSection::parse(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return ConfigSection(std::move(j), "", std::make_shared<const std::string>(text));
}

std::string ConfigSection::where(const std::string& key) const {
  const std::string full = path_.empty() ? key : path_ + "." + key;
  if (text_) {
    const auto pos = text_->find("\"" + key + "\"");
    if (pos != std::string::npos) {
      const auto line = 1 + std::count(text_->begin(), text_->begin() + static_cast<std::ptrdiff_t>(pos), '\n');
      return "line " + std::to_string(line) + ": '" + full + "'";
    }
  }
  return "'" + full + "'";
}

void ConfigSection::fail(const std::string& key, const std::string& message) const {
  throw ConfigError("config " + where(key) + ": " + message);
}

bool ConfigSection::has(const std::string& key) const { return node_.contains(key); }

const nlohmann::json& ConfigSection::raw(const std::string& key) {
  if (!node_.contains(key)) fail(key, "missing required key");
  used_.insert(key);
  return node_.at(key);
}

double ConfigSection::number(const std::string& key) {
  const auto& v = raw(key);
  if (!v.is_number()) fail(key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(key, "expected a finite number");
  return x;
}

double ConfigSection::number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

int ConfigSection::integer(const std::string& key) {
  const auto& v = raw(key);
  if (!v.is_number_integer()) fail(key, "expected an integer");
  return v.get<int>();
}

int ConfigSection::integer(const std::string& key, int fallback) { return has(key) ? integer(key) : fallback; }

bool ConfigSection::boolean(const std::string& key, bool fallback) {
  if (!has(key)) return fallback;
  const auto& v = raw(key);
  if (!v.is_boolean()) fail(key, "expected true or false");
  return v.get<bool>();
}

std::string ConfigSection::string(const std::string& key) {
  const auto& v = raw(key);
  if (!v.is_string()) fail(key, "expected a string");
  return v.get<std::string>();
}

std::string ConfigSection::string(const std::string& key, const std::string& fallback) {
  return has(key) ? string(key) : fallback;
}

std::vector<double> ConfigSection::numbers(const std::string& key) {
  const auto& v = raw(key);
  if (!v.is_array()) fail(key, "expected a list of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) fail(key, "expected a list of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::optional<std::vector<double>> ConfigSection::optional_numbers(const std::string& key) {
  if (!has(key)) return std::nullopt;
  return numbers(key);
}

std::vector<double> ConfigSection::grid_from(const std::string& key, const nlohmann::json& v) {
  if (v.is_number()) return {v.get<double>()};
  if (v.is_array()) {
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail(key, "grid list must contain numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }
  if (!v.is_object()) fail(key, "expected a number, list or {start, stop, points}");
  ConfigSection g(v, path_.empty() ? key : path_ + "." + key, text_);
  const double start = g.number("start");
  const double stop = g.number("stop");
  const int points = g.integer("points");
  const bool log = g.boolean("log", false);
  g.finish();
  if (points < 0) fail(key, "points must be non-negative");
  if (log && (start <= 0 || stop <= 0)) fail(key, "log grid needs positive bounds");
  std::vector<double> out;
  for (int i = 0; i < points; ++i) {
    const double s = points == 1 ? 0.0 : double(i) / (points - 1);
    out.push_back(log ? start * std::pow(stop / start, s) : start + s * (stop - start));
  }
  return out;
}

std::vector<double> ConfigSection::grid(const std::string& key) { return grid_from(key, raw(key)); }

std::vector<double> ConfigSection::grid(const std::string& key, std::vector<double> fallback) {
  return has(key) ? grid(key) : fallback;
}

ConfigSection ConfigSection::section(const std::string& key) {
  const auto& v = raw(key);
  if (!v.is_object()) fail(key, "expected an object");
  return ConfigSection(v, path_.empty() ? key : path_ + "." + key, text_);
}

std::vector<ConfigSection> ConfigSection::sections(const std::string& key) {
  const auto& v = raw(key);
  if (!v.is_array()) fail(key, "expected a list of objects");
  std::vector<ConfigSection> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_object()) fail(key, "expected a list of objects");
    out.emplace_back(v[i], (path_.empty() ? key : path_ + "." + key) + "[" + std::to_string(i) + "]", text_);
  }
  return out;
}

void ConfigSection::finish() const {
  for (auto it = node_.begin(); it != node_.end(); ++it)
    if (!used_.count(it.key())) fail(it.key(), "unknown key");
}

}  // namespace multicrit::cli
