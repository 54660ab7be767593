#pragma once

// Trapped-ion parameter bridge. All frequencies are angular (rad/s) inside;
// conversions to ordinary frequency happen only at the edges.

#include <nlohmann/json.hpp>

#include <cmath>
#include <numbers>
#include <optional>
#include <regex>
#include <set>
#include <string>

#include "multicrit/errors.hpp"
#include "multicrit/model.hpp"

namespace multicrit {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct IonParams {
  double delta_b = 0;  // blue sideband detuning
  double delta_r = 0;  // red sideband detuning
  double Omega0 = 0;   // sideband Rabi strength
  double eta0 = 0;     // Lamb-Dicke parameter
  double Omega_p = 0;  // bias laser Rabi strength

  void validate() const {
    detail::require(std::isfinite(delta_b) && std::isfinite(delta_r), "detunings must be finite");
    detail::require(delta_b > delta_r, "delta_b must exceed delta_r (omega > 0)");
    detail::require(delta_r >= 0, "delta_r must be non-negative");
    detail::require(eta0 > 0 && eta0 <= 0.2, "eta0 must lie in (0, 0.2]");
    detail::require(Omega0 >= 0 && Omega_p >= 0, "Rabi strengths must be non-negative");
  }
};

struct LabMapping {
  double omega = 0, Omega = 0, g = 0, eps = 0;
  double g_tilde = 0, eps_tilde = 0, eta = 0;

  ModelParams params() const {
    ModelParams p;
    p.n_fractions = {1.0};
    p.g_tilde = g_tilde;
    p.eps_tilde = {eps_tilde};
    p.h_tilde = {0.0};
    p.eta = eta;
    p.N = 1;
    p.omega = omega;
    return p;
  }
};

inline LabMapping to_model(const IonParams& ion) {
  ion.validate();
  LabMapping m;
  m.omega = (ion.delta_b - ion.delta_r) / 2;
  m.Omega = (ion.delta_b + ion.delta_r) / 2;
  m.g = std::sqrt(2.0) * ion.eta0 * ion.Omega0;
  m.eps = ion.Omega_p;
  m.g_tilde = 2 * m.g / std::sqrt(m.omega * m.Omega);
  m.eps_tilde = m.eps / m.Omega;
  m.eta = m.omega / (2 * m.Omega);
  return m;
}

inline IonParams from_model(double g_tilde, double eps_tilde, double omega, double Omega, double eta0) {
  detail::require(g_tilde > 0 && eps_tilde >= 0, "targets must be positive");
  detail::require(omega > 0 && Omega > 0, "frequencies must be positive");
  detail::require(Omega >= omega, "Omega < omega would need a negative red detuning");
  IonParams ion;
  ion.eta0 = eta0;
  ion.Omega0 = g_tilde * std::sqrt(omega * Omega) / (2 * std::sqrt(2.0) * eta0);
  ion.Omega_p = eps_tilde * Omega;
  ion.delta_b = Omega + omega;
  ion.delta_r = Omega - omega;
  ion.validate();
  return ion;
}

enum class FrequencyConvention { angular, ordinary };

/// Parses "2pi*9.9kHz", "9.9 kHz" (ordinary), "62200 rad/s" or a bare number
/// (angular, rad/s). Returns angular frequency.
inline double parse_frequency(const std::string& text) {
  static const std::regex re(R"(^\s*(2\s*(?:pi|π)\s*[*x×]?\s*)?([-+0-9.eE]+)\s*(Hz|kHz|MHz|rad/s)?\s*$)");
  std::smatch m;
  detail::require(std::regex_match(text, m, re), "cannot parse frequency '" + text + "'");
  double value = 0;
  try {
    value = std::stod(m[2].str());
  } catch (const std::exception&) {
    throw ConfigError("cannot parse frequency '" + text + "'");
  }
  const std::string unit = m[3].str();
  const bool two_pi = m[1].matched;
  if (unit == "rad/s" || unit.empty()) {
    detail::require(!two_pi || !unit.empty(), "2pi prefix needs a Hz unit: '" + text + "'");
    return value;
  }
  const double scale = unit == "Hz" ? 1.0 : unit == "kHz" ? 1e3 : 1e6;
  return kTwoPi * value * scale;
}

struct Range {
  double lo = 0, hi = 0;
};

struct HardwareBounds {
  Range Omega0_kHz{9.9, 27.9};
  Range Omega_p_kHz{5.0, 40.0};
  Range Omega_over_omega{50, 400};
  double eta0_max = 0.2;
  double tolerance_kHz = 0.05;
  Range omega_tau{0.75, 2.0};
  double coherence_time_ms = 100;
  FrequencyConvention tau_convention = FrequencyConvention::angular;

  static HardwareBounds from_json(const nlohmann::json& j) {
    static const std::set<std::string> known{"Omega0_kHz",  "Omega_p_kHz",       "Omega_over_omega", "eta0_max",
                                             "tolerance_kHz", "omega_tau",       "coherence_time_ms",
                                             "tau_convention"};
    detail::require(j.is_object(), "hardware bounds must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
      detail::require(known.count(it.key()) > 0, "unknown hardware bounds key '" + it.key() + "'");
    HardwareBounds b;
    auto range = [&](const char* key, Range& r) {
      if (!j.contains(key)) return;
      const auto& v = j.at(key);
      detail::require(v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number(),
                      std::string(key) + " must be [lo, hi]");
      r = {v[0].get<double>(), v[1].get<double>()};
      detail::require(r.lo <= r.hi, std::string(key) + " has lo > hi");
    };
    auto number = [&](const char* key, double& x) {
      if (!j.contains(key)) return;
      detail::require(j.at(key).is_number(), std::string(key) + " must be a number");
      x = j.at(key).get<double>();
    };
    range("Omega0_kHz", b.Omega0_kHz);
    range("Omega_p_kHz", b.Omega_p_kHz);
    range("Omega_over_omega", b.Omega_over_omega);
    range("omega_tau", b.omega_tau);
    number("eta0_max", b.eta0_max);
    number("tolerance_kHz", b.tolerance_kHz);
    number("coherence_time_ms", b.coherence_time_ms);
    detail::require(b.tolerance_kHz >= 0 && b.coherence_time_ms > 0, "tolerance and coherence time must be positive");
    if (j.contains("tau_convention")) {
      const auto& c = j.at("tau_convention");
      detail::require(c.is_string() && (c == "angular" || c == "ordinary"),
                      "tau_convention must be \"angular\" or \"ordinary\"");
      b.tau_convention = c == "angular" ? FrequencyConvention::angular : FrequencyConvention::ordinary;
    }
    return b;
  }
};

/// Quench duration in seconds for a dimensionless omega*tau.
inline double quench_time_seconds(double omega_tau, double omega, FrequencyConvention c) {
  return c == FrequencyConvention::angular ? omega_tau / omega : omega_tau / (omega / kTwoPi);
}

inline nlohmann::json check_range(double value, const Range& r, double tol) {
  const double margin = std::min(value - r.lo, r.hi - value);
  return {{"value", value}, {"lo", r.lo}, {"hi", r.hi}, {"margin", margin}, {"pass", margin >= -tol}};
}

inline nlohmann::json feasibility_report(const IonParams& ion, const HardwareBounds& b) {
  const LabMapping m = to_model(ion);
  nlohmann::json checks;
  checks["Omega0_kHz"] = check_range(ion.Omega0 / kTwoPi / 1e3, b.Omega0_kHz, b.tolerance_kHz);
  checks["Omega_p_kHz"] = check_range(ion.Omega_p / kTwoPi / 1e3, b.Omega_p_kHz, b.tolerance_kHz);
  checks["Omega_over_omega"] = check_range(m.Omega / m.omega, b.Omega_over_omega, 1e-9);
  checks["eta0"] = check_range(ion.eta0, Range{0, b.eta0_max}, 0);

  nlohmann::json quench;
  const double t_lo = quench_time_seconds(b.omega_tau.lo, m.omega, b.tau_convention) * 1e3;
  const double t_hi = quench_time_seconds(b.omega_tau.hi, m.omega, b.tau_convention) * 1e3;
  quench["convention"] = b.tau_convention == FrequencyConvention::angular ? "angular" : "ordinary";
  quench["tau_ms"] = {t_lo, t_hi};
  quench["tau_ms_other_convention"] = {
      quench_time_seconds(b.omega_tau.lo, m.omega,
                          b.tau_convention == FrequencyConvention::angular ? FrequencyConvention::ordinary
                                                                           : FrequencyConvention::angular) * 1e3,
      quench_time_seconds(b.omega_tau.hi, m.omega,
                          b.tau_convention == FrequencyConvention::angular ? FrequencyConvention::ordinary
                                                                           : FrequencyConvention::angular) * 1e3};
  quench["coherence_time_ms"] = b.coherence_time_ms;
  quench["margin_ms"] = b.coherence_time_ms - t_hi;
  quench["pass"] = t_hi < b.coherence_time_ms;
  checks["quench_time"] = quench;

  bool all = true;
  for (auto it = checks.begin(); it != checks.end(); ++it) all = all && it.value()["pass"].get<bool>();

  nlohmann::json report;
  report["model"] = {{"omega_rad_s", m.omega}, {"Omega_rad_s", m.Omega},   {"g_rad_s", m.g},
                     {"eps_rad_s", m.eps},     {"g_tilde", m.g_tilde},     {"eps_tilde", m.eps_tilde},
                     {"eta", m.eta}};
  report["checks"] = checks;
  report["pass"] = all;
  return report;
}

}  // namespace multicrit
