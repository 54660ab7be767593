#include "cli/commands.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "cli/config.hpp"
#include "cli/manifest.hpp"
#include "multicrit/critical_scan.hpp"
#include "multicrit/dynamics.hpp"
#include "multicrit/ion.hpp"
#include "multicrit/landau.hpp"
#include "multicrit/phase.hpp"
#include "multicrit/scaling.hpp"
#include "multicrit/spectrum.hpp"

namespace multicrit::cli {

namespace {

using Json = nlohmann::json;

std::ostringstream csv_stream() {
  std::ostringstream os;
  os.precision(17);
  return os;
}

std::string join(const std::vector<double>& xs, char sep = ';') {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? std::string(1, sep) : "") << xs[i];
  return os.str();
}

std::vector<double> read_fractions(ConfigSection& c) {
  auto n = c.has("n_fractions") ? c.numbers("n_fractions") : std::vector<double>{1.0};
  if (n.empty()) c.fail("n_fractions", "needs at least one subset");
  return n;
}

ModelParams checked(ModelParams p, ConfigSection& c, const std::string& key) {
  try {
    p.validate();
  } catch (const ConfigError& e) {
    c.fail(key, e.what());
  }
  return p;
}

CriticalPoint locate_from(ConfigSection& c, const std::vector<double>& n) {
  std::optional<std::vector<double>> guess = c.optional_numbers("initial_guess");
  if (guess && guess->size() != n.size() + 1) c.fail("initial_guess", "needs (g_tilde, eps_tilde_1..eps_tilde_M)");
  return locate_multicritical(n, guess);
}

Json fit_json(const FitResult& f) {
  return {{"exponent", f.exponent},
          {"stderr", f.stderr_},
          {"prefactor", f.prefactor},
          {"window", {f.window.first, f.window.second}},
          {"n_points", f.n_points}};
}

Json windows_json(const std::vector<FitResult>& ws) {
  Json out = Json::array();
  for (const auto& w : ws) out.push_back(fit_json(w));
  return out;
}

std::string points_csv(const std::string& x, const std::string& y, const Points& pts) {
  auto os = csv_stream();
  os << x << ',' << y << '\n';
  for (const auto& [a, b] : pts) os << a << ',' << b << '\n';
  return os.str();
}

std::string fraction_string(const Fraction& f) {
  return std::to_string(f.numerator()) + "/" + std::to_string(f.denominator());
}

// ---------------------------------------------------------------------------

struct PhaseRow {
  std::vector<double> coords;
  PhasePoint point;
};

ModelParams endpoint(ConfigSection s, const std::vector<double>& n) {
  ModelParams p;
  p.n_fractions = n;
  p.g_tilde = s.number("g_tilde");
  p.eps_tilde = s.numbers("eps_tilde");
  p.h_tilde = s.has("h_tilde") ? s.numbers("h_tilde") : std::vector<double>{};
  s.finish();
  return checked(p, s, "eps_tilde");
}

CommandOutput phase_diagram(ConfigSection& c, const RunOptions& opts) {
  const auto n = read_fractions(c);
  const std::size_t M = n.size();
  std::vector<std::vector<double>> axes{c.grid("g_tilde")};
  for (std::size_t j = 1; j <= M; ++j) axes.push_back(c.grid("eps_tilde_" + std::to_string(j)));
  for (std::size_t j = 1; j <= M; ++j) axes.push_back(c.grid("h_tilde_" + std::to_string(j), {0.0}));
  std::size_t total = 1;
  for (std::size_t k = 0; k < axes.size(); ++k) {
    if (axes[k].empty()) c.fail(k == 0 ? "g_tilde" : "eps_tilde_1", "grid is empty");
    total *= axes[k].size();
  }
  if (total > 2'000'000) c.fail("g_tilde", "grid has more than 2e6 points");
  std::vector<ParameterPath> paths;
  if (c.has("coexistence_paths")) {
    for (auto& s : c.sections("coexistence_paths")) {
      ParameterPath path{endpoint(s.section("start"), n), endpoint(s.section("end"), n), s.integer("samples", 200)};
      if (path.samples < 2) s.fail("samples", "needs at least 2 samples");
      s.finish();
      paths.push_back(path);
    }
  }
  c.finish();

  const auto coords_of = [&](std::size_t idx) {
    std::vector<double> x(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
      x[k] = axes[k][idx % axes[k].size()];
      idx /= axes[k].size();
    }
    return x;
  };
  const auto rows = parallel_map<PhaseRow>(total, [&](std::size_t i) {
    const auto x = coords_of(i);
    ModelParams p;
    p.n_fractions = n;
    p.g_tilde = x[0];
    p.eps_tilde.assign(x.begin() + 1, x.begin() + 1 + static_cast<std::ptrdiff_t>(M));
    p.h_tilde.assign(x.begin() + 1 + static_cast<std::ptrdiff_t>(M), x.end());
    p.validate();
    if (p.g_tilde == 0.0) {
      PhasePoint np;
      np.params = p;
      np.minimizers = {0.0};
      np.phase = "NP";
      double e = 0;
      for (std::size_t j = 0; j < M; ++j) e -= 0.5 * n[j] * std::sqrt(1 + p.eps_tilde[j] * p.eps_tilde[j]);
      np.energy = e;
      return PhaseRow{x, np};
    }
    return PhaseRow{x, minimize(p)};
  }, opts.workers());

  CommandOutput out;
  auto os = csv_stream();
  os << "g_tilde";
  for (std::size_t j = 1; j <= M; ++j) os << ",eps_tilde_" << j;
  for (std::size_t j = 1; j <= M; ++j) os << ",h_tilde_" << j;
  os << ",phase_label,n_minimizers,minimizers,z_G,energy\n";
  std::map<std::string, int> counts;
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.coords.size(); ++k) os << (k ? "," : "") << r.coords[k];
    const double zg = r.point.minimizers.empty() ? 0.0 : r.point.minimizers.back();
    os << ',' << r.point.phase << ',' << r.point.minimizers.size() << ',' << join(r.point.minimizers) << ',' << zg
       << ',' << r.point.energy << '\n';
    ++counts[r.point.phase];
  }
  out.files.emplace_back("phase_diagram.csv", os.str());

  if (!paths.empty()) {
    const auto traces = parallel_map<TraceResult>(paths.size(), [&](std::size_t i) { return trace_first_order(paths[i]); },
                                                  opts.workers());
    auto cs = csv_stream();
    cs << "path,s,g_tilde";
    for (std::size_t j = 1; j <= M; ++j) cs << ",eps_tilde_" << j;
    for (std::size_t j = 1; j <= M; ++j) cs << ",h_tilde_" << j;
    cs << ",label,n_minimizers,minimizers,energy_split\n";
    Json labels = Json::array();
    for (std::size_t i = 0; i < traces.size(); ++i) {
      for (const auto& pt : traces[i].points) {
        cs << i << ',' << pt.s << ',' << pt.params.g_tilde;
        for (std::size_t j = 0; j < M; ++j) cs << ',' << pt.params.eps_tilde[j];
        for (std::size_t j = 0; j < M; ++j) cs << ',' << pt.params.field(j);
        cs << ',' << pt.label << ',' << pt.minimizers.size() << ',' << join(pt.minimizers) << ',' << pt.energy_split
           << '\n';
        labels.push_back(pt.label);
      }
      out.points.push_back({{"path", i}, {"coexistence_points", traces[i].points.size()},
                            {"lost_branches", traces[i].lost_branches}});
    }
    out.files.emplace_back("coexistence.csv", cs.str());
    out.summary["coexistence_labels"] = labels;
  }
  out.summary["grid_points"] = total;
  out.summary["phase_counts"] = counts;
  return out;
}

// ---------------------------------------------------------------------------

CommandOutput locate(ConfigSection& c, const RunOptions& opts) {
  const auto n = read_fractions(c);
  MulticriticalOptions mo;
  mo.tolerance = opts.tol.value_or(c.number("tolerance", mo.tolerance));
  mo.max_iterations = c.integer("max_iterations", mo.max_iterations);
  mo.seeds = c.integer("seeds", mo.seeds);
  std::optional<std::vector<double>> guess = c.optional_numbers("initial_guess");
  if (guess && guess->size() != n.size() + 1) c.fail("initial_guess", "needs (g_tilde, eps_tilde_1..eps_tilde_M)");
  const bool exact = c.boolean("exact_rational", false);
  if (exact && n.size() != 1) c.fail("exact_rational", "exact mode exists only for a single subset");
  if (!(mo.tolerance > 0) || mo.max_iterations < 1 || mo.seeds < 1) c.fail("tolerance", "tolerances and counts must be positive");
  c.finish();

  const auto t0 = std::chrono::steady_clock::now();
  const CriticalPoint cp = locate_multicritical(n, guess, mo);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  Json j;
  j["converged"] = true;
  j["n_fractions"] = n;
  j["order"] = cp.order;
  j["g_tilde"] = cp.g_tilde;
  j["eps_tilde"] = cp.eps_tilde;
  j["residuals"] = cp.residuals;
  j["max_residual"] = cp.max_residual();
  j["v"] = cp.v;
  j["iterations"] = cp.iterations;
  if (exact) {
    const auto ex = locate_tricritical_exact();
    j["exact"] = {{"eps_tilde", ex.eps.str()},
                  {"g_tilde_fourth", ex.g_fourth.str()},
                  {"g_tilde", ex.g_tilde}};
  }
  CommandOutput out;
  out.files.emplace_back("locate.json", j.dump(2) + "\n");
  out.points.push_back({{"iterations", cp.iterations}, {"max_residual", cp.max_residual()}, {"wall_seconds", wall}});
  out.summary = j;
  return out;
}

// ---------------------------------------------------------------------------

ModelParams point_from(ConfigSection& c, const std::vector<double>& n) {
  ModelParams p;
  p.n_fractions = n;
  p.N = c.integer("N", 1);
  if (c.boolean("at_multicritical", false)) {
    if (c.has("g_tilde") || c.has("eps_tilde")) c.fail("at_multicritical", "conflicts with explicit g_tilde / eps_tilde");
    const auto cp = locate_from(c, n);
    p.g_tilde = cp.g_tilde;
    p.eps_tilde = cp.eps_tilde;
  } else {
    p.g_tilde = c.number("g_tilde");
    p.eps_tilde = c.numbers("eps_tilde");
  }
  if (c.has("h_tilde")) p.h_tilde = c.numbers("h_tilde");
  return checked(p, c, "eps_tilde");
}

CommandOutput gap_scan_cmd(ConfigSection& c, const RunOptions& opts) {
  const auto n = read_fractions(c);
  ModelParams p = point_from(c, n);
  const auto etas = c.grid("eta_values");
  if (etas.empty()) c.fail("eta_values", "grid is empty");
  for (double e : etas)
    if (!(e > 0)) c.fail("eta_values", "eta must be positive");
  SpectrumOptions so;
  so.n_max_start = c.integer("n_max_start", so.n_max_start);
  so.n_max_cap = c.integer("n_max_cap", so.n_max_cap);
  so.truncation_tol = opts.tol.value_or(c.number("truncation_tol", so.truncation_tol));
  if (so.n_max_start < 2 || so.n_max_cap < so.n_max_start) c.fail("n_max_cap", "need 2 <= n_max_start <= n_max_cap");
  const std::string column = c.string("gap_column", "gap");
  if (column != "gap" && column != "excitation_gap") c.fail("gap_column", "must be \"gap\" or \"excitation_gap\"");
  std::optional<std::vector<double>> window = c.optional_numbers("fit_eta_window");
  if (window && (window->size() != 2 || (*window)[0] >= (*window)[1])) c.fail("fit_eta_window", "needs [lo, hi]");
  const int compare_M = c.integer("compare_order_M", -1);
  c.finish();

  const auto rows = gap_scan(p, etas, so, opts.workers());
  CommandOutput out;
  std::ostringstream os;
  write_gap_csv(os, rows);
  out.files.emplace_back("gap_scan.csv", os.str());

  Points pts;
  for (const auto& r : rows) {
    pts.emplace_back(r.eta, column == "gap" ? r.spectrum.gap : r.spectrum.excitation_gap);
    out.points.push_back({{"eta", r.eta}, {"n_max_used", r.spectrum.n_max_used}, {"converged", r.spectrum.converged}});
  }
  Json fit;
  fit["column"] = column;
  if (pts.size() >= 3) {
    std::optional<std::pair<double, double>> w;
    if (window) w = std::make_pair((*window)[0], (*window)[1]);
    fit["delta_eps"] = fit_json(fit_power_law(pts, w));
    if (pts.size() >= 5) fit["sliding"] = windows_json(sliding_window_fits(pts, 3));
  }
  if (compare_M >= 0) fit["predicted_delta_eps"] = to_double(predicted_exponents(compare_M).delta_eps);
  fit["all_converged"] = std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.spectrum.converged; });
  out.files.emplace_back("fit.json", fit.dump(2) + "\n");
  out.summary = fit;
  return out;
}

// ---------------------------------------------------------------------------

Points read_points_csv(ConfigSection& c, const std::string& path, const std::string& xcol, const std::string& ycol) {
  std::ifstream in(path);
  if (!in) c.fail("data_csv", "cannot read " + path);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const auto col = [&](const std::string& name, const std::string& key) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) c.fail(key, "column '" + name + "' not in " + path);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t xi = col(xcol, "x_column"), yi = col(ycol, "y_column");
  Points pts;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    try {
      pts.emplace_back(std::stod(cells.at(xi)), std::stod(cells.at(yi)));
    } catch (const std::exception&) {
      c.fail("data_csv", path + ":" + std::to_string(lineno) + ": malformed row");
    }
  }
  return pts;
}

CommandOutput exponents(ConfigSection& c, const RunOptions&) {
  const std::string mode = c.string("mode", "mean_field");
  CommandOutput out;
  Json j;
  if (mode == "data") {
    const std::string path = c.string("data_csv");
    const std::string xcol = c.string("x_column", "x"), ycol = c.string("y_column", "y");
    std::optional<std::vector<double>> window = c.optional_numbers("fit_window");
    if (window && (window->size() != 2 || (*window)[0] >= (*window)[1])) c.fail("fit_window", "needs [lo, hi]");
    const int width = c.integer("sliding_width", 0);
    c.finish();
    const Points pts = read_points_csv(c, path, xcol, ycol);
    std::optional<std::pair<double, double>> w;
    if (window) w = std::make_pair((*window)[0], (*window)[1]);
    j["fit"] = fit_json(fit_power_law(pts, w));
    if (width > 0) j["sliding"] = windows_json(sliding_window_fits(pts, width));
  } else if (mode == "mean_field") {
    const auto n = read_fractions(c);
    ScanOptions so;
    if (c.has("scan")) {
      auto s = c.section("scan");
      so.delta_min = s.number("delta_min", so.delta_min);
      so.delta_max = s.number("delta_max", so.delta_max);
      so.points = s.integer("points", so.points);
      so.h_min = s.number("h_min", so.h_min);
      so.h_max = s.number("h_max", so.h_max);
      so.window = s.integer("window", so.window);
      s.finish();
      if (!(so.delta_min > 0 && so.delta_max > so.delta_min && so.h_min > 0 && so.h_max > so.h_min))
        c.fail("scan", "needs 0 < min < max for both ranges");
      if (so.window < 3 || so.points < so.window) c.fail("scan", "needs window >= 3 and points >= window");
    }
    const auto cp = locate_from(c, n);
    c.finish();
    const auto f = fit_critical_exponents(cp, so);
    const auto t = predicted_exponents(static_cast<int>(n.size()));
    j["critical_point"] = {{"g_tilde", cp.g_tilde}, {"eps_tilde", cp.eps_tilde}, {"max_residual", cp.max_residual()}};
    j["beta_r"] = fit_json(f.beta_r);
    j["gamma_eps_r"] = fit_json(f.gamma_eps_r);
    j["gamma_eps_w1"] = fit_json(f.gamma_eps_w1);
    j["sliding"] = {{"beta_r", windows_json(f.beta_r_windows)},
                    {"gamma_eps_r", windows_json(f.gamma_eps_r_windows)},
                    {"gamma_eps_w1", windows_json(f.gamma_eps_w1_windows)}};
    Json pred;
    pred["M"] = t.M;
    pred["beta_r"] = fraction_string(t.beta_r);
    pred["gamma_eps_r"] = fraction_string(t.gamma_eps_r);
    pred["gamma_eps_w1"] = fraction_string(t.gamma_eps_w1);
    pred["xi_r"] = fraction_string(t.xi_r);
    pred["xi_w1"] = fraction_string(t.xi_w1);
    pred["delta_eps"] = fraction_string(t.delta_eps);
    j["predicted"] = pred;
    out.files.emplace_back("z_vs_r.csv", points_csv("abs_r", "z_G", f.z_vs_r));
    out.files.emplace_back("gap_vs_r.csv", points_csv("r", "mf_gap", f.gap_vs_r));
    out.files.emplace_back("gap_vs_w1.csv", points_csv("abs_w1", "mf_gap", f.gap_vs_w1));
  } else {
    c.fail("mode", "must be \"mean_field\" or \"data\"");
  }
  out.files.emplace_back("fits.json", j.dump(2) + "\n");
  out.summary = j;
  return out;
}

// ---------------------------------------------------------------------------

std::vector<ScalingCurve> curves_of(const std::vector<QuenchResult>& rs) {
  std::vector<ScalingCurve> out;
  for (const auto& r : rs) {
    if (out.empty() || out.back().eta != r.eta) out.push_back({r.eta, {}});
    out.back().points.emplace_back(r.tau, r.jz_residual);
  }
  return out;
}

Json collapse_json(const CollapseResult& cr) {
  return {{"a", cr.a}, {"b", cr.b}, {"spread", cr.spread}, {"spread_x", cr.spread_x},
          {"overlapping_bins", cr.overlapping_bins}};
}

CommandOutput quench_collapse(ConfigSection& c, const RunOptions& opts) {
  const auto n = read_fractions(c);
  QuenchSpec base;
  base.params.n_fractions = n;
  if (c.has("g_tilde") || c.has("eps_tilde")) {
    base.params.g_tilde = c.number("g_tilde");
    base.params.eps_tilde = c.numbers("eps_tilde");
  } else {
    const auto cp = locate_from(c, n);
    base.params.g_tilde = cp.g_tilde;
    base.params.eps_tilde = cp.eps_tilde;
  }
  base.params.N = c.integer("N", 1);
  const auto etas = c.grid("eta_values");
  const auto taus = c.grid("omega_tau_values");
  std::vector<double> distinct = etas;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2) c.fail("eta_values", "need >= 2 eta values for a collapse");
  if (taus.size() < 2) c.fail("omega_tau_values", "need >= 2 quench durations");
  for (double e : distinct)
    if (!(e > 0)) c.fail("eta_values", "eta must be positive");
  for (double t : taus)
    if (!(t > 0)) c.fail("omega_tau_values", "quench durations must be positive");
  if (c.has("noise")) {
    auto s = c.section("noise");
    base.noise = NoiseRates{s.number("gamma_down_per_omega"), s.number("gamma_up_per_omega")};
    s.finish();
  }
  base.integrator_tol = opts.tol.value_or(c.number("integrator_tol", 0.0));
  base.n_max = c.integer("n_max_start", base.n_max);
  base.n_max_cap = c.integer("n_max_cap", base.n_max_cap);
  base.samples = c.integer("samples", base.samples);
  try {
    base.tau = taus.front();
    base.validate();
  } catch (const ConfigError& e) {
    c.fail("n_max_start", e.what());
  }
  std::optional<std::pair<double, std::vector<double>>> reference;
  if (c.has("reference")) {
    auto s = c.section("reference");
    const double eta = s.number("eta");
    const auto rt = s.grid("omega_tau_values");
    s.finish();
    if (!(eta > 0) || rt.size() < 2) c.fail("reference", "needs eta > 0 and >= 2 durations");
    reference = std::make_pair(eta, rt);
  }
  const int M = static_cast<int>(n.size());
  auto [fa, fb] = predicted_exponents(M).quench_exponents();
  double a = to_double(fa), b = to_double(fb);
  if (c.has("exponents")) {
    auto s = c.section("exponents");
    a = s.number("a");
    b = s.number("b");
    s.finish();
  }
  const double perturbation = c.number("perturbation", 0.15);
  CollapseOptions co;
  co.grid_points = c.integer("grid_points", co.grid_points);
  if (co.grid_points < 2) c.fail("grid_points", "needs at least 2");
  const bool trajectories = c.boolean("write_trajectories", false);
  c.finish();

  const auto results = quench_sweep(base, etas, taus, opts.workers());
  std::vector<QuenchResult> ref_results;
  std::optional<ScalingCurve> ref_curve;
  if (reference) {
    QuenchSpec rs = base;
    rs.noise.reset();
    rs.integrator_tol = opts.tol.value_or(0.0);
    ref_results = quench_sweep(rs, {reference->first}, reference->second, opts.workers());
    ref_curve = curves_of(ref_results).front();
  }
  const auto curves = curves_of(results);
  const auto cr = collapse(curves, a, b, ref_curve, co);

  CommandOutput out;
  auto raw = csv_stream();
  raw << "eta,omega_tau,noisy,reference,jz_final,jz_ground,jz_residual,n_max_used,max_trace_error,min_eigenvalue,steps\n";
  const auto emit = [&](const QuenchResult& r, bool is_ref) {
    raw << r.eta << ',' << r.tau << ',' << (r.noisy ? 1 : 0) << ',' << (is_ref ? 1 : 0) << ',' << r.jz_final << ','
        << r.jz_ground << ',' << r.jz_residual << ',' << r.n_max_used << ',' << r.max_trace_error << ','
        << r.min_eigenvalue << ',' << r.steps << '\n';
    out.points.push_back({{"eta", r.eta}, {"omega_tau", r.tau}, {"reference", is_ref}, {"n_max_used", r.n_max_used},
                          {"steps", r.steps}, {"wall_seconds", r.wall_seconds}});
  };
  for (const auto& r : results) emit(r, false);
  for (const auto& r : ref_results) emit(r, true);
  out.files.emplace_back("raw.csv", raw.str());

  auto resc = csv_stream();
  resc << "eta,reference,X,Y\n";
  for (const auto& cc : cr.curves)
    for (const auto& [x, y] : cc.points) resc << cc.eta << ',' << (cc.reference ? 1 : 0) << ',' << x << ',' << y << '\n';
  out.files.emplace_back("rescaled.csv", resc.str());

  Json j = collapse_json(cr);
  j["noisy"] = base.noise.has_value();
  j["reference_eta"] = reference ? Json(reference->first) : Json(nullptr);
  Json perturbed = Json::array();
  double worst_ratio = std::numeric_limits<double>::infinity();
  for (const auto& [da, db] : std::vector<std::pair<double, double>>{
           {perturbation, 0}, {-perturbation, 0}, {0, perturbation}, {0, -perturbation}}) {
    if (perturbation == 0) break;
    const auto pr = collapse(curves, a + da, b + db, ref_curve, co);
    Json e = collapse_json(pr);
    e["ratio"] = cr.spread > 0 ? pr.spread / cr.spread : std::numeric_limits<double>::infinity();
    worst_ratio = std::min(worst_ratio, e["ratio"].get<double>());
    perturbed.push_back(e);
  }
  j["perturbed"] = perturbed;
  if (!perturbed.empty()) j["min_perturbation_ratio"] = worst_ratio;
  out.files.emplace_back("collapse.json", j.dump(2) + "\n");
  if (trajectories) {
    for (const auto& r : results) {
      std::ostringstream ts;
      write_trajectory_csv(ts, r);
      std::ostringstream name;
      name.precision(6);
      name << "trajectory_eta" << r.eta << "_tau" << r.tau << ".csv";
      out.files.emplace_back(name.str(), ts.str());
    }
  }
  out.summary = j;
  return out;
}

// ---------------------------------------------------------------------------

double frequency(ConfigSection& c, const std::string& key) {
  const auto& v = c.raw(key);
  try {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_frequency(v.get<std::string>());
  } catch (const ConfigError& e) {
    c.fail(key, e.what());
  }
  c.fail(key, "expected a frequency such as \"2pi*200Hz\" or a number in rad/s");
}

double kHz(double angular) { return angular / kTwoPi / 1e3; }

Json ion_json(const IonParams& ion) {
  return {{"delta_b_kHz", kHz(ion.delta_b)}, {"delta_r_kHz", kHz(ion.delta_r)}, {"Omega0_kHz", kHz(ion.Omega0)},
          {"Omega_p_kHz", kHz(ion.Omega_p)}, {"eta0", ion.eta0},
          {"angular_rad_s",
           {{"delta_b", ion.delta_b}, {"delta_r", ion.delta_r}, {"Omega0", ion.Omega0}, {"Omega_p", ion.Omega_p}}}};
}

CommandOutput ion(ConfigSection& c, const RunOptions&) {
  HardwareBounds bounds;
  if (c.has("hardware_bounds") && c.has("hardware_bounds_file")) c.fail("hardware_bounds", "give either inline bounds or a file");
  try {
    if (c.has("hardware_bounds")) bounds = HardwareBounds::from_json(c.raw("hardware_bounds"));
    if (c.has("hardware_bounds_file")) {
      const std::string path = c.string("hardware_bounds_file");
      std::ifstream in(path);
      if (!in) c.fail("hardware_bounds_file", "cannot read " + path);
      bounds = HardwareBounds::from_json(Json::parse(in));
    }
  } catch (const Json::parse_error& e) {
    c.fail("hardware_bounds_file", e.what());
  } catch (const ConfigError& e) {
    c.fail(c.has("hardware_bounds") ? "hardware_bounds" : "hardware_bounds_file", e.what());
  }
  Json j;
  CommandOutput out;
  if (c.has("lab")) {
    auto s = c.section("lab");
    IonParams ip;
    ip.delta_b = frequency(s, "delta_b");
    ip.delta_r = frequency(s, "delta_r");
    ip.Omega0 = frequency(s, "Omega0");
    ip.Omega_p = frequency(s, "Omega_p");
    ip.eta0 = s.number("eta0");
    s.finish();
    try {
      ip.validate();
    } catch (const ConfigError& e) {
      c.fail("lab", e.what());
    }
    j["lab"] = ion_json(ip);
    j["lab"]["feasibility"] = feasibility_report(ip, bounds);
  }
  if (c.has("omega")) {
    const double omega = frequency(c, "omega");
    const auto ratios = c.grid("Omega_over_omega");
    const double eta0 = c.number("eta0");
    double g = 0, e = 0;
    if (c.has("target_g_tilde") || c.has("target_eps_tilde")) {
      g = c.number("target_g_tilde");
      e = c.number("target_eps_tilde");
    } else {
      const auto cp = locate_multicritical({1.0});
      g = cp.g_tilde;
      e = cp.eps_tilde[0];
    }
    if (ratios.empty()) c.fail("Omega_over_omega", "grid is empty");
    c.finish();
    Json settings = Json::array();
    for (double ratio : ratios) {
      IonParams ip;
      try {
        ip = from_model(g, e, omega, ratio * omega, eta0);
      } catch (const ConfigError& err) {
        c.fail("Omega_over_omega", err.what());
      }
      const LabMapping m = to_model(ip);
      const double round_trip =
          std::max({std::abs(m.g_tilde - g) / g, std::abs(m.eps_tilde - e) / std::max(e, 1.0),
                    std::abs(m.omega - omega) / omega, std::abs(m.Omega - ratio * omega) / (ratio * omega)});
      Json s = ion_json(ip);
      s["Omega_over_omega"] = ratio;
      s["eta"] = m.eta;
      s["round_trip_error"] = round_trip;
      s["feasibility"] = feasibility_report(ip, bounds);
      settings.push_back(s);
    }
    j["target"] = {{"g_tilde", g}, {"eps_tilde", e}, {"omega_kHz", kHz(omega)}, {"eta0", eta0}};
    j["settings"] = settings;
  } else {
    c.finish();
  }
  if (!j.contains("lab") && !j.contains("settings")) c.fail("omega", "give \"omega\" (model targets) or \"lab\" parameters");
  out.files.emplace_back("ion.json", j.dump(2) + "\n");
  out.summary = j;
  return out;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"phase-diagram", "locate", "gap-scan", "exponents", "quench-collapse", "ion"};
  return names;
}

CommandOutput run_command(const std::string& command, const std::string& config_text, const RunOptions& opts) {
  if (opts.tol && !(*opts.tol > 0)) throw ConfigError("--tol must be positive");
  ConfigSection c = ConfigSection::parse(config_text);
  const auto t0 = std::chrono::steady_clock::now();
  CommandOutput out;
  if (command == "phase-diagram") out = phase_diagram(c, opts);
  else if (command == "locate") out = locate(c, opts);
  else if (command == "gap-scan") out = gap_scan_cmd(c, opts);
  else if (command == "exponents") out = exponents(c, opts);
  else if (command == "quench-collapse") out = quench_collapse(c, opts);
  else if (command == "ion") out = ion(c, opts);
  else throw ConfigError("unknown command '" + command + "'");
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::filesystem::create_directories(opts.out_dir);
  RunManifest manifest(command, config_text, opts.workers(), opts.serial);
  for (const auto& [name, content] : out.files) manifest.write_output(opts.out_dir, name, content);
  for (auto& p : out.points) manifest.add_point(p);
  if (opts.tol) manifest.set("tol_override", *opts.tol);
  manifest.finish(opts.out_dir, wall);
  return out;
}

int run_and_report(const std::string& command, const std::string& config_text, const RunOptions& opts) {
  try {
    run_command(command, config_text, opts);
    return kSuccess;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ConvergenceError& e) {
    std::cerr << "numeric non-convergence: " << e.what() << "\n";
    try {
      std::filesystem::create_directories(opts.out_dir);
      std::ofstream f(opts.out_dir / "failure.json");
      f << Json{{"command", command}, {"converged", false}, {"error", e.what()}}.dump(2) << "\n";
    } catch (const std::exception&) {
    }
    return kNonConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace multicrit::cli
