#include "sfwm/app/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sfwm/app/config.hpp"
#include "sfwm/app/output.hpp"
#include "sfwm/constants.hpp"
#include "sfwm/errors.hpp"
#include "sfwm/fitkit.hpp"
#include "sfwm/jsa.hpp"
#include "sfwm/parallel.hpp"
#include "sfwm/processes.hpp"
#include "sfwm/statemodel.hpp"

namespace sfwm::app {
namespace {

using nlohmann::json;
using processes::ProcessSpec;

struct CliOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
  std::vector<std::string> labels;
  std::string observations;
  std::vector<double> signal_window;
  std::vector<double> idler_window;
};

struct Context {
  RunConfig config;
  int threads = 1;
  dispersion::Fiber fiber;
  RunManifest manifest;
};

int resolve_threads(const std::optional<int>& flag) {
  if (flag) {
    if (*flag < 1) throw ConfigError("--threads must be positive");
    return *flag;
  }
  if (const char* env = std::getenv("SFWM_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || parsed < 1) throw ConfigError("SFWM_THREADS must be a positive integer");
    return static_cast<int>(parsed);
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

json modes_json(const processes::ModeCombo& m) {
  return {{"pump1", m.pump1.name()}, {"pump2", m.pump2.name()}, {"signal", m.signal.name()}, {"idler", m.idler.name()}};
}

json nullable(double value) { return std::isfinite(value) ? json(value) : json(nullptr); }

std::vector<ProcessSpec> solve_all(const Context& ctx) {
  const auto combos = processes::viable_six_mode_processes();
  return processes::solve_processes(ctx.fiber, combos, ctx.config.pump.omega());
}

std::string grid_csv(const spectral::JsaGrid& grid, const Eigen::MatrixXd& values) {
  // ν_s along the header row, ν_i down the first column.
  CsvWriter csv;
  std::vector<std::string> header{"nu_i\\nu_s"};
  for (double v : grid.nu_s) header.push_back(format_number(v));
  csv.row(header);
  for (std::size_t c = 0; c < grid.nu_i.size(); ++c) {
    std::vector<std::string> row{format_number(grid.nu_i[c])};
    for (std::size_t r = 0; r < grid.nu_s.size(); ++r)
      row.push_back(format_number(values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))));
    csv.row(row);
  }
  return csv.text();
}

std::pair<double, double> wavelength_extent(double omega_center, const std::vector<double>& detunings) {
  const double a = nm_from_omega(omega_center + detunings.front());
  const double b = nm_from_omega(omega_center + detunings.back());
  return {std::min(a, b), std::max(a, b)};
}

json term_json(const statemodel::StateTerm& t) {
  return {{"label", t.process.label},
          {"modes", modes_json(t.process.modes)},
          {"eta", {t.eta.real(), t.eta.imag()}},
          {"weight", t.weight()},
          {"K", t.schmidt.K},
          {"purity", t.schmidt.purity},
          {"lambda_s_nm", t.process.lambda_s_nm()},
          {"lambda_i_nm", t.process.lambda_i_nm()}};
}

json state_json(const statemodel::TwoPhotonState& state) {
  json terms = json::array();
  for (const auto& t : state.terms) terms.push_back(term_json(t));
  json form;
  const auto reduced = statemodel::schmidt_form(state);
  if (const auto* pairs = std::get_if<std::vector<statemodel::SchmidtPair>>(&reduced)) {
    json list = json::array();
    for (const auto& p : *pairs)
      list.push_back({{"label", p.label},
                      {"signal_mode", p.signal_mode.name()},
                      {"idler_mode", p.idler_mode.name()},
                      {"weight", p.weight},
                      {"purity", p.purity}});
    form = {{"qualifies", true}, {"pairs", list}};
  } else {
    const auto& d = std::get<statemodel::NotSchmidt>(reduced);
    json purities = json::object();
    for (const auto& [label, purity] : d.purities) purities[label] = purity;
    form = {{"qualifies", false}, {"reason", d.reason}, {"purities", purities}};
    if (d.overlapping) form["overlapping"] = {d.overlapping->first, d.overlapping->second};
  }
  return {{"terms", terms},
          {"survival_probability", state.survival_probability},
          {"schmidt_form", form}};
}

int cmd_modes(Context& ctx) {
  const auto& scan = ctx.config.modes;
  if (scan.wavelength_min_nm < 210.0 || scan.wavelength_max_nm > 3700.0)
    throw ConfigError("modes.wavelength_nm must lie within 210-3700 nm");
  for (const auto& mode : dispersion::kSixModeBasis) {
    CsvWriter csv;
    csv.row({"wavelength_nm", "guided", "n_eff", "k_per_um", "k_prime_s_per_um"});
    for (int j = 0; j < scan.points; ++j) {
      const double nm = scan.wavelength_min_nm + (scan.wavelength_max_nm - scan.wavelength_min_nm) * j / (scan.points - 1);
      const auto s = ctx.fiber.solve_mode(mode, omega_from_nm(nm));
      auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
      csv.row({format_number(nm), s.guided ? "true" : "false", opt(s.n_eff), opt(s.k), opt(s.k_prime)});
    }
    ctx.manifest.write("modes_" + mode.name() + ".csv", csv.text());
  }
  return kOk;
}

int cmd_processes(Context& ctx) {
  const auto list = solve_all(ctx);
  const double sigma = ctx.config.pump.sigma();
  json records = json::array();
  for (const auto& p : list) {
    json rec = {{"label", p.label},
                {"modes", modes_json(p.modes)},
                {"description", p.modes.describe()},
                {"lambda_s_nm", p.lambda_s_nm()},
                {"lambda_i_nm", p.lambda_i_nm()}};
    try {
      const auto t = processes::gvm_terms(ctx.fiber, p, ctx.config.pump);
      rec["D"] = t.D;
      rec["T_s"] = t.T_s;
      rec["T_i"] = t.T_i;
      rec["gamma"] = t.gamma;
      rec["gvm_residual"] = spectral::gvm_residual(t, sigma);
    } catch (const ModeNotGuided&) {
      for (const char* key : {"D", "T_s", "T_i", "gamma", "gvm_residual"}) rec[key] = nullptr;
    }
    records.push_back(rec);
  }
  ctx.manifest.write_json("processes.json", {{"pump_wavelength_nm", ctx.config.pump.center_wavelength_um * 1e3},
                                             {"count", list.size()},
                                             {"processes", records}});
  std::cout << list.size() << " phasematched process(es)\n";
  return kOk;
}

int cmd_jsa(Context& ctx, const CliOptions& cli) {
  const auto all = solve_all(ctx);
  std::vector<ProcessSpec> chosen;
  if (cli.labels.empty()) {
    chosen = all;
  } else {
    for (const auto& label : cli.labels) chosen.push_back(processes::find_process(all, label));
  }
  if (chosen.empty()) throw EmptySelection("no phasematched processes at this pump wavelength");

  std::vector<spectral::JsaGrid> grids(chosen.size());
  parallel_for(chosen.size(), ctx.threads, [&](std::size_t j) {
    grids[j] = spectral::build_jsa(chosen[j], ctx.config.pump, ctx.fiber, ctx.config.grid);
  });

  json layout = json::array();
  double s_lo = 1e300, s_hi = 0.0, i_lo = 1e300, i_hi = 0.0;
  for (const auto& grid : grids) {
    const auto& p = grid.process;
    const auto schmidt = spectral::schmidt(grid);
    ctx.manifest.write("jsa_" + p.label + "_pump.csv", grid_csv(grid, grid.pump_part.cwiseAbs2()));
    ctx.manifest.write("jsa_" + p.label + "_pm.csv", grid_csv(grid, grid.pm_part.cwiseAbs2()));
    ctx.manifest.write("jsa_" + p.label + "_jsi.csv", grid_csv(grid, grid.amplitude.cwiseAbs2()));

    const auto [sl, sh] = wavelength_extent(p.omega_s, grid.nu_s);
    const auto [il, ih] = wavelength_extent(p.omega_i, grid.nu_i);
    s_lo = std::min(s_lo, sl);
    s_hi = std::max(s_hi, sh);
    i_lo = std::min(i_lo, il);
    i_hi = std::max(i_hi, ih);
    const std::vector<double> top(schmidt.singular_values.begin(),
                                  schmidt.singular_values.begin() +
                                      std::min<std::ptrdiff_t>(8, std::ssize(schmidt.singular_values)));
    ctx.manifest.write_json("jsa_" + p.label + "_schmidt.json",
                            {{"label", p.label},
                             {"modes", modes_json(p.modes)},
                             {"signal_nm", {sl, sh}},
                             {"idler_nm", {il, ih}},
                             {"D", grid.terms.D},
                             {"T_s", grid.terms.T_s},
                             {"T_i", grid.terms.T_i},
                             {"gamma", grid.terms.gamma},
                             {"K", schmidt.K},
                             {"purity", schmidt.purity},
                             {"singular_values", top}});
    layout.push_back({{"label", p.label}, {"signal_nm", {sl, sh}}, {"idler_nm", {il, ih}}});
    std::cout << p.label << ": K = " << schmidt.K << ", purity = " << schmidt.purity << "\n";
  }
  ctx.manifest.write_json("jsa_layout.json",
                          {{"processes", layout}, {"combined", {{"signal_nm", {s_lo, s_hi}}, {"idler_nm", {i_lo, i_hi}}}}});
  return kOk;
}

std::string map_csv(const numerics::RealGrid& grid, const std::function<std::string(Eigen::Index, Eigen::Index)>& cell) {
  CsvWriter csv;
  std::vector<std::string> header{"bandwidth_nm\\length_cm"};
  for (double L : grid.col_axis) header.push_back(format_number(L));
  csv.row(header);
  for (Eigen::Index r = 0; r < grid.values.rows(); ++r) {
    std::vector<std::string> row{format_number(grid.row_axis[r])};
    for (Eigen::Index c = 0; c < grid.values.cols(); ++c) row.push_back(cell(r, c));
    csv.row(row);
  }
  return csv.text();
}

int cmd_map(Context& ctx) {
  const auto list = solve_all(ctx);
  if (list.empty()) throw EmptySelection("no phasematched processes at this pump wavelength");
  auto options = ctx.config.map;
  options.grid = ctx.config.grid;
  options.threads = ctx.threads;
  const auto map = spectral::factorability_map(ctx.fiber, list, ctx.config.pump, options);

  for (std::size_t j = 0; j < map.labels.size(); ++j) {
    const auto& g = map.purity[j];
    ctx.manifest.write("map_purity_" + map.labels[j] + ".csv",
                       map_csv(g, [&](Eigen::Index r, Eigen::Index c) { return format_number(g.values(r, c)); }));
  }
  ctx.manifest.write("map_min_purity.csv", map_csv(map.min_purity, [&](Eigen::Index r, Eigen::Index c) {
                       return format_number(map.min_purity.values(r, c));
                     }));
  ctx.manifest.write("map_bands.csv", map_csv(map.min_purity, [&](Eigen::Index r, Eigen::Index c) {
                       return std::to_string(map.bands(r, c));
                     }));

  auto nearest = [](const std::vector<double>& axis, double x) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < axis.size(); ++j)
      if (std::abs(axis[j] - x) < std::abs(axis[best] - x)) best = j;
    return static_cast<Eigen::Index>(best);
  };
  const auto r = nearest(map.min_purity.row_axis, ctx.config.pump.bandwidth_nm);
  const auto c = nearest(map.min_purity.col_axis, ctx.config.fiber.length_cm);
  ctx.manifest.write_json("map.json", {{"labels", map.labels},
                                       {"bandwidth_nm", map.min_purity.row_axis},
                                       {"length_cm", map.min_purity.col_axis},
                                       {"band_codes", {{"-1", "missing"}, {"0", "<0.7"}, {"1", ">=0.7"}, {"2", ">=0.9"}, {"3", ">=0.98"}}},
                                       {"configured_point",
                                        {{"bandwidth_nm", map.min_purity.row_axis[r]},
                                         {"length_cm", map.min_purity.col_axis[c]},
                                         {"min_purity", nullable(map.min_purity.values(r, c))},
                                         {"band", map.bands(r, c)}}}});
  return kOk;
}

int cmd_fit(Context& ctx, const CliOptions& cli) {
  if (cli.observations.empty()) throw ConfigError("fit requires --observations FILE");
  const double pump_um = ctx.config.pump.center_wavelength_um;
  const auto peaks = fitkit::read_observations(cli.observations);
  const auto pairs = fitkit::pair_observations(peaks, pump_um);
  const auto viable = processes::viable_six_mode_processes();
  const auto assignment = fitkit::assign_processes(pairs, viable, ctx.fiber, pump_um);
  std::vector<processes::ModeCombo> combos;
  json assigned = json::object();
  for (const auto& pair : pairs) {
    combos.push_back(assignment.at(pair.label));
    assigned[pair.label] = combos.back().describe();
  }

  auto fit_config = ctx.config.fit;
  fit_config.threads = ctx.threads;
  fitkit::FitResult result;
  int code = kOk;
  try {
    result = fitkit::ga_fit(pairs, combos, pump_um, fit_config, ctx.config.fiber);
  } catch (const fitkit::NotConverged& e) {
    result = e.result();
    code = kNumericFailure;
    std::cerr << "warning: " << e.what() << "\n";
  }

  ctx.manifest.write_json("fit_result.json",
                          {{"best",
                            {{"core_radius_um", result.best.core_radius_um},
                             {"numerical_aperture", result.best.numerical_aperture},
                             {"birefringence", result.best.birefringence},
                             {"parity_birefringence", result.best.parity_birefringence}}},
                           {"fitness_per_um", result.fitness},
                           {"converged", result.converged},
                           {"generations", result.generations},
                           {"seed", fit_config.seed},
                           {"assignment", assigned},
                           {"history", result.history}});
  CsvWriter csv;
  csv.row({"generation", "best_fitness_per_um"});
  for (std::size_t g = 0; g < result.history.size(); ++g)
    csv.row({std::to_string(g), format_number(result.history[g])});
  ctx.manifest.write("fit_history.csv", csv.text());
  std::cout << "r = " << result.best.core_radius_um << " um, NA = " << result.best.numerical_aperture
            << ", fitness = " << result.fitness << " 1/um\n";
  return code;
}

statemodel::WavelengthWindow window_from(const std::vector<double>& values, const char* flag) {
  if (values.size() != 2) throw ConfigError(std::string(flag) + " needs LO,HI in nm");
  statemodel::WavelengthWindow w{values[0], values[1]};
  try {
    w.validate();
  } catch (const ArgumentOutOfRange& e) {
    throw ConfigError(std::string(flag) + ": " + e.what());
  }
  return w;
}

int cmd_state(Context& ctx, const CliOptions& cli) {
  const bool filtered = !cli.signal_window.empty() || !cli.idler_window.empty();
  std::optional<statemodel::WavelengthWindow> sw, iw;
  if (filtered) {
    sw = window_from(cli.signal_window, "--signal-window");
    iw = window_from(cli.idler_window, "--idler-window");
  }
  const auto list = solve_all(ctx);
  if (list.empty()) throw EmptySelection("no phasematched processes at this pump wavelength");
  const auto state = statemodel::assemble_state(ctx.fiber, ctx.config.pump, list, {ctx.config.grid, ctx.threads});
  ctx.manifest.write_json("state.json", state_json(state));
  if (filtered) {
    const auto selected = statemodel::postselect(state, *sw, *iw);
    auto doc = state_json(selected);
    doc["signal_window_nm"] = {sw->lo_nm, sw->hi_nm};
    doc["idler_window_nm"] = {iw->lo_nm, iw->hi_nm};
    ctx.manifest.write_json("postselected.json", doc);
    std::cout << selected.terms.size() << " term(s) survive, probability " << selected.survival_probability << "\n";
  }
  return kOk;
}

int dispatch(const std::string& command, const CliOptions& cli) {
  auto config = load_config(cli.config_path);
  if (cli.seed) config.fit.seed = *cli.seed;
  if (cli.out) config.output_dir = *cli.out;
  const auto effective = to_json(config);
  const auto config_text = effective.dump(2) + "\n";

  Context ctx{config, resolve_threads(cli.threads), dispersion::Fiber(config.fiber),
              RunManifest(config.output_dir, command, sha256_hex(config_text))};
  ctx.manifest.write("config.json", config_text);

  int code = kOk;
  if (command == "modes") code = cmd_modes(ctx);
  else if (command == "processes") code = cmd_processes(ctx);
  else if (command == "jsa") code = cmd_jsa(ctx, cli);
  else if (command == "map") code = cmd_map(ctx);
  else if (command == "fit") code = cmd_fit(ctx, cli);
  else if (command == "state") code = cmd_state(ctx, cli);
  ctx.manifest.finish();
  return code;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Intermodal SFWM photon-pair source toolkit", "sfwm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  CliOptions cli;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"modes", "Dispersion tables of the six LP modes over a wavelength scan"},
      {"processes", "Phasematched processes with D, T_s, T_i and GVM residuals"},
      {"jsa", "Joint spectral grids and Schmidt decompositions"},
      {"map", "Purity map over pump bandwidth and fiber length"},
      {"fit", "Genetic-algorithm fit of fiber parameters to observed peaks"},
      {"state", "Multi-process two-photon state, optionally post-selected"}};
  for (const auto& [name, description] : commands) {
    auto* sub = app.add_subcommand(name, description);
    sub->add_option("--config", cli.config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", cli.seed, "Random seed for the fit");
    sub->add_option("--threads", cli.threads, "Worker threads (default: SFWM_THREADS or all cores)");
    sub->add_option("--out", cli.out, "Output directory (overrides output_dir)");
    if (name == "jsa") sub->add_option("--label", cli.labels, "Process label(s); default all");
    if (name == "fit")
      sub->add_option("--observations", cli.observations, "Peak observations (.csv or .json)")->required();
    if (name == "state") {
      sub->add_option("--signal-window", cli.signal_window, "Signal filter LO,HI in nm")->delimiter(',')->expected(2);
      sub->add_option("--idler-window", cli.idler_window, "Idler filter LO,HI in nm")->delimiter(',')->expected(2);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return dispatch(command, cli);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const UnknownProcessLabel& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const EmptySelection& e) {
    std::cerr << "empty result: " << e.what() << "\n";
    return kEmpty;
  } catch (const NoAssignment& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const AmbiguousAssignment& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericFailure;
  }
}

}  // namespace sfwm::app
