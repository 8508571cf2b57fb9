#include "sfwm/app/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>

#include "sfwm/errors.hpp"

namespace sfwm::app {
namespace {

using nlohmann::json;

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> names(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items())
    if (!names.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <class T>
void read(const json& obj, const char* key, T& target, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

void read_range(const json& obj, const char* key, double& lo, double& hi, const std::string& where) {
  if (!obj.contains(key)) return;
  const auto& r = obj.at(key);
  if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
    throw ConfigError(where + "." + key + " must be a [min, max] pair");
  lo = r[0].get<double>();
  hi = r[1].get<double>();
}

std::complex<double> read_amplitude(const json& value, const std::string& where) {
  if (value.is_number()) return {value.get<double>(), 0.0};
  if (value.is_array() && value.size() == 2 && value[0].is_number() && value[1].is_number())
    return {value[0].get<double>(), value[1].get<double>()};
  if (value.is_object()) {
    only_keys(value, where, {"magnitude", "phase_rad"});
    double magnitude = 0.0;
    double phase = 0.0;
    read(value, "magnitude", magnitude, where);
    read(value, "phase_rad", phase, where);
    return std::polar(magnitude, phase);
  }
  throw ConfigError(where + " must be a number, [re, im] or {magnitude, phase_rad}");
}

}  // namespace

void RunConfig::validate() const {
  fiber.validate();
  pump.validate();
  try {
    grid.validate();
    map.validate();
  } catch (const ArgumentOutOfRange& e) {
    throw ConfigError(e.what());
  }
  fit.validate();
  if (!(modes.wavelength_max_nm > modes.wavelength_min_nm) || !(modes.wavelength_min_nm > 0.0))
    throw ConfigError("modes.wavelength_nm must be a nonempty positive range");
  if (modes.points < 2) throw ConfigError("modes.points must be at least 2");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

RunConfig parse_config(const json& doc) {
  RunConfig config;
  only_keys(doc, "config", {"fiber", "pump", "grid", "map", "fit", "modes", "output_dir"});

  if (doc.contains("fiber")) {
    const auto& f = doc["fiber"];
    only_keys(f, "fiber", {"core_radius_um", "numerical_aperture", "birefringence", "parity_birefringence",
                           "length_cm", "lp11_cutoff_v"});
    read(f, "core_radius_um", config.fiber.core_radius_um, "fiber");
    read(f, "numerical_aperture", config.fiber.numerical_aperture, "fiber");
    read(f, "birefringence", config.fiber.birefringence, "fiber");
    read(f, "parity_birefringence", config.fiber.parity_birefringence, "fiber");
    read(f, "length_cm", config.fiber.length_cm, "fiber");
    read(f, "lp11_cutoff_v", config.fiber.lp11_cutoff_v, "fiber");
  }

  config.pump.amplitudes = {{dispersion::modes::LP01x, 1.0},
                            {dispersion::modes::LP11ex, 1.0},
                            {dispersion::modes::LP11ox, 1.0}};
  if (doc.contains("pump")) {
    const auto& p = doc["pump"];
    only_keys(p, "pump", {"wavelength_nm", "bandwidth_nm", "modes"});
    double wavelength_nm = config.pump.center_wavelength_um * 1e3;
    read(p, "wavelength_nm", wavelength_nm, "pump");
    config.pump.center_wavelength_um = wavelength_nm * 1e-3;
    read(p, "bandwidth_nm", config.pump.bandwidth_nm, "pump");
    if (p.contains("modes")) {
      if (!p["modes"].is_object()) throw ConfigError("pump.modes must map mode names to amplitudes");
      config.pump.amplitudes.clear();
      for (const auto& [name, value] : p["modes"].items())
        config.pump.amplitudes[dispersion::ModeLabel::parse(name)] = read_amplitude(value, "pump.modes." + name);
    }
  }
  config.pump.validate();
  config.pump.normalize();

  if (doc.contains("grid")) {
    const auto& g = doc["grid"];
    only_keys(g, "grid", {"size", "span"});
    read(g, "size", config.grid.size, "grid");
    read(g, "span", config.grid.span, "grid");
  }
  config.map.grid = config.grid;

  if (doc.contains("map")) {
    const auto& m = doc["map"];
    only_keys(m, "map", {"length_cm", "bandwidth_nm", "resolution"});
    read_range(m, "length_cm", config.map.length_min_cm, config.map.length_max_cm, "map");
    read_range(m, "bandwidth_nm", config.map.bandwidth_min_nm, config.map.bandwidth_max_nm, "map");
    if (m.contains("resolution")) {
      const auto& r = m["resolution"];
      if (r.is_number_integer()) {
        config.map.bandwidth_points = config.map.length_points = r.get<int>();
      } else if (r.is_array() && r.size() == 2 && r[0].is_number_integer() && r[1].is_number_integer()) {
        config.map.bandwidth_points = r[0].get<int>();
        config.map.length_points = r[1].get<int>();
      } else {
        throw ConfigError("map.resolution must be an integer or [bandwidth_points, length_points]");
      }
    }
  }

  if (doc.contains("modes")) {
    const auto& s = doc["modes"];
    only_keys(s, "modes", {"wavelength_nm", "points"});
    read_range(s, "wavelength_nm", config.modes.wavelength_min_nm, config.modes.wavelength_max_nm, "modes");
    read(s, "points", config.modes.points, "modes");
  }

  if (doc.contains("fit")) {
    const auto& f = doc["fit"];
    only_keys(f, "fit", {"bounds", "population", "generations", "tournament", "blend_alpha", "mutation_scale",
                         "mutation_decay", "mutation_rate", "elitism", "plateau", "target_fitness", "seed"});
    auto& c = config.fit;
    if (f.contains("bounds")) {
      const auto& b = f["bounds"];
      only_keys(b, "fit.bounds", {"core_radius_um", "numerical_aperture", "birefringence", "parity_birefringence"});
      read_range(b, "core_radius_um", c.bounds[0].lo, c.bounds[0].hi, "fit.bounds");
      read_range(b, "numerical_aperture", c.bounds[1].lo, c.bounds[1].hi, "fit.bounds");
      read_range(b, "birefringence", c.bounds[2].lo, c.bounds[2].hi, "fit.bounds");
      read_range(b, "parity_birefringence", c.bounds[3].lo, c.bounds[3].hi, "fit.bounds");
    }
    read(f, "population", c.population, "fit");
    read(f, "generations", c.generations, "fit");
    read(f, "tournament", c.tournament, "fit");
    read(f, "blend_alpha", c.blend_alpha, "fit");
    read(f, "mutation_scale", c.mutation_scale, "fit");
    read(f, "mutation_decay", c.mutation_decay, "fit");
    read(f, "mutation_rate", c.mutation_rate, "fit");
    read(f, "elitism", c.elitism, "fit");
    read(f, "plateau", c.plateau, "fit");
    read(f, "target_fitness", c.target_fitness, "fit");
    read(f, "seed", c.seed, "fit");
  }

  read(doc, "output_dir", config.output_dir, "config");
  config.validate();
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& config) {
  json modes = json::object();
  for (const auto& [mode, a] : config.pump.amplitudes) modes[mode.name()] = {a.real(), a.imag()};
  const auto& f = config.fit;
  return {
      {"fiber",
       {{"core_radius_um", config.fiber.core_radius_um},
        {"numerical_aperture", config.fiber.numerical_aperture},
        {"birefringence", config.fiber.birefringence},
        {"parity_birefringence", config.fiber.parity_birefringence},
        {"length_cm", config.fiber.length_cm},
        {"lp11_cutoff_v", config.fiber.lp11_cutoff_v}}},
      {"pump",
       {{"wavelength_nm", config.pump.center_wavelength_um * 1e3},
        {"bandwidth_nm", config.pump.bandwidth_nm},
        {"modes", modes}}},
      {"grid", {{"size", config.grid.size}, {"span", config.grid.span}}},
      {"map",
       {{"length_cm", {config.map.length_min_cm, config.map.length_max_cm}},
        {"bandwidth_nm", {config.map.bandwidth_min_nm, config.map.bandwidth_max_nm}},
        {"resolution", {config.map.bandwidth_points, config.map.length_points}}}},
      {"modes",
       {{"wavelength_nm", {config.modes.wavelength_min_nm, config.modes.wavelength_max_nm}},
        {"points", config.modes.points}}},
      {"fit",
       {{"bounds",
         {{"core_radius_um", {f.bounds[0].lo, f.bounds[0].hi}},
          {"numerical_aperture", {f.bounds[1].lo, f.bounds[1].hi}},
          {"birefringence", {f.bounds[2].lo, f.bounds[2].hi}},
          {"parity_birefringence", {f.bounds[3].lo, f.bounds[3].hi}}}},
        {"population", f.population},
        {"generations", f.generations},
        {"tournament", f.tournament},
        {"blend_alpha", f.blend_alpha},
        {"mutation_scale", f.mutation_scale},
        {"mutation_decay", f.mutation_decay},
        {"mutation_rate", f.mutation_rate},
        {"elitism", f.elitism},
        {"plateau", f.plateau},
        {"target_fitness", f.target_fitness},
        {"seed", f.seed}}},
      {"output_dir", config.output_dir}};
}

}  // namespace sfwm::app
