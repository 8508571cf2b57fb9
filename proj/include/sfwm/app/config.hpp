#pragma once

// Run configuration: one JSON document, nm/cm at the interface.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "sfwm/dispersion.hpp"
#include "sfwm/fitkit.hpp"
#include "sfwm/jsa.hpp"
#include "sfwm/processes.hpp"

namespace sfwm::app {

struct ModeScan {
  double wavelength_min_nm = 550.0;
  double wavelength_max_nm = 850.0;
  int points = 301;
};

struct RunConfig {
  dispersion::FiberSpec fiber;
  processes::PumpSpec pump;
  spectral::GridOptions grid;
  /// Ranges and resolution only; threads come from the command line.
  spectral::MapOptions map;
  fitkit::FitConfig fit;
  ModeScan modes;
  std::string output_dir = "out";

  /// Throws ConfigError on any out-of-range value.
  void validate() const;
};

/// Every key is optional and defaults as in RunConfig; unknown keys are
/// rejected. Pump amplitudes are normalized to unit total power.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

}  // namespace sfwm::app
