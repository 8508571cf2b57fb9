#include "sfwm/processes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

#include "sfwm/constants.hpp"
#include "sfwm/errors.hpp"
#include "sfwm/numerics.hpp"

namespace sfwm::processes {
namespace {

using dispersion::Family;
using dispersion::Parity;
using dispersion::Polarization;

constexpr double kMaterialMinUm = 0.21;
constexpr double kMaterialMaxUm = 3.7;

// Lowest angular frequency at which `mode` is guided (0 for LP01).
double cutoff_omega(const Fiber& fiber, const ModeLabel& mode) {
  if (mode.family == Family::LP01) return 0.0;
  const auto& spec = fiber.spec();
  const double lambda_c = 2.0 * kPi * spec.core_radius_um * spec.numerical_aperture / spec.lp11_cutoff_v;
  return omega_from_um(lambda_c);
}

}  // namespace

std::string ModeCombo::describe() const {
  return pump1.name() + "+" + pump2.name() + "->" + signal.name() + "+" + idler.name();
}

double ProcessSpec::lambda_p_nm() const { return nm_from_omega(omega_p); }
double ProcessSpec::lambda_s_nm() const { return nm_from_omega(omega_s); }
double ProcessSpec::lambda_i_nm() const { return nm_from_omega(omega_i); }

double sigma_from_bandwidth(double wavelength_um, double bandwidth_nm) {
  const double lambda_m = wavelength_um * 1e-6;
  const double delta_omega = 2.0 * kPi * kSpeedOfLight / (lambda_m * lambda_m) * bandwidth_nm * 1e-9;
  return delta_omega / (2.0 * std::sqrt(std::numbers::ln2));
}

double PumpSpec::omega() const { return omega_from_um(center_wavelength_um); }

double PumpSpec::sigma() const { return sigma_from_bandwidth(center_wavelength_um, bandwidth_nm); }

std::complex<double> PumpSpec::amplitude(const ModeLabel& mode) const {
  const auto it = amplitudes.find(mode);
  return it == amplitudes.end() ? std::complex<double>{} : it->second;
}

void PumpSpec::normalize() {
  double power = 0.0;
  for (const auto& [mode, a] : amplitudes) power += std::norm(a);
  if (!(power > 0.0)) throw ConfigError("pump: all mode amplitudes are zero");
  const double scale = 1.0 / std::sqrt(power);
  for (auto& [mode, a] : amplitudes) a *= scale;
}

void PumpSpec::validate() const {
  if (!(bandwidth_nm > 0.0)) throw ConfigError("pump: bandwidth must be positive");
  if (!(center_wavelength_um > 0.0)) throw ConfigError("pump: wavelength must be positive");
  for (const auto& [mode, a] : amplitudes) {
    if (mode.polarization != Polarization::X && std::abs(a) > 0.0) {
      throw ConfigError("pump: only x-polarized modes may carry amplitude, got " + mode.name());
    }
  }
}

std::vector<ModeCombo> enumerate_all(std::span<const ModeLabel> modes) {
  std::vector<ModeCombo> out;
  out.reserve(modes.size() * modes.size() * modes.size() * modes.size());
  for (const auto& p1 : modes)
    for (const auto& p2 : modes)
      for (const auto& s : modes)
        for (const auto& i : modes) out.push_back({p1, p2, s, i});
  return out;
}

bool conserves_parity_and_oam(const ModeCombo& combo) {
  int even = 0;
  int odd = 0;
  for (const auto& m : {combo.pump1, combo.pump2, combo.signal, combo.idler}) {
    if (m.parity == Parity::Even) ++even;
    if (m.parity == Parity::Odd) ++odd;
  }
  return even % 2 == 0 && odd % 2 == 0;
}

std::vector<ModeCombo> select_viable(std::span<const ModeCombo> combos) {
  std::vector<ModeCombo> out;
  for (auto combo : combos) {
    const bool cross_polarized =
        combo.pump1.polarization == Polarization::X && combo.pump2.polarization == Polarization::X &&
        combo.signal.polarization == Polarization::Y && combo.idler.polarization == Polarization::Y;
    if (!cross_polarized || !conserves_parity_and_oam(combo)) continue;
    if (combo.pump2 < combo.pump1) std::swap(combo.pump1, combo.pump2);
    out.push_back(combo);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<ModeCombo> viable_six_mode_processes() {
  return select_viable(enumerate_all(dispersion::kSixModeBasis));
}

double phasemismatch(const Fiber& fiber, const ModeCombo& combo, double omega_p, double omega_s) {
  const double omega_i = 2.0 * omega_p - omega_s;
  auto k = [&](const ModeLabel& mode, double omega) {
    const auto value = fiber.wavenumber(mode, omega);
    if (!value) {
      throw ModeNotGuided(mode.name() + " not guided at " + std::to_string(nm_from_omega(omega)) +
                          " nm");
    }
    return *value;
  };
  return k(combo.pump1, omega_p) + k(combo.pump2, omega_p) - k(combo.signal, omega_s) -
         k(combo.idler, omega_i);
}

std::vector<ProcessSpec> solve_process(const Fiber& fiber, const ModeCombo& combo, double omega_p,
                                       const ScanOptions& options) {
  const auto k1 = fiber.wavenumber(combo.pump1, omega_p);
  const auto k2 = fiber.wavenumber(combo.pump2, omega_p);
  if (!k1 || !k2) return {};
  const double pump_sum = *k1 + *k2;

  // Signal band: below the pump, above the material window and the signal
  // cutoff, with the idler kept inside the material window.
  double lo = std::max(omega_from_um(kMaterialMaxUm), 2.0 * omega_p - omega_from_um(kMaterialMinUm));
  lo = std::max(lo, cutoff_omega(fiber, combo.signal));
  double hi = std::min(omega_p, 2.0 * omega_p - cutoff_omega(fiber, combo.idler));
  lo *= 1.0 + 1e-12;
  hi *= 1.0 - 1e-12;
  if (!(lo < hi)) return {};

  auto mismatch = [&](double omega_s) {
    const auto ks = fiber.wavenumber(combo.signal, omega_s);
    const auto ki = fiber.wavenumber(combo.idler, 2.0 * omega_p - omega_s);
    if (!ks || !ki) return std::numeric_limits<double>::quiet_NaN();
    return pump_sum - *ks - *ki;
  };

  numerics::RootOptions root_options;
  root_options.rel_width = options.rel_width;
  std::vector<ProcessSpec> out;
  for (double omega_s : numerics::find_roots(mismatch, lo, hi, options.samples, root_options)) {
    if (!(omega_s < omega_p)) continue;
    const double omega_i = 2.0 * omega_p - omega_s;
    if (!fiber.guided(combo.signal, omega_s) || !fiber.guided(combo.idler, omega_i)) continue;
    out.push_back({combo, omega_p, omega_s, omega_i, {}});
  }
  return out;
}

void assign_labels(std::vector<ProcessSpec>& processes) {
  // Near-degenerate idlers (e.g. the even/odd LP11 twins) fall into one
  // bucket and are ordered by mode combination.
  auto bucket = [](const ProcessSpec& p) { return std::llround(p.omega_i / (p.omega_p * 1e-9)); };
  std::stable_sort(processes.begin(), processes.end(), [&](const ProcessSpec& a, const ProcessSpec& b) {
    const auto ka = bucket(a);
    const auto kb = bucket(b);
    if (ka != kb) return ka > kb;
    return a.modes < b.modes;
  });
  for (std::size_t j = 0; j < processes.size(); ++j) {
    processes[j].label = j < 26 ? std::string(1, static_cast<char>('a' + j)) : "p" + std::to_string(j);
  }
}

std::vector<ProcessSpec> solve_processes(const Fiber& fiber, std::span<const ModeCombo> combos,
                                         double omega_p, const ScanOptions& options) {
  std::vector<ProcessSpec> all;
  for (const auto& combo : combos) {
    auto found = solve_process(fiber, combo, omega_p, options);
    all.insert(all.end(), found.begin(), found.end());
  }
  assign_labels(all);
  return all;
}

spectral::GroupSlowness group_slowness(const Fiber& fiber, const ProcessSpec& process) {
  return {fiber.group_slowness(process.modes.pump1, process.omega_p),
          fiber.group_slowness(process.modes.pump2, process.omega_p),
          fiber.group_slowness(process.modes.signal, process.omega_s),
          fiber.group_slowness(process.modes.idler, process.omega_i)};
}

spectral::PhasematchTerms gvm_terms(const Fiber& fiber, const ProcessSpec& process,
                                    const PumpSpec& pump) {
  return spectral::make_terms(group_slowness(fiber, process), pump.sigma(),
                              fiber.spec().length_cm * 1e4);
}

const ProcessSpec& find_process(std::span<const ProcessSpec> processes, const std::string& label) {
  for (const auto& p : processes)
    if (p.label == label) return p;
  throw UnknownProcessLabel("no process labelled '" + label + "'");
}

}  // namespace sfwm::processes
