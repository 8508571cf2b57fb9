#pragma once

// Enumeration, selection and phasematching of intermodal SFWM processes.

#include <complex>
#include <compare>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sfwm/dispersion.hpp"
#include "sfwm/phasematch.hpp"

namespace sfwm::processes {

using dispersion::Fiber;
using dispersion::ModeLabel;

/// Transverse modes of (pump 1, pump 2, signal, idler).
struct ModeCombo {
  ModeLabel pump1;
  ModeLabel pump2;
  ModeLabel signal;
  ModeLabel idler;

  auto operator<=>(const ModeCombo&) const = default;
  /// "LP01x+LP11ex->LP01y+LP11ey".
  std::string describe() const;
};

/// A phasematched process. The signal is the red-side photon (λ_s > λ_p).
struct ProcessSpec {
  ModeCombo modes;
  double omega_p = 0.0;
  double omega_s = 0.0;
  double omega_i = 0.0;
  std::string label;

  double lambda_p_nm() const;
  double lambda_s_nm() const;
  double lambda_i_nm() const;
};

struct PumpSpec {
  double center_wavelength_um = 0.690;
  /// FWHM of the spectral intensity, nm.
  double bandwidth_nm = 0.52;
  /// Complex amplitude per pump mode, unit total power.
  std::map<ModeLabel, std::complex<double>> amplitudes;

  double omega() const;
  /// Gaussian amplitude width σ (rad/s) of α: (2πc/λ²)·Δλ/(2√ln2).
  double sigma() const;
  std::complex<double> amplitude(const ModeLabel& mode) const;

  /// Rescales amplitudes to unit total power; throws ConfigError if all are zero.
  void normalize();
  /// Throws ConfigError on a nonpositive bandwidth or a y-polarized pump amplitude.
  void validate() const;
};

/// σ in rad/s for a pump of intensity FWHM bandwidth_nm centered at wavelength_um.
double sigma_from_bandwidth(double wavelength_um, double bandwidth_nm);

/// All ordered 4-tuples over `modes` (M⁴ of them).
std::vector<ModeCombo> enumerate_all(std::span<const ModeLabel> modes);

/// True when the azimuthal overlap of the four waves can be nonzero: the
/// numbers of even-parity and of odd-parity LP11 waves are both even.
bool conserves_parity_and_oam(const ModeCombo& combo);

/// Cross-polarized xx→yy processes that conserve parity and OAM, with
/// pump-order duplicates collapsed (pump1 <= pump2).
std::vector<ModeCombo> select_viable(std::span<const ModeCombo> combos);

/// The viable set of the six-mode basis.
std::vector<ModeCombo> viable_six_mode_processes();

/// Δk = k_p1(ω_p) + k_p2(ω_p) − k_s(ω_s) − k_i(2ω_p − ω_s) in 1/µm.
/// Throws ModeNotGuided when any wave is below cutoff.
double phasemismatch(const Fiber& fiber, const ModeCombo& combo, double omega_p, double omega_s);

struct ScanOptions {
  int samples = 2000;
  double rel_width = 1e-12;
};

/// Red-side phasematching roots of one combination. Empty when nothing
/// phasematches or the pumps are not guided.
std::vector<ProcessSpec> solve_process(const Fiber& fiber, const ModeCombo& combo, double omega_p,
                                       const ScanOptions& options = {});

/// Solves every combination and labels the results a, b, c, ... by
/// descending idler frequency (ties broken by mode combination).
std::vector<ProcessSpec> solve_processes(const Fiber& fiber, std::span<const ModeCombo> combos,
                                         double omega_p, const ScanOptions& options = {});

void assign_labels(std::vector<ProcessSpec>& processes);

/// k' of the four waves: pumps at ω_p, daughters at their centers.
spectral::GroupSlowness group_slowness(const Fiber& fiber, const ProcessSpec& process);

/// D, T_s, T_i and Γ at the fiber length and pump bandwidth.
spectral::PhasematchTerms gvm_terms(const Fiber& fiber, const ProcessSpec& process,
                                    const PumpSpec& pump);

/// Finds a process by label; throws UnknownProcessLabel.
const ProcessSpec& find_process(std::span<const ProcessSpec> processes, const std::string& label);

}  // namespace sfwm::processes
