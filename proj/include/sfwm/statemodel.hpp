#pragma once

// Multi-process two-photon state: transverse mode overlaps, process
// amplitudes, Schmidt-form reduction and spectral post-selection.

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "sfwm/dispersion.hpp"
#include "sfwm/jsa.hpp"
#include "sfwm/processes.hpp"

namespace sfwm::statemodel {

using Complex = std::complex<double>;
using dispersion::Fiber;
using dispersion::ModeLabel;
using processes::ProcessSpec;
using processes::PumpSpec;

/// Polar quadrature grid. The radial range is split at the core boundary so
/// each half carries a smooth integrand; midpoint rule in r, uniform in φ.
struct PolarGrid {
  int radial_points = 256;
  int azimuthal_points = 128;
  double core_radius_um = 1.74;
  /// Radial extent in core radii.
  double extent = 4.0;

  std::vector<double> radii() const;
  /// Area element r·dr·dφ for each radial node.
  std::vector<double> weights() const;
  std::vector<double> angles() const;
  bool operator==(const PolarGrid&) const = default;
};

struct ModeField {
  ModeLabel mode;
  double wavelength_um = 0.0;
  double u = 0.0;
  double w = 0.0;
  /// Multiplies the unit-amplitude profile so that ∫|E|² dA = 1 on the grid.
  double norm = 1.0;
  PolarGrid grid;
  /// E(r_j, φ_k); rows radial, columns azimuthal.
  Eigen::MatrixXd values;

  /// Analytic field at (r, φ), same normalization as values.
  double operator()(double r_um, double phi) const;
};

/// Weakly guiding LP field: J_l(ur/a)/J_l(u) in the core, K_l(wr/a)/K_l(w)
/// outside, times cos(lφ) (even) or sin(lφ) (odd). Throws ModeNotGuided.
ModeField mode_field(const Fiber& fiber, const ModeLabel& mode, double wavelength_um,
                     const PolarGrid& grid);
ModeField mode_field(const Fiber& fiber, const ModeLabel& mode, double wavelength_um);

/// ∫ E1 E2 E3* E4* dA (1/µm²). Throws GridMismatch.
double overlap_integral(const ModeField& e1, const ModeField& e2, const ModeField& e3,
                        const ModeField& e4);
/// Overlap of a process: pumps at λ_p, signal and idler at their centers.
double overlap_integral(const Fiber& fiber, const ProcessSpec& process);

/// ∫ E_a E_b* dA; zero between orthogonal polarizations. Throws GridMismatch.
double inner_product(const ModeField& a, const ModeField& b);

/// η ∝ A_pump1 · A_pump2 · O, unnormalized.
Complex process_amplitude(const ProcessSpec& process, const PumpSpec& pump, const Fiber& fiber);
Complex process_amplitude(const ProcessSpec& process, const PumpSpec& pump, double overlap);

struct StateTerm {
  Complex eta;
  ProcessSpec process;
  spectral::JsaGrid jsa;
  spectral::SchmidtResult schmidt;

  double weight() const { return std::norm(eta); }
};

struct TwoPhotonState {
  std::vector<StateTerm> terms;
  bool normalized = false;
  /// Post-selection probability relative to the parent state (1 otherwise).
  double survival_probability = 1.0;
};

struct StateOptions {
  spectral::GridOptions grid;
  int threads = 1;
};

/// Builds the JSA and η of every process with a nonzero amplitude and
/// normalizes Σ|η|² = 1. Throws EmptySelection when nothing remains.
TwoPhotonState assemble_state(const Fiber& fiber, const PumpSpec& pump,
                              std::span<const ProcessSpec> processes,
                              const StateOptions& options = {});

/// Normalizes a hand-built list of terms; Schmidt results are recomputed.
TwoPhotonState make_state(std::vector<StateTerm> terms);

struct SchmidtCriteria {
  double min_purity = 0.7;
  double max_overlap = 1e-3;
};

/// Leading Schmidt packets of one term on absolute frequency axes (rad/s),
/// normalized to ∫|S|² dω = 1.
struct SchmidtPair {
  std::string label;
  ModeLabel signal_mode;
  ModeLabel idler_mode;
  std::vector<double> omega_s;
  std::vector<double> omega_i;
  Eigen::VectorXcd signal_packet;
  Eigen::VectorXcd idler_packet;
  double weight = 0.0;
  double purity = 0.0;
};

struct NotSchmidt {
  std::string reason;
  /// (label, K⁻¹) for every term.
  std::vector<std::pair<std::string, double>> purities;
  /// Labels of the offending pair when packets overlap.
  std::optional<std::pair<std::string, std::string>> overlapping;
  double overlap = 0.0;
};

/// ∫|S_a||S_b| dω of two packets, interpolating b onto a's axis.
double packet_overlap(std::span<const double> omega_a, const Eigen::VectorXcd& a,
                      std::span<const double> omega_b, const Eigen::VectorXcd& b);

/// Reduces the state to discrete Schmidt pairs when every term is nearly
/// factorable and packets sharing a transverse/polarization mode are
/// spectrally disjoint. Packets in different modes are orthogonal already.
std::variant<std::vector<SchmidtPair>, NotSchmidt> schmidt_form(const TwoPhotonState& state,
                                                                const SchmidtCriteria& criteria = {});

struct WavelengthWindow {
  double lo_nm = 0.0;
  double hi_nm = 0.0;

  bool contains(double nm) const { return nm >= lo_nm && nm <= hi_nm; }
  void validate() const;
};

/// Applies band-pass filters to both photons, drops terms whose filtered
/// weight falls below 1e-6 and renormalizes. Throws EmptySelection.
TwoPhotonState postselect(const TwoPhotonState& state, const WavelengthWindow& signal,
                          const WavelengthWindow& idler);

}  // namespace sfwm::statemodel
