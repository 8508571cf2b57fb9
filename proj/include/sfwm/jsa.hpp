#pragma once

// Joint spectral amplitudes, Schmidt decomposition and the (Δλ_p, L)
// factorability scan.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sfwm/numerics.hpp"
#include "sfwm/phasematch.hpp"
#include "sfwm/processes.hpp"

namespace sfwm::spectral {

using numerics::RealGrid;
using processes::Fiber;
using processes::ProcessSpec;
using processes::PumpSpec;

struct GridOptions {
  /// Points per axis; a power of two in [64, 512].
  int size = 128;
  /// Half-extent of each axis in units of the estimated marginal width.
  double span = 4.0;

  void validate() const;
};

/// Sampled f(ν_s, ν_i) = α·φ. Rows follow ν_s, columns ν_i; detunings in rad/s
/// from the process centers. max |amplitude| = 1.
struct JsaGrid {
  ProcessSpec process;
  PhasematchTerms terms;
  double sigma = 0.0;
  std::vector<double> nu_s;
  std::vector<double> nu_i;
  Eigen::MatrixXcd amplitude;
  Eigen::MatrixXd pump_part;
  Eigen::MatrixXcd pm_part;

  double grid_step_s() const { return nu_s.size() > 1 ? nu_s[1] - nu_s[0] : 1.0; }
  double grid_step_i() const { return nu_i.size() > 1 ? nu_i[1] - nu_i[0] : 1.0; }
};

struct SchmidtResult {
  /// Descending, Σλ² = 1.
  std::vector<double> singular_values;
  double K = 1.0;
  double purity = 1.0;
  /// Leading Schmidt functions sampled on the grid axes, unit 2-norm.
  std::vector<Eigen::VectorXcd> signal_modes;
  std::vector<Eigen::VectorXcd> idler_modes;
};

/// Marginal half-width estimate per axis: max(σ, Γ/|T|), capped at 50σ.
double marginal_width(double sigma, double gamma, double t);

/// Samples α·φ for the given terms.
JsaGrid build_jsa(const ProcessSpec& process, const PhasematchTerms& terms, double sigma,
                  const GridOptions& options = {});
/// Evaluates the terms on the fiber first.
JsaGrid build_jsa(const ProcessSpec& process, const PumpSpec& pump, const Fiber& fiber,
                  const GridOptions& options = {});

/// Samples arbitrary pump/phasematching parts on explicit axes.
JsaGrid sample_jsa(const ProcessSpec& process, std::vector<double> nu_s, std::vector<double> nu_i,
                   const std::function<double(double, double)>& pump_part,
                   const std::function<Complex(double, double)>& pm_part);

SchmidtResult schmidt(const Eigen::MatrixXcd& amplitude, int max_modes = 8);
SchmidtResult schmidt(const JsaGrid& grid, int max_modes = 8);
/// Singular values only; cheaper when the mode functions are not needed.
double schmidt_number(const Eigen::MatrixXcd& amplitude);

double gvm_residual(const ProcessSpec& process, const PumpSpec& pump, const Fiber& fiber);

/// Purity band codes: 0 below 0.7, 1 for ≥ 0.7, 2 for ≥ 0.9, 3 for ≥ 0.98;
/// -1 for a missing value.
int purity_band(double purity);

struct MapOptions {
  double length_min_cm = 2.0;
  double length_max_cm = 40.0;
  double bandwidth_min_nm = 0.1;
  double bandwidth_max_nm = 2.0;
  /// Points along bandwidth (rows) and length (columns), each in [1, 128].
  int bandwidth_points = 32;
  int length_points = 32;
  GridOptions grid;
  int threads = 1;

  void validate() const;
};

struct FactorabilityMap {
  std::vector<std::string> labels;
  /// K⁻¹ per process; rows = bandwidth (nm), columns = length (cm).
  std::vector<RealGrid> purity;
  RealGrid min_purity;
  Eigen::MatrixXi bands;
};

/// Axis of n points over [lo, hi]; a single point sits at the midpoint.
std::vector<double> scan_axis(double lo, double hi, int n);

/// Scans (Δλ_p, L) for the given processes. k' is taken from the fiber once
/// per process. Failed points become NaN / band -1.
FactorabilityMap factorability_map(const Fiber& fiber, std::span<const ProcessSpec> processes,
                                   const PumpSpec& pump, const MapOptions& options);
/// Same, from precomputed group slownesses.
FactorabilityMap factorability_map(std::span<const ProcessSpec> processes,
                                   std::span<const GroupSlowness> slowness,
                                   double pump_wavelength_um, const MapOptions& options);

}  // namespace sfwm::spectral
