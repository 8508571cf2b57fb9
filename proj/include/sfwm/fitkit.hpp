#pragma once

// Genetic-algorithm recovery of {r, NA, Δ, Δ_p} from observed SFWM peaks.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sfwm/dispersion.hpp"
#include "sfwm/errors.hpp"
#include "sfwm/processes.hpp"

namespace sfwm::fitkit {

using dispersion::FiberSpec;
using dispersion::ModeLabel;
using processes::ModeCombo;

enum class Side { Signal, Idler };

std::string side_name(Side side);
Side parse_side(const std::string& text);

struct PeakObservation {
  std::string pair_label;
  Side side = Side::Signal;
  double wavelength_nm = 0.0;
  ModeLabel mode;
};

struct ObservedPair {
  std::string label;
  PeakObservation signal;
  PeakObservation idler;

  double omega_s() const;
  double omega_i() const;
};

/// Idler wavelength (nm) that energy conservation assigns to a signal peak.
double conjugate_wavelength_nm(double pump_wavelength_um, double wavelength_nm);

/// Groups peaks by pair label, ordered by label. Each label needs exactly one
/// signal and one idler peak whose wavelengths conserve energy within 0.5 nm.
/// Throws ConfigError naming the offending label.
std::vector<ObservedPair> pair_observations(std::span<const PeakObservation> peaks,
                                            double pump_wavelength_um);

/// The four fitted parameters.
struct FiberCore {
  double core_radius_um = 0.0;
  double numerical_aperture = 0.0;
  double birefringence = 0.0;
  double parity_birefringence = 0.0;

  std::array<double, 4> as_array() const;
  static FiberCore from_array(const std::array<double, 4>& x);
  static FiberCore from_spec(const FiberSpec& spec);
  /// `base` with the four parameters replaced.
  FiberSpec apply(FiberSpec base) const;
};

/// Returned whenever a candidate leaves some observed wave unguided.
inline constexpr double kUnguidedPenalty = 1e3;

/// Σ |Δk| (1/µm) over pairs at the observed signal frequencies, the idler
/// fixed by energy conservation. combos[j] belongs to pairs[j].
double fitness(const FiberCore& candidate, std::span<const ObservedPair> pairs,
               std::span<const ModeCombo> combos, double pump_wavelength_um,
               const FiberSpec& base = {});

/// Maps each pair to the viable combination with the observed daughter modes
/// whose phasematched wavelengths on `fiber` lie nearest. Throws NoAssignment
/// or AmbiguousAssignment.
std::map<std::string, ModeCombo> assign_processes(std::span<const ObservedPair> pairs,
                                                  std::span<const ModeCombo> candidates,
                                                  const dispersion::Fiber& fiber,
                                                  double pump_wavelength_um);

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;
};

struct FitConfig {
  /// r (µm), NA, Δ, Δ_p.
  std::array<Bounds, 4> bounds = {Bounds{1.0, 3.0}, Bounds{0.10, 0.25}, Bounds{0.5e-4, 5e-4},
                                  Bounds{0.5e-4, 8e-4}};
  int population = 64;
  int generations = 500;
  int tournament = 4;
  double blend_alpha = 0.5;
  /// Mutation step as a fraction of each bound range, decaying per generation.
  double mutation_scale = 0.05;
  double mutation_decay = 0.99;
  /// Per-gene mutation probability.
  double mutation_rate = 0.25;
  int elitism = 2;
  int plateau = 50;
  double target_fitness = 1e-6;
  std::uint64_t seed = 1;
  int threads = 1;

  void validate() const;
};

struct FitResult {
  FiberCore best;
  double fitness = 0.0;
  /// Best fitness after each generation, starting with the initial population.
  std::vector<double> history;
  bool converged = false;
  int generations = 0;
};

class NotConverged : public Error {
 public:
  explicit NotConverged(FitResult result);
  const FitResult& result() const { return result_; }

 private:
  FitResult result_;
};

/// Real-coded GA: tournament selection, blend crossover, decaying Gaussian
/// mutation clamped to the bounds, elitism. Deterministic for a given seed
/// whatever the thread count. Throws NotConverged carrying the best result.
FitResult ga_fit(std::span<const ObservedPair> pairs, std::span<const ModeCombo> combos,
                 double pump_wavelength_um, const FitConfig& config, const FiberSpec& base = {});

/// Peaks of the given processes, pair labels A, B, ... in process order.
std::vector<PeakObservation> synthesize_observations(std::span<const processes::ProcessSpec> processes);

/// Columns pair_label, side, wavelength_nm, mode (header required).
std::vector<PeakObservation> read_observations_csv(const std::filesystem::path& path);
/// Array of objects with the same keys.
std::vector<PeakObservation> read_observations_json(const std::filesystem::path& path);
/// Dispatches on the extension (.csv or .json).
std::vector<PeakObservation> read_observations(const std::filesystem::path& path);

/// Splits one RFC 4180 record; quoted fields may hold commas and "" escapes.
std::vector<std::string> split_csv_record(const std::string& line);

}  // namespace sfwm::fitkit
