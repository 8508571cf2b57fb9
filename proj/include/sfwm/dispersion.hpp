#pragma once

// Mode-resolved dispersion of a weakly guiding, step-index birefringent fiber
// supporting the LP01 and LP11 families.

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace sfwm::dispersion {

enum class Family : std::uint8_t { LP01, LP11 };
enum class Parity : std::uint8_t { None, Even, Odd };
enum class Polarization : std::uint8_t { X, Y };

/// One of the six guided LP modes. Ordering is lexicographic on
/// (family, parity, polarization).
struct ModeLabel {
  Family family = Family::LP01;
  Parity parity = Parity::None;
  Polarization polarization = Polarization::X;

  auto operator<=>(const ModeLabel&) const = default;

  /// Azimuthal order l of LP_lm.
  int azimuthal_order() const { return family == Family::LP01 ? 0 : 1; }
  bool is_valid() const {
    return family == Family::LP01 ? parity == Parity::None : parity != Parity::None;
  }
  /// "LP01x", "LP11ey", ...
  std::string name() const;
  /// Inverse of name(); throws ConfigError on anything else.
  static ModeLabel parse(std::string_view text);
};

namespace modes {
inline constexpr ModeLabel LP01x{Family::LP01, Parity::None, Polarization::X};
inline constexpr ModeLabel LP01y{Family::LP01, Parity::None, Polarization::Y};
inline constexpr ModeLabel LP11ex{Family::LP11, Parity::Even, Polarization::X};
inline constexpr ModeLabel LP11ey{Family::LP11, Parity::Even, Polarization::Y};
inline constexpr ModeLabel LP11ox{Family::LP11, Parity::Odd, Polarization::X};
inline constexpr ModeLabel LP11oy{Family::LP11, Parity::Odd, Polarization::Y};
}  // namespace modes

/// The six-mode basis in canonical order.
inline constexpr std::array<ModeLabel, 6> kSixModeBasis = {
    modes::LP01x, modes::LP01y, modes::LP11ex, modes::LP11ey, modes::LP11ox, modes::LP11oy};

/// Theoretical LP11 cutoff, first zero of J0 rounded as usually quoted.
inline constexpr double kLp11CutoffV = 2.405;

/// Geometry and birefringence of the fiber.
struct FiberSpec {
  double core_radius_um = 1.74;
  double numerical_aperture = 0.17;
  /// Index offset of x-polarized modes.
  double birefringence = 2.37e-4;
  /// Index offset of odd-parity LP11 modes.
  double parity_birefringence = 4.41e-4;
  double length_cm = 14.5;
  /// V-number at and below which LP11 modes count as not guided. Defaults to
  /// the theoretical cutoff; an effective (measured) cutoff lies above it.
  double lp11_cutoff_v = kLp11CutoffV;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

/// Refractive index as a function of vacuum wavelength in µm.
using MaterialModel = std::function<double(double)>;

/// Three-term Sellmeier index of fused silica; valid for 0.21 µm < λ < 3.7 µm,
/// WavelengthOutOfRange outside.
double material_index(double wavelength_um);

/// V = 2π r NA / λ.
double v_number(double core_radius_um, double numerical_aperture, double wavelength_um);
double v_number(const FiberSpec& fiber, double wavelength_um);

/// Normalized transverse parameters of an LP mode, u² + w² = V².
struct TransverseSolution {
  double v;
  double u;
  double w;
  /// Normalized propagation constant b = w² / V².
  double b;
};

struct DispersionSample {
  ModeLabel mode;
  double omega = 0.0;
  bool guided = false;
  /// Effective index including the birefringent offsets.
  std::optional<double> n_eff;
  /// Wavenumber, 1/µm.
  std::optional<double> k;
  /// Group slowness dk/dω, s/µm.
  std::optional<double> k_prime;
};

/// Fiber with a material model. Immutable; all queries are pure and reentrant.
class Fiber {
 public:
  explicit Fiber(FiberSpec spec, MaterialModel material = material_index,
                 bool include_waveguide = true);

  const FiberSpec& spec() const { return spec_; }

  double cladding_index(double wavelength_um) const;
  /// sqrt(n_clad² + NA²).
  double core_index(double wavelength_um) const;

  bool guided(Family family, double wavelength_um) const;
  bool guided(const ModeLabel& mode, double omega) const;

  /// Solves the LP characteristic equation; nullopt below cutoff.
  std::optional<TransverseSolution> transverse(Family family, double wavelength_um) const;

  /// Effective index of the scalar mode before birefringent offsets.
  std::optional<double> scalar_index(Family family, double wavelength_um) const;
  std::optional<double> effective_index(const ModeLabel& mode, double omega) const;
  /// ω n_eff / c in 1/µm; nullopt when the mode is not guided.
  std::optional<double> wavenumber(const ModeLabel& mode, double omega) const;

  /// Full sample including k'. k' is left empty when the mode is guided at ω
  /// but not across the finite-difference stencil.
  DispersionSample solve_mode(const ModeLabel& mode, double omega) const;
  /// dk/dω in s/µm; throws ModeNotGuided.
  double group_slowness(const ModeLabel& mode, double omega) const;

 private:
  FiberSpec spec_;
  MaterialModel material_;
  bool include_waveguide_;
};

}  // namespace sfwm::dispersion
