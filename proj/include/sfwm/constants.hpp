#pragma once

#include <numbers>

namespace sfwm {

inline constexpr double kPi = std::numbers::pi;
/// Speed of light in vacuum, m/s.
inline constexpr double kSpeedOfLight = 299792458.0;
/// Speed of light in µm/s; wavenumbers are carried in 1/µm.
inline constexpr double kSpeedOfLightUm = kSpeedOfLight * 1e6;

/// Angular frequency (rad/s) of a vacuum wavelength given in µm.
constexpr double omega_from_um(double wavelength_um) {
  return 2.0 * kPi * kSpeedOfLightUm / wavelength_um;
}
constexpr double um_from_omega(double omega) {
  return 2.0 * kPi * kSpeedOfLightUm / omega;
}
constexpr double omega_from_nm(double wavelength_nm) {
  return omega_from_um(wavelength_nm * 1e-3);
}
constexpr double nm_from_omega(double omega) { return um_from_omega(omega) * 1e3; }

}  // namespace sfwm
