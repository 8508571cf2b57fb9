#include "sfwm/dispersion.hpp"

#include <cmath>
#include <string>

#include <boost/math/special_functions/bessel.hpp>

#include "sfwm/constants.hpp"
#include "sfwm/errors.hpp"
#include "sfwm/numerics.hpp"

namespace sfwm::dispersion {
namespace {

constexpr double kFirstZeroJ0 = 2.404825557695773;
constexpr double kFirstZeroJ1 = 3.8317059702075125;

using boost::math::cyl_bessel_j;
using boost::math::cyl_bessel_k;

// Characteristic equations multiplied through by J_l(u) K_l(w) so that they
// stay finite on the whole bracket.
double lp11_residual(double u, double v) {
  const double w = std::sqrt(std::max(v * v - u * u, 0.0));
  return u * cyl_bessel_j(0, u) * cyl_bessel_k(1, w) + w * cyl_bessel_k(0, w) * cyl_bessel_j(1, u);
}

}  // namespace

std::string ModeLabel::name() const {
  std::string out = family == Family::LP01 ? "LP01" : "LP11";
  if (parity == Parity::Even) out += 'e';
  if (parity == Parity::Odd) out += 'o';
  out += polarization == Polarization::X ? 'x' : 'y';
  return out;
}

ModeLabel ModeLabel::parse(std::string_view text) {
  for (const auto& mode : kSixModeBasis) {
    if (mode.name() == text) return mode;
  }
  throw ConfigError("unknown mode label '" + std::string(text) + "'");
}

void FiberSpec::validate() const {
  if (!(core_radius_um > 0.0)) throw ConfigError("fiber: core radius must be positive");
  if (!(numerical_aperture > 0.0 && numerical_aperture < 1.0))
    throw ConfigError("fiber: numerical aperture must lie in (0, 1)");
  if (!(length_cm > 0.0)) throw ConfigError("fiber: length must be positive");
  if (!(birefringence >= 0.0) || !(parity_birefringence >= 0.0))
    throw ConfigError("fiber: birefringence offsets must be nonnegative");
  if (!(lp11_cutoff_v >= kFirstZeroJ0 - 1e-3)) throw ConfigError("fiber: LP11 cutoff below 2.405");
}

double material_index(double wavelength_um) {
  if (!(wavelength_um > 0.21 && wavelength_um < 3.7)) {
    throw WavelengthOutOfRange("material_index: wavelength " + std::to_string(wavelength_um) +
                               " um outside the 0.21-3.7 um Sellmeier window");
  }
  // Malitson (1965) fused silica.
  const double l2 = wavelength_um * wavelength_um;
  const double n2 = 1.0 + 0.6961663 * l2 / (l2 - 0.0684043 * 0.0684043) +
                    0.4079426 * l2 / (l2 - 0.1162414 * 0.1162414) +
                    0.8974794 * l2 / (l2 - 9.896161 * 9.896161);
  return std::sqrt(n2);
}

double v_number(double core_radius_um, double numerical_aperture, double wavelength_um) {
  return 2.0 * kPi * core_radius_um * numerical_aperture / wavelength_um;
}

double v_number(const FiberSpec& fiber, double wavelength_um) {
  return v_number(fiber.core_radius_um, fiber.numerical_aperture, wavelength_um);
}

Fiber::Fiber(FiberSpec spec, MaterialModel material, bool include_waveguide)
    : spec_(spec), material_(std::move(material)), include_waveguide_(include_waveguide) {
  spec_.validate();
}

double Fiber::cladding_index(double wavelength_um) const { return material_(wavelength_um); }

double Fiber::core_index(double wavelength_um) const {
  const double n = cladding_index(wavelength_um);
  return std::sqrt(n * n + spec_.numerical_aperture * spec_.numerical_aperture);
}

bool Fiber::guided(Family family, double wavelength_um) const {
  if (!include_waveguide_) return true;
  const double v = v_number(spec_, wavelength_um);
  return family == Family::LP01 ? v > 0.0 : v > spec_.lp11_cutoff_v;
}

bool Fiber::guided(const ModeLabel& mode, double omega) const {
  return guided(mode.family, um_from_omega(omega));
}

std::optional<TransverseSolution> Fiber::transverse(Family family, double wavelength_um) const {
  if (!guided(family, wavelength_um)) return std::nullopt;
  const double v = v_number(spec_, wavelength_um);

  if (family == Family::LP01) {
    // Solved in ln w: at small V the root sits at w ~ exp(-2/V²), far below
    // what u = sqrt(V² - w²) can resolve.
    auto residual = [v](double t) {
      const double w = std::exp(t);
      const double u = std::sqrt(std::max(v * v - w * w, 0.0));
      return u * cyl_bessel_j(1, u) * cyl_bessel_k(0, w) - w * cyl_bessel_k(1, w) * cyl_bessel_j(0, u);
    };
    // u stays below the first zero of J0, where the fundamental root lives.
    const double w_min = v > kFirstZeroJ0 ? std::sqrt(v * v - kFirstZeroJ0 * kFirstZeroJ0) : 1e-300;
    const double lo = std::log(std::max(w_min, 1e-300));
    const double hi = std::log(v);
    const double f_lo = residual(lo);
    const double f_hi = residual(hi);
    double w = 0.0;
    // Past the low end the mode is bound by less than 1e-600 in b.
    if (std::signbit(f_lo) != std::signbit(f_hi))
      w = std::exp(numerics::refine_root(residual, lo, hi, f_lo, f_hi, 1e-15 * (hi - lo)));
    const double u = std::sqrt(std::max(v * v - w * w, 0.0));
    return TransverseSolution{v, u, w, (w * w) / (v * v)};
  }

  const double lo = kFirstZeroJ0;
  const double hi = std::min(v * (1.0 - 1e-15), kFirstZeroJ1);
  if (!(hi > lo)) return std::nullopt;
  auto residual = [v](double u) { return lp11_residual(u, v); };
  const double u = numerics::refine_root(residual, lo, hi, residual(lo), residual(hi), 1e-15 * (hi - lo));
  const double w = std::sqrt(std::max(v * v - u * u, 0.0));
  return TransverseSolution{v, u, w, (w * w) / (v * v)};
}

std::optional<double> Fiber::scalar_index(Family family, double wavelength_um) const {
  const double n_clad = cladding_index(wavelength_um);
  if (!include_waveguide_) return n_clad;
  const auto solution = transverse(family, wavelength_um);
  if (!solution) return std::nullopt;
  const double na = spec_.numerical_aperture;
  return std::sqrt(n_clad * n_clad + solution->b * na * na);
}

std::optional<double> Fiber::effective_index(const ModeLabel& mode, double omega) const {
  auto n = scalar_index(mode.family, um_from_omega(omega));
  if (!n) return std::nullopt;
  if (mode.polarization == Polarization::X) *n += spec_.birefringence;
  if (mode.parity == Parity::Odd) *n += spec_.parity_birefringence;
  return n;
}

std::optional<double> Fiber::wavenumber(const ModeLabel& mode, double omega) const {
  const auto n = effective_index(mode, omega);
  if (!n) return std::nullopt;
  return omega * *n / kSpeedOfLightUm;
}

double Fiber::group_slowness(const ModeLabel& mode, double omega) const {
  auto k_of = [&](double w) {
    const auto k = wavenumber(mode, w);
    if (!k) {
      throw ModeNotGuided(mode.name() + " not guided at " + std::to_string(nm_from_omega(w)) +
                          " nm");
    }
    return *k;
  };
  return numerics::derivative(k_of, omega).value;
}

DispersionSample Fiber::solve_mode(const ModeLabel& mode, double omega) const {
  DispersionSample sample;
  sample.mode = mode;
  sample.omega = omega;
  sample.n_eff = effective_index(mode, omega);
  sample.guided = sample.n_eff.has_value();
  if (!sample.guided) return sample;
  sample.k = omega * *sample.n_eff / kSpeedOfLightUm;
  try {
    sample.k_prime = group_slowness(mode, omega);
  } catch (const ModeNotGuided&) {
    // Guided at ω but the stencil straddles the cutoff.
  }
  return sample;
}

}  // namespace sfwm::dispersion
