#pragma once

// Pump envelope and phasematching function of a single SFWM process, to first
// order in the signal/idler detunings.

#include <complex>

namespace sfwm::spectral {

using Complex = std::complex<double>;

/// Below this non-degeneracy the closed form loses accuracy and the sinc limit
/// is used instead.
inline constexpr double kDegeneracyThreshold = 1e-3;

/// First-order group slownesses (s/µm) of the four waves of one process.
struct GroupSlowness {
  double pump1 = 0.0;
  double pump2 = 0.0;
  double signal = 0.0;
  double idler = 0.0;
};

struct PhasematchTerms {
  /// Non-degeneracy σL|k1' - k2'|/√2.
  double D = 0.0;
  /// L[(k1' + k2')/2 - k_s'], seconds.
  double T_s = 0.0;
  double T_i = 0.0;
  /// Width of the Gaussian that stands in for |φ|, see gamma_fit.
  double gamma = 0.0;
};

/// Builds D, T_s, T_i and Γ for pump amplitude width sigma (rad/s) and fiber
/// length in µm.
PhasematchTerms make_terms(const GroupSlowness& slowness, double sigma, double length_um);

/// Pump envelope exp(-(ν_s + ν_i)² / 2σ²).
double alpha(double nu_s, double nu_i, double sigma);

/// Phasematching function of the adimensional mismatch x, normalized to
/// φ(0) = 1. Reduces to e^{ix/2} sin(x/2)/(x/2) as D → 0.
Complex phi(double x, double D);

/// Brute-force reference for phi: Gaussian pump-convolution integral of the
/// longitudinal e^{iu/2} sinc(u/2) response, by adaptive quadrature.
Complex phi_oracle(double x, double D);

struct GammaFit {
  double gamma = 0.0;
  /// Half-maximum point of |φ|.
  double x_half = 0.0;
  /// First point where |φ| falls to 0.1; bounds the central lobe.
  double x_cut = 0.0;
  /// RMS of exp(-x²/Γ²) - |φ(x)| over |x| <= x_cut.
  double rms_residual = 0.0;
};

/// Gaussian width Γ for which exp(-x²/Γ²) and |φ(x, D)| share their half
/// maximum; Γ = 4.553 at degeneracy and grows with D.
GammaFit gamma_fit_detail(double D);
double gamma_fit(double D);

/// 2 T_s T_i σ² / Γ² + 1; zero at group-velocity matching.
double gvm_residual(const PhasematchTerms& terms, double sigma);

}  // namespace sfwm::spectral
