#include "sfwm/phasematch.hpp"

#include <cmath>
#include <numbers>

#include "sfwm/numerics.hpp"

namespace sfwm::spectral {
namespace {

// Longitudinal response ∫₀¹ e^{iut} dt = e^{iu/2} sin(u/2)/(u/2).
Complex longitudinal(double u) {
  const double half = 0.5 * u;
  const double sinc = std::abs(half) < 1e-4 ? 1.0 - half * half / 6.0 : std::sin(half) / half;
  return std::polar(sinc, half);
}

}  // namespace

PhasematchTerms make_terms(const GroupSlowness& slowness, double sigma, double length_um) {
  PhasematchTerms terms;
  const double pump_mean = 0.5 * (slowness.pump1 + slowness.pump2);
  terms.D = sigma * length_um * std::abs(slowness.pump1 - slowness.pump2) / std::numbers::sqrt2;
  terms.T_s = length_um * (pump_mean - slowness.signal);
  terms.T_i = length_um * (pump_mean - slowness.idler);
  terms.gamma = gamma_fit(terms.D);
  return terms;
}

double alpha(double nu_s, double nu_i, double sigma) {
  const double sum = nu_s + nu_i;
  return std::exp(-sum * sum / (2.0 * sigma * sigma));
}

Complex phi(double x, double D) {
  if (D < kDegeneracyThreshold) return longitudinal(x);
  // e^{-y²}[erf(D/2 - iy) + erf(iy)] with y = x/D, rewritten through the
  // Faddeeva function so nothing overflows for large |y|.
  const double y = x / D;
  const Complex w_minus = numerics::faddeeva_w(Complex(-y, 0.0));
  const Complex w_shift = numerics::faddeeva_w(Complex(y, 0.5 * D));
  const Complex value = 2.0 * std::exp(-y * y) - w_minus -
                        std::exp(Complex(-0.25 * D * D, D * y)) * w_shift;
  return value / std::erf(0.5 * D);
}

Complex phi_oracle(double x, double D) {
  // (1/√π) ∫ e^{-v²} g(x + D v) dv; e^{-64} makes the ±8 truncation exact in double.
  auto convolved = [D](double xx) {
    auto integrand = [xx, D](double v) { return std::exp(-v * v) * longitudinal(xx + D * v); };
    return numerics::integrate(integrand, -8.0, 8.0, 1e-12, 25);
  };
  return convolved(x) / convolved(0.0);
}

GammaFit gamma_fit_detail(double D) {
  auto magnitude = [D](double x) { return std::abs(phi(x, D)); };
  const double step = 0.02 * std::max(1.0, D);

  // |φ| falls monotonically from 1 across the central lobe; march out to the
  // first crossing of each level and refine by bisection.
  auto first_crossing = [&](double level) {
    double a = 0.0;
    double b = step;
    while (magnitude(b) > level) {
      a = b;
      b += step;
    }
    auto shifted = [&](double x) { return magnitude(x) - level; };
    return numerics::refine_root(shifted, a, b, shifted(a), shifted(b), 1e-13 * b);
  };

  GammaFit fit;
  fit.x_half = first_crossing(0.5);
  fit.gamma = fit.x_half / std::sqrt(std::numbers::ln2);
  fit.x_cut = first_crossing(0.1);

  constexpr int kSamples = 401;
  double sum_sq = 0.0;
  for (int j = 0; j < kSamples; ++j) {
    const double x = -fit.x_cut + 2.0 * fit.x_cut * j / (kSamples - 1);
    const double diff = std::exp(-x * x / (fit.gamma * fit.gamma)) - magnitude(x);
    sum_sq += diff * diff;
  }
  fit.rms_residual = std::sqrt(sum_sq / kSamples);
  return fit;
}

double gamma_fit(double D) { return gamma_fit_detail(D).gamma; }

double gvm_residual(const PhasematchTerms& terms, double sigma) {
  return 2.0 * terms.T_s * terms.T_i * sigma * sigma / (terms.gamma * terms.gamma) + 1.0;
}

}  // namespace sfwm::spectral
