#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "sfwm/numerics.hpp"

namespace sfwm::numerics {
namespace {

constexpr int kWeidemanTerms = 40;
constexpr double kContinuedFractionRadius = 30.0;
constexpr double kInvSqrtPi = std::numbers::inv_sqrtpi;

struct WeidemanTable {
  double scale;
  std::array<double, kWeidemanTerms> coef;  // coef[n] multiplies Z^n
};

// Coefficients from a discrete Fourier transform of exp(-t^2)(L^2 + t^2)
// sampled on t = L tan(theta/2). Computed once; a direct DFT of 160 points.
WeidemanTable make_weideman_table() {
  constexpr int n = kWeidemanTerms;
  constexpr int m = 2 * n;
  constexpr int m2 = 2 * m;
  WeidemanTable table{};
  table.scale = std::sqrt(n / std::numbers::sqrt2);
  const double l = table.scale;

  std::array<double, m2> samples{};
  samples[0] = 0.0;
  for (int k = -m + 1; k <= m - 1; ++k) {
    const double theta = k * std::numbers::pi / m;
    const double t = l * std::tan(0.5 * theta);
    samples[static_cast<std::size_t>(k + m)] = std::exp(-t * t) * (l * l + t * t);
  }
  std::array<double, m2> shifted{};
  for (int j = 0; j < m2; ++j) shifted[static_cast<std::size_t>(j)] = samples[static_cast<std::size_t>((j + m) % m2)];

  for (int idx = 1; idx <= n; ++idx) {
    double acc = 0.0;
    for (int j = 0; j < m2; ++j) {
      acc += shifted[static_cast<std::size_t>(j)] *
             std::cos(2.0 * std::numbers::pi * static_cast<double>(j) * idx / m2);
    }
    table.coef[static_cast<std::size_t>(idx - 1)] = acc / m2;
  }
  return table;
}

const WeidemanTable& weideman_table() {
  static const WeidemanTable table = make_weideman_table();
  return table;
}

Complex weideman(Complex z) {
  const auto& table = weideman_table();
  const Complex iz(-z.imag(), z.real());
  const Complex denom = table.scale - iz;
  const Complex big_z = (table.scale + iz) / denom;
  Complex p = 0.0;
  for (int n = kWeidemanTerms - 1; n >= 0; --n) p = p * big_z + table.coef[static_cast<std::size_t>(n)];
  return 2.0 * p / (denom * denom) + kInvSqrtPi / denom;
}

// Laplace continued fraction, accurate for |z| >= 30 in the upper half-plane.
Complex continued_fraction(Complex z) {
  Complex t = z;
  for (int k = 24; k >= 1; --k) t = z - (0.5 * k) / t;
  return Complex(0.0, kInvSqrtPi) / t;
}

Complex faddeeva_upper(Complex z) {
  return std::abs(z) < kContinuedFractionRadius ? weideman(z) : continued_fraction(z);
}

Complex erf_maclaurin(Complex z) {
  const Complex z2 = z * z;
  Complex power = z;  // z^(2n+1) / n! with alternating sign
  Complex sum = z;
  for (int n = 1; n < 60; ++n) {
    power *= -z2 / static_cast<double>(n);
    const Complex term = power / static_cast<double>(2 * n + 1);
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return 2.0 * kInvSqrtPi * sum;
}

}  // namespace

Complex faddeeva_w(Complex z) {
  if (z.imag() >= 0.0) return faddeeva_upper(z);
  // w(z) = 2 exp(-z^2) - w(-z); exp(-z^2) may overflow deep in the lower half-plane.
  const Complex e = std::exp(-z * z);
  return 2.0 * e - faddeeva_upper(-z);
}

Complex erf_complex(Complex z) {
  constexpr double kLimit = 30.0;
  if (!(std::abs(z.real()) <= kLimit && std::abs(z.imag()) <= kLimit)) {
    throw ArgumentOutOfRange("erf_complex: argument outside |Re z|, |Im z| <= 30");
  }
  if (std::abs(z) < 1.0) return erf_maclaurin(z);
  if (z.real() < 0.0) return -erf_complex(-z);

  const Complex minus_z2 = -z * z;
  // |erf(z)| ~ exp(Im^2 - Re^2) / (sqrt(pi) |z|) when the exponential dominates.
  if (minus_z2.real() - std::log(std::abs(z) / kInvSqrtPi) > 709.0) {
    throw ArgumentOutOfRange("erf_complex: result overflows at z = (" + std::to_string(z.real()) +
                             ", " + std::to_string(z.imag()) + ")");
  }
  const Complex iz(-z.imag(), z.real());
  const Complex w = faddeeva_upper(iz);
  if (minus_z2.real() > 700.0) return 1.0 - std::exp(minus_z2 + std::log(w));
  return 1.0 - std::exp(minus_z2) * w;
}

}  // namespace sfwm::numerics
