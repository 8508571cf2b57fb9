#pragma once

// Shared numerical kernels: complex error function, bracketed root finding,
// adaptive quadrature, numerical differentiation and dense SVD.

#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sfwm/errors.hpp"

namespace sfwm::numerics {

using Complex = std::complex<double>;

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz), valid on the whole plane.
///
/// Upper half-plane: Weideman's rational expansion (N = 40) for |z| < 30 and
/// the Laplace continued fraction beyond. Lower half-plane via
/// w(z) = 2 exp(-z^2) - w(-z).
Complex faddeeva_w(Complex z);

/// Error function of a complex argument.
///
/// Maclaurin series for |z| < 1, otherwise erf(z) = 1 - exp(-z^2) w(iz) on
/// the right half-plane and odd reflection on the left. Throws
/// ArgumentOutOfRange outside |Re z|, |Im z| <= 30 or when the result would
/// overflow a double.
Complex erf_complex(Complex z);

struct RootOptions {
  /// Bisection stops once the bracket is narrower than rel_width * (hi - lo)
  /// of the scanned interval; one secant step then polishes the estimate.
  double rel_width = 1e-12;
  int max_iterations = 200;
};

/// Refines a single root inside [lo, hi] where f(lo) and f(hi) have opposite
/// signs. `width` is the absolute bracket width at which bisection stops.
double refine_root(const std::function<double(double)>& f, double lo, double hi,
                   double f_lo, double f_hi, double width, int max_iterations = 200);

/// All roots of f on [lo, hi] detected as sign changes among `n_samples`
/// uniformly spaced samples (endpoints included), sorted ascending.
///
/// Samples where f returns NaN are treated as gaps: brackets touching them
/// are skipped. A sample that is exactly zero is reported as a root.
std::vector<double> find_roots(const std::function<double(double)>& f, double lo, double hi,
                               int n_samples, const RootOptions& options = {});

/// Adaptive Gauss-Kronrod (7/15) quadrature of a real- or complex-valued f.
/// Throws NoConvergence if the error estimate does not reach
/// rel_tol * |result| + 1e-14 at the maximum subdivision depth.
template <class F>
auto integrate(F&& f, double lo, double hi, double rel_tol = 1e-10, unsigned max_depth = 20)
    -> decltype(f(lo)) {
  double error = 0.0;
  auto value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      std::forward<F>(f), lo, hi, max_depth, rel_tol, &error);
  if (!(error <= rel_tol * std::abs(value) + 1e-14)) {
    throw NoConvergence("integrate: error estimate " + std::to_string(error) +
                        " above tolerance on [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
  }
  return value;
}

struct Derivative {
  double value;
  /// |Richardson estimate - finer central difference|.
  double error;
};

/// Central difference with one Richardson extrapolation level; the base step
/// is rel_step * |x0| (rel_step itself when x0 == 0).
Derivative derivative(const std::function<double(double)>& f, double x0, double rel_step = 1e-6);

/// Sampled real field on a rectangular grid; rows follow row_axis.
struct RealGrid {
  Eigen::MatrixXd values;
  std::vector<double> row_axis;
  std::vector<double> col_axis;

  /// Checks axis lengths against the matrix and strict monotonicity.
  void validate() const;
};

struct SvdResult {
  /// Descending, nonnegative.
  Eigen::VectorXd singular_values;
  /// Left/right singular vectors (empty when not requested).
  Eigen::MatrixXcd u;
  Eigen::MatrixXcd v;
};

/// Dense SVD, A = U diag(s) V^H.
SvdResult svd(const Eigen::MatrixXcd& a, bool compute_vectors = true);
SvdResult svd(const RealGrid& grid, bool compute_vectors = true);

}  // namespace sfwm::numerics
