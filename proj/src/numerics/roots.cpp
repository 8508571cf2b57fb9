#include <algorithm>
#include <cmath>
#include <string>

#include "sfwm/numerics.hpp"

namespace sfwm::numerics {

double refine_root(const std::function<double(double)>& f, double lo, double hi, double f_lo,
                   double f_hi, double width, int max_iterations) {
  double a = lo;
  double b = hi;
  double fa = f_lo;
  double fb = f_hi;
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (std::signbit(fa) == std::signbit(fb)) {
    throw NoConvergence("refine_root: interval does not bracket a sign change");
  }

  int iteration = 0;
  while (b - a > width) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;  // bracket exhausted at double resolution
    if (++iteration > max_iterations) {
      throw NoConvergence("refine_root: bisection did not converge in " +
                          std::to_string(max_iterations) + " iterations");
    }
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if (!std::isfinite(fm)) throw NoConvergence("refine_root: non-finite function value");
    if (std::signbit(fm) == std::signbit(fa)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
      fb = fm;
    }
  }

  // Secant polish, kept only when it stays inside the final bracket.
  const double secant = b - fb * (b - a) / (fb - fa);
  if (std::isfinite(secant) && secant >= a && secant <= b) return secant;
  return 0.5 * (a + b);
}

std::vector<double> find_roots(const std::function<double(double)>& f, double lo, double hi,
                               int n_samples, const RootOptions& options) {
  if (!(lo < hi)) throw ArgumentOutOfRange("find_roots: requires lo < hi");
  if (n_samples < 2) throw ArgumentOutOfRange("find_roots: need at least two samples");

  const double step = (hi - lo) / (n_samples - 1);
  const double width = options.rel_width * (hi - lo);
  std::vector<double> xs(static_cast<std::size_t>(n_samples));
  std::vector<double> fs(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) {
    xs[j] = j + 1 == xs.size() ? hi : lo + static_cast<double>(j) * step;
    fs[j] = f(xs[j]);
  }

  std::vector<double> roots;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    if (fs[j] == 0.0) {
      roots.push_back(xs[j]);
      continue;
    }
    if (j + 1 == xs.size()) break;
    const double f0 = fs[j];
    const double f1 = fs[j + 1];
    if (std::isnan(f0) || std::isnan(f1) || f1 == 0.0) continue;
    if (std::signbit(f0) != std::signbit(f1)) {
      roots.push_back(refine_root(f, xs[j], xs[j + 1], f0, f1, width, options.max_iterations));
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace sfwm::numerics
