#include <cmath>

#include "sfwm/numerics.hpp"

namespace sfwm::numerics {

Derivative derivative(const std::function<double(double)>& f, double x0, double rel_step) {
  const double h = x0 != 0.0 ? rel_step * std::abs(x0) : rel_step;
  const double coarse = (f(x0 + h) - f(x0 - h)) / (2.0 * h);
  const double fine = (f(x0 + 0.5 * h) - f(x0 - 0.5 * h)) / h;
  const double extrapolated = (4.0 * fine - coarse) / 3.0;
  return {extrapolated, std::abs(extrapolated - fine)};
}

}  // namespace sfwm::numerics
