#include "sfwm/jsa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sfwm/errors.hpp"
#include "sfwm/parallel.hpp"

namespace sfwm::spectral {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> symmetric_axis(double half_extent, int n) {
  std::vector<double> axis(n);
  for (int j = 0; j < n; ++j) axis[j] = -half_extent + 2.0 * half_extent * j / (n - 1);
  return axis;
}

void normalize_peak(JsaGrid& grid) {
  const double peak = grid.amplitude.cwiseAbs().maxCoeff();
  if (!(peak > 0.0) || !std::isfinite(peak)) throw NoConvergence("build_jsa: amplitude vanishes on the grid");
  grid.amplitude /= peak;
  grid.pm_part /= peak;
}

}  // namespace

void GridOptions::validate() const {
  if (size < 64 || size > 512 || (size & (size - 1)) != 0)
    throw ArgumentOutOfRange("grid size must be a power of two in [64, 512], got " + std::to_string(size));
  if (!(span > 0.0) || !std::isfinite(span)) throw ArgumentOutOfRange("grid span must be positive");
}

double marginal_width(double sigma, double gamma, double t) {
  // A vanishing T means φ does not constrain this axis; the pump does.
  const double t_floor = gamma / (50.0 * sigma);
  return std::max(sigma, gamma / std::max(std::abs(t), t_floor));
}

JsaGrid build_jsa(const ProcessSpec& process, const PhasematchTerms& terms, double sigma,
                  const GridOptions& options) {
  options.validate();
  if (!(sigma > 0.0)) throw ArgumentOutOfRange("build_jsa: sigma must be positive");
  const int n = options.size;

  JsaGrid grid;
  grid.process = process;
  grid.terms = terms;
  grid.sigma = sigma;
  grid.nu_s = symmetric_axis(options.span * marginal_width(sigma, terms.gamma, terms.T_s), n);
  grid.nu_i = symmetric_axis(options.span * marginal_width(sigma, terms.gamma, terms.T_i), n);
  grid.pump_part.resize(n, n);
  grid.pm_part.resize(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      grid.pump_part(r, c) = alpha(grid.nu_s[r], grid.nu_i[c], sigma);
      grid.pm_part(r, c) = phi(terms.T_s * grid.nu_s[r] + terms.T_i * grid.nu_i[c], terms.D);
    }
  }
  grid.amplitude = grid.pump_part.cast<Complex>().cwiseProduct(grid.pm_part);
  normalize_peak(grid);
  return grid;
}

JsaGrid build_jsa(const ProcessSpec& process, const PumpSpec& pump, const Fiber& fiber,
                  const GridOptions& options) {
  return build_jsa(process, processes::gvm_terms(fiber, process, pump), pump.sigma(), options);
}

JsaGrid sample_jsa(const ProcessSpec& process, std::vector<double> nu_s, std::vector<double> nu_i,
                   const std::function<double(double, double)>& pump_part,
                   const std::function<Complex(double, double)>& pm_part) {
  if (nu_s.empty() || nu_i.empty()) throw ArgumentOutOfRange("sample_jsa: empty axis");
  JsaGrid grid;
  grid.process = process;
  grid.nu_s = std::move(nu_s);
  grid.nu_i = std::move(nu_i);
  const auto rows = static_cast<Eigen::Index>(grid.nu_s.size());
  const auto cols = static_cast<Eigen::Index>(grid.nu_i.size());
  grid.pump_part.resize(rows, cols);
  grid.pm_part.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      grid.pump_part(r, c) = pump_part(grid.nu_s[r], grid.nu_i[c]);
      grid.pm_part(r, c) = pm_part(grid.nu_s[r], grid.nu_i[c]);
    }
  }
  grid.amplitude = grid.pump_part.cast<Complex>().cwiseProduct(grid.pm_part);
  normalize_peak(grid);
  return grid;
}

SchmidtResult schmidt(const Eigen::MatrixXcd& amplitude, int max_modes) {
  // On a uniform grid the quadrature weights are a common factor and drop
  // out once the singular spectrum is normalized.
  const auto decomposition = numerics::svd(amplitude, true);
  const Eigen::VectorXd& s = decomposition.singular_values;
  const double norm = s.norm();
  if (!(norm > 0.0)) throw NoConvergence("schmidt: zero amplitude");

  SchmidtResult result;
  result.singular_values.resize(s.size());
  double sum4 = 0.0;
  for (Eigen::Index n = 0; n < s.size(); ++n) {
    const double lambda = s[n] / norm;
    result.singular_values[n] = lambda;
    sum4 += lambda * lambda * lambda * lambda;
  }
  result.K = 1.0 / sum4;
  result.purity = sum4;

  const auto modes = std::min<Eigen::Index>(max_modes, s.size());
  for (Eigen::Index n = 0; n < modes; ++n) {
    result.signal_modes.emplace_back(decomposition.u.col(n));
    result.idler_modes.emplace_back(decomposition.v.col(n).conjugate());
  }
  return result;
}

SchmidtResult schmidt(const JsaGrid& grid, int max_modes) { return schmidt(grid.amplitude, max_modes); }

double schmidt_number(const Eigen::MatrixXcd& amplitude) {
  const Eigen::VectorXd s = numerics::svd(amplitude, false).singular_values;
  const double norm2 = s.squaredNorm();
  if (!(norm2 > 0.0)) throw NoConvergence("schmidt: zero amplitude");
  double sum4 = 0.0;
  for (double v : s) sum4 += (v * v / norm2) * (v * v / norm2);
  return 1.0 / sum4;
}

double gvm_residual(const ProcessSpec& process, const PumpSpec& pump, const Fiber& fiber) {
  return gvm_residual(processes::gvm_terms(fiber, process, pump), pump.sigma());
}

int purity_band(double purity) {
  if (!std::isfinite(purity)) return -1;
  if (purity >= 0.98) return 3;
  if (purity >= 0.9) return 2;
  if (purity >= 0.7) return 1;
  return 0;
}

void MapOptions::validate() const {
  grid.validate();
  auto check_range = [](double lo, double hi, const char* what) {
    if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi))
      throw ArgumentOutOfRange(std::string("map ") + what + " range must be positive and ordered");
  };
  check_range(length_min_cm, length_max_cm, "length");
  check_range(bandwidth_min_nm, bandwidth_max_nm, "bandwidth");
  for (int n : {bandwidth_points, length_points})
    if (n < 1 || n > 128) throw ArgumentOutOfRange("map resolution must be in [1, 128] per axis");
}

std::vector<double> scan_axis(double lo, double hi, int n) {
  if (n == 1) return {0.5 * (lo + hi)};
  std::vector<double> axis(n);
  for (int j = 0; j < n; ++j) axis[j] = lo + (hi - lo) * j / (n - 1);
  return axis;
}

FactorabilityMap factorability_map(std::span<const ProcessSpec> processes,
                                   std::span<const GroupSlowness> slowness,
                                   double pump_wavelength_um, const MapOptions& options) {
  options.validate();
  if (processes.size() != slowness.size())
    throw ArgumentOutOfRange("factorability_map: one slowness record per process required");
  if (processes.empty()) throw EmptySelection("factorability_map: no processes to scan");

  const auto bandwidths = scan_axis(options.bandwidth_min_nm, options.bandwidth_max_nm, options.bandwidth_points);
  const auto lengths = scan_axis(options.length_min_cm, options.length_max_cm, options.length_points);
  const auto rows = static_cast<Eigen::Index>(bandwidths.size());
  const auto cols = static_cast<Eigen::Index>(lengths.size());
  const auto n_proc = processes.size();

  FactorabilityMap map;
  for (const auto& p : processes) {
    map.labels.push_back(p.label);
    map.purity.push_back({Eigen::MatrixXd::Constant(rows, cols, kNaN), bandwidths, lengths});
  }

  const std::size_t points = static_cast<std::size_t>(rows * cols) * n_proc;
  parallel_for(points, options.threads, [&](std::size_t index) {
    const auto proc = index % n_proc;
    const auto cell = static_cast<Eigen::Index>(index / n_proc);
    const Eigen::Index r = cell / cols;
    const Eigen::Index c = cell % cols;
    try {
      const double sigma = processes::sigma_from_bandwidth(pump_wavelength_um, bandwidths[r]);
      const auto terms = make_terms(slowness[proc], sigma, lengths[c] * 1e4);
      const auto grid = build_jsa(processes[proc], terms, sigma, options.grid);
      map.purity[proc].values(r, c) = 1.0 / schmidt_number(grid.amplitude);
    } catch (const Error&) {
      // Left as NaN: one bad point must not abort the scan.
    }
  });

  map.min_purity = {Eigen::MatrixXd::Constant(rows, cols, kNaN), bandwidths, lengths};
  map.bands = Eigen::MatrixXi::Constant(rows, cols, -1);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      double lowest = std::numeric_limits<double>::infinity();
      for (const auto& grid : map.purity) lowest = std::min(lowest, grid.values(r, c));
      // std::min drops NaN depending on argument order, so test explicitly.
      bool missing = false;
      for (const auto& grid : map.purity) missing = missing || std::isnan(grid.values(r, c));
      if (missing) continue;
      map.min_purity.values(r, c) = lowest;
      map.bands(r, c) = purity_band(lowest);
    }
  }
  return map;
}

FactorabilityMap factorability_map(const Fiber& fiber, std::span<const ProcessSpec> processes,
                                   const PumpSpec& pump, const MapOptions& options) {
  std::vector<GroupSlowness> slowness;
  slowness.reserve(processes.size());
  for (const auto& p : processes) slowness.push_back(processes::group_slowness(fiber, p));
  return factorability_map(processes, slowness, pump.center_wavelength_um, options);
}

}  // namespace sfwm::spectral
