#include "sfwm/statemodel.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/bessel.hpp>

#include "sfwm/constants.hpp"
#include "sfwm/errors.hpp"
#include "sfwm/parallel.hpp"

namespace sfwm::statemodel {
namespace {

constexpr double kDropWeight = 1e-6;

void require_same_grid(const ModeField& a, const ModeField& b) {
  if (!(a.grid == b.grid) || a.values.rows() != b.values.rows() || a.values.cols() != b.values.cols())
    throw GridMismatch("mode fields sampled on different polar grids");
}

double unit_profile(int l, double u, double w, double rho) {
  if (rho <= 1.0) return boost::math::cyl_bessel_j(l, u * rho) / boost::math::cyl_bessel_j(l, u);
  return boost::math::cyl_bessel_k(l, w * rho) / boost::math::cyl_bessel_k(l, w);
}

double azimuthal(const ModeLabel& mode, double phi) {
  switch (mode.parity) {
    case dispersion::Parity::Even: return std::cos(phi);
    case dispersion::Parity::Odd: return std::sin(phi);
    case dispersion::Parity::None: break;
  }
  return 1.0;
}

// Linear interpolation of |values| at x; zero outside the axis.
double interpolate_abs(std::span<const double> axis, const Eigen::VectorXcd& values, double x) {
  if (axis.empty() || x < axis.front() || x > axis.back()) return 0.0;
  const auto it = std::upper_bound(axis.begin(), axis.end(), x);
  if (it == axis.end()) return std::abs(values[static_cast<Eigen::Index>(axis.size() - 1)]);
  const auto j = static_cast<Eigen::Index>(it - axis.begin());
  if (j == 0) return std::abs(values[0]);
  const double t = (x - axis[j - 1]) / (axis[j] - axis[j - 1]);
  return (1.0 - t) * std::abs(values[j - 1]) + t * std::abs(values[j]);
}

std::vector<double> shifted(const std::vector<double>& detunings, double center) {
  std::vector<double> out(detunings.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = center + detunings[j];
  return out;
}

void normalize_terms(std::vector<StateTerm>& terms) {
  double total = 0.0;
  for (const auto& t : terms) total += t.weight();
  if (!(total > 0.0)) throw EmptySelection("state has no term with nonzero amplitude");
  const double scale = 1.0 / std::sqrt(total);
  for (auto& t : terms) t.eta *= scale;
}

}  // namespace

std::vector<double> PolarGrid::radii() const {
  const int core = radial_points / 2;
  const int clad = radial_points - core;
  const double a = core_radius_um;
  std::vector<double> r(radial_points);
  for (int j = 0; j < core; ++j) r[j] = a * (j + 0.5) / core;
  for (int j = 0; j < clad; ++j) r[core + j] = a + a * (extent - 1.0) * (j + 0.5) / clad;
  return r;
}

std::vector<double> PolarGrid::weights() const {
  const int core = radial_points / 2;
  const int clad = radial_points - core;
  const double a = core_radius_um;
  const double dphi = 2.0 * kPi / azimuthal_points;
  const auto r = radii();
  std::vector<double> wts(radial_points);
  for (int j = 0; j < radial_points; ++j) {
    const double dr = j < core ? a / core : a * (extent - 1.0) / clad;
    wts[j] = r[j] * dr * dphi;
  }
  return wts;
}

std::vector<double> PolarGrid::angles() const {
  std::vector<double> phi(azimuthal_points);
  for (int k = 0; k < azimuthal_points; ++k) phi[k] = 2.0 * kPi * k / azimuthal_points;
  return phi;
}

double ModeField::operator()(double r_um, double phi) const {
  const double rho = r_um / grid.core_radius_um;
  return norm * unit_profile(mode.azimuthal_order(), u, w, rho) * azimuthal(mode, phi);
}

ModeField mode_field(const Fiber& fiber, const ModeLabel& mode, double wavelength_um,
                     const PolarGrid& grid) {
  if (grid.radial_points < 2 || grid.azimuthal_points < 4 || !(grid.extent > 1.0) ||
      !(grid.core_radius_um > 0.0))
    throw ArgumentOutOfRange("mode_field: degenerate polar grid");
  if (!fiber.guided(mode, omega_from_um(wavelength_um)))
    throw ModeNotGuided(mode.name() + " is not guided at " + std::to_string(wavelength_um) + " um");
  const auto solution = fiber.transverse(mode.family, wavelength_um);
  if (!solution) throw ModeNotGuided(mode.name() + " has no transverse solution");

  ModeField field;
  field.mode = mode;
  field.wavelength_um = wavelength_um;
  field.u = solution->u;
  field.w = solution->w;
  field.grid = grid;

  const auto r = grid.radii();
  const auto wts = grid.weights();
  const auto phi = grid.angles();
  field.values.resize(grid.radial_points, grid.azimuthal_points);
  double power = 0.0;
  for (int j = 0; j < grid.radial_points; ++j) {
    const double radial = unit_profile(mode.azimuthal_order(), field.u, field.w, r[j] / grid.core_radius_um);
    for (int k = 0; k < grid.azimuthal_points; ++k) {
      const double e = radial * azimuthal(mode, phi[k]);
      field.values(j, k) = e;
      power += wts[j] * e * e;
    }
  }
  field.norm = 1.0 / std::sqrt(power);
  field.values *= field.norm;
  return field;
}

ModeField mode_field(const Fiber& fiber, const ModeLabel& mode, double wavelength_um) {
  PolarGrid grid;
  grid.core_radius_um = fiber.spec().core_radius_um;
  return mode_field(fiber, mode, wavelength_um, grid);
}

double overlap_integral(const ModeField& e1, const ModeField& e2, const ModeField& e3,
                        const ModeField& e4) {
  require_same_grid(e1, e2);
  require_same_grid(e1, e3);
  require_same_grid(e1, e4);
  const auto wts = e1.grid.weights();
  double sum = 0.0;
  for (Eigen::Index j = 0; j < e1.values.rows(); ++j) {
    double ring = 0.0;
    for (Eigen::Index k = 0; k < e1.values.cols(); ++k)
      ring += e1.values(j, k) * e2.values(j, k) * e3.values(j, k) * e4.values(j, k);
    sum += wts[j] * ring;
  }
  return sum;
}

double overlap_integral(const Fiber& fiber, const ProcessSpec& process) {
  const double lp = um_from_omega(process.omega_p);
  return overlap_integral(mode_field(fiber, process.modes.pump1, lp),
                          mode_field(fiber, process.modes.pump2, lp),
                          mode_field(fiber, process.modes.signal, um_from_omega(process.omega_s)),
                          mode_field(fiber, process.modes.idler, um_from_omega(process.omega_i)));
}

double inner_product(const ModeField& a, const ModeField& b) {
  require_same_grid(a, b);
  if (a.mode.polarization != b.mode.polarization) return 0.0;
  const auto wts = a.grid.weights();
  double sum = 0.0;
  for (Eigen::Index j = 0; j < a.values.rows(); ++j)
    sum += wts[j] * a.values.row(j).dot(b.values.row(j));
  return sum;
}

Complex process_amplitude(const ProcessSpec& process, const PumpSpec& pump, double overlap) {
  return pump.amplitude(process.modes.pump1) * pump.amplitude(process.modes.pump2) * overlap;
}

Complex process_amplitude(const ProcessSpec& process, const PumpSpec& pump, const Fiber& fiber) {
  const Complex product = pump.amplitude(process.modes.pump1) * pump.amplitude(process.modes.pump2);
  if (product == Complex(0.0)) return 0.0;
  return product * overlap_integral(fiber, process);
}

TwoPhotonState assemble_state(const Fiber& fiber, const PumpSpec& pump,
                              std::span<const ProcessSpec> processes, const StateOptions& options) {
  if (processes.empty()) throw EmptySelection("assemble_state: no processes");
  options.grid.validate();

  std::vector<std::optional<StateTerm>> slots(processes.size());
  parallel_for(processes.size(), options.threads, [&](std::size_t j) {
    const Complex eta = process_amplitude(processes[j], pump, fiber);
    if (eta == Complex(0.0)) return;
    StateTerm term;
    term.eta = eta;
    term.process = processes[j];
    term.jsa = spectral::build_jsa(processes[j], pump, fiber, options.grid);
    term.schmidt = spectral::schmidt(term.jsa);
    slots[j] = std::move(term);
  });

  TwoPhotonState state;
  for (auto& slot : slots)
    if (slot) state.terms.push_back(std::move(*slot));
  normalize_terms(state.terms);
  state.normalized = true;
  return state;
}

TwoPhotonState make_state(std::vector<StateTerm> terms) {
  if (terms.empty()) throw EmptySelection("make_state: no terms");
  for (auto& t : terms) t.schmidt = spectral::schmidt(t.jsa);
  TwoPhotonState state;
  state.terms = std::move(terms);
  normalize_terms(state.terms);
  state.normalized = true;
  return state;
}

double packet_overlap(std::span<const double> omega_a, const Eigen::VectorXcd& a,
                      std::span<const double> omega_b, const Eigen::VectorXcd& b) {
  if (omega_a.size() < 2 || static_cast<Eigen::Index>(omega_a.size()) != a.size() ||
      static_cast<Eigen::Index>(omega_b.size()) != b.size())
    throw GridMismatch("packet_overlap: axis and packet lengths differ");
  // Trapezoid on a's axis; b vanishes outside its own support.
  double sum = 0.0;
  for (std::size_t j = 0; j + 1 < omega_a.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double left = std::abs(a[jj]) * interpolate_abs(omega_b, b, omega_a[j]);
    const double right = std::abs(a[jj + 1]) * interpolate_abs(omega_b, b, omega_a[j + 1]);
    sum += 0.5 * (left + right) * (omega_a[j + 1] - omega_a[j]);
  }
  return sum;
}

std::variant<std::vector<SchmidtPair>, NotSchmidt> schmidt_form(const TwoPhotonState& state,
                                                                const SchmidtCriteria& criteria) {
  NotSchmidt diagnosis;
  std::vector<SchmidtPair> pairs;
  for (const auto& term : state.terms) {
    diagnosis.purities.emplace_back(term.process.label, term.schmidt.purity);
    if (term.schmidt.signal_modes.empty()) continue;
    SchmidtPair pair;
    pair.label = term.process.label;
    pair.signal_mode = term.process.modes.signal;
    pair.idler_mode = term.process.modes.idler;
    pair.omega_s = shifted(term.jsa.nu_s, term.process.omega_s);
    pair.omega_i = shifted(term.jsa.nu_i, term.process.omega_i);
    pair.signal_packet = term.schmidt.signal_modes.front() / std::sqrt(term.jsa.grid_step_s());
    pair.idler_packet = term.schmidt.idler_modes.front() / std::sqrt(term.jsa.grid_step_i());
    pair.weight = term.weight();
    pair.purity = term.schmidt.purity;
    pairs.push_back(std::move(pair));
  }

  std::string impure;
  for (const auto& [label, purity] : diagnosis.purities) {
    if (!(purity > criteria.min_purity)) {
      if (!impure.empty()) impure += ", ";
      impure += label;
    }
  }
  if (!impure.empty()) {
    diagnosis.reason = "purity at or below " + std::to_string(criteria.min_purity) + " for " + impure;
    return diagnosis;
  }

  for (std::size_t a = 0; a < pairs.size(); ++a) {
    for (std::size_t b = a + 1; b < pairs.size(); ++b) {
      const auto& pa = pairs[a];
      const auto& pb = pairs[b];
      double worst = 0.0;
      if (pa.signal_mode == pb.signal_mode)
        worst = std::max(worst, packet_overlap(pa.omega_s, pa.signal_packet, pb.omega_s, pb.signal_packet));
      if (pa.idler_mode == pb.idler_mode)
        worst = std::max(worst, packet_overlap(pa.omega_i, pa.idler_packet, pb.omega_i, pb.idler_packet));
      if (worst >= criteria.max_overlap) {
        diagnosis.reason = "spectral packets of " + pa.label + " and " + pb.label + " overlap";
        diagnosis.overlapping = std::make_pair(pa.label, pb.label);
        diagnosis.overlap = worst;
        return diagnosis;
      }
    }
  }
  return pairs;
}

void WavelengthWindow::validate() const {
  if (!(lo_nm > 0.0) || !(hi_nm > lo_nm) || !std::isfinite(hi_nm))
    throw ArgumentOutOfRange("wavelength window must satisfy 0 < lo < hi");
}

TwoPhotonState postselect(const TwoPhotonState& state, const WavelengthWindow& signal,
                          const WavelengthWindow& idler) {
  signal.validate();
  idler.validate();

  TwoPhotonState out;
  double survival = 0.0;
  for (const auto& term : state.terms) {
    const auto& jsa = term.jsa;
    StateTerm filtered = term;
    double kept = 0.0;
    double total = 0.0;
    for (Eigen::Index r = 0; r < jsa.amplitude.rows(); ++r) {
      const bool s_in = signal.contains(nm_from_omega(term.process.omega_s + jsa.nu_s[r]));
      for (Eigen::Index c = 0; c < jsa.amplitude.cols(); ++c) {
        const double p = std::norm(jsa.amplitude(r, c));
        total += p;
        if (s_in && idler.contains(nm_from_omega(term.process.omega_i + jsa.nu_i[c]))) {
          kept += p;
        } else {
          filtered.jsa.amplitude(r, c) = 0.0;
          filtered.jsa.pm_part(r, c) = 0.0;
        }
      }
    }
    const double fraction = total > 0.0 ? kept / total : 0.0;
    const double weight = term.weight() * fraction;
    if (weight < kDropWeight) continue;

    const double peak = filtered.jsa.amplitude.cwiseAbs().maxCoeff();
    filtered.jsa.amplitude /= peak;
    filtered.jsa.pm_part /= peak;
    filtered.eta = term.eta * std::sqrt(fraction);
    filtered.schmidt = spectral::schmidt(filtered.jsa);
    survival += weight;
    out.terms.push_back(std::move(filtered));
  }
  if (out.terms.empty()) throw EmptySelection("post-selection windows exclude every process");
  normalize_terms(out.terms);
  out.normalized = true;
  out.survival_probability = state.survival_probability * survival;
  return out;
}

}  // namespace sfwm::statemodel
