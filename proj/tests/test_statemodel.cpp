#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "sfwm/constants.hpp"
#include "sfwm/errors.hpp"
#include "sfwm/statemodel.hpp"

using namespace sfwm;
using namespace sfwm::statemodel;
using namespace sfwm::dispersion::modes;
using dispersion::FiberSpec;

namespace {

FiberSpec fiber_spec(double length_cm) {
  FiberSpec s;
  s.lp11_cutoff_v = 2.51;
  s.length_cm = length_cm;
  return s;
}

PumpSpec make_pump(double wavelength_nm, double bandwidth_nm) {
  PumpSpec p;
  p.center_wavelength_um = wavelength_nm * 1e-3;
  p.bandwidth_nm = bandwidth_nm;
  p.amplitudes = {{LP01x, 1.0}, {LP11ex, 1.0}, {LP11ox, 1.0}};
  p.normalize();
  return p;
}

const Fiber& fiber690() {
  static const Fiber f{fiber_spec(14.5)};
  return f;
}

const Fiber& fiber620() {
  static const Fiber f{fiber_spec(12.0)};
  return f;
}

const std::vector<ProcessSpec>& processes690() {
  static const auto p = processes::solve_processes(fiber690(), processes::viable_six_mode_processes(),
                                                   omega_from_nm(690.0));
  return p;
}

const std::vector<ProcessSpec>& processes620() {
  static const auto p = processes::solve_processes(fiber620(), processes::viable_six_mode_processes(),
                                                   omega_from_nm(620.0));
  return p;
}

const TwoPhotonState& state690() {
  static const auto s = assemble_state(fiber690(), make_pump(690.0, 0.52), processes690());
  return s;
}

const TwoPhotonState& state620() {
  static const auto s = assemble_state(fiber620(), make_pump(620.0, 0.35), processes620());
  return s;
}

double total_weight(const TwoPhotonState& state) {
  double sum = 0.0;
  for (const auto& t : state.terms) sum += t.weight();
  return sum;
}

const StateTerm& term_with_modes(const TwoPhotonState& state, const ModeLabel& pump, const ModeLabel& daughter) {
  auto it = std::find_if(state.terms.begin(), state.terms.end(), [&](const StateTerm& t) {
    const auto& m = t.process.modes;
    return m.pump1 == pump && m.pump2 == pump && m.signal == daughter && m.idler == daughter;
  });
  REQUIRE(it != state.terms.end());
  return *it;
}

}  // namespace

TEST_CASE("mode fields are unit normalized with the expected shapes") {
  const double lambda = 0.690;
  const auto lp01 = mode_field(fiber690(), LP01x, lambda);
  const auto even = mode_field(fiber690(), LP11ex, lambda);
  const auto odd = mode_field(fiber690(), LP11ox, lambda);
  for (const auto* f : {&lp01, &even, &odd}) {
    CHECK(inner_product(*f, *f) == doctest::Approx(1.0).epsilon(1e-6));
  }

  // LP01: azimuthally uniform, maximal at the center, radially decreasing.
  for (Eigen::Index r = 0; r < lp01.values.rows(); ++r) {
    const auto row = lp01.values.row(r);
    CHECK(row.maxCoeff() - row.minCoeff() < 1e-12 * lp01.values.maxCoeff());
  }
  for (Eigen::Index r = 1; r < lp01.values.rows(); ++r) CHECK(lp01.values(r, 0) < lp01.values(r - 1, 0));

  // LP11 even: lobes on the x axis, node along y and at the center.
  const double a = fiber690().spec().core_radius_um;
  const double peak = std::abs(even(0.6 * a, 0.0));
  CHECK(peak > 0.0);
  CHECK(even(0.6 * a, std::numbers::pi) == doctest::Approx(-even(0.6 * a, 0.0)).epsilon(1e-12));
  CHECK(std::abs(even(0.6 * a, 0.5 * std::numbers::pi)) < 1e-12 * peak);
  CHECK(std::abs(even(1e-9, 0.0)) < 1e-6 * peak);
  CHECK(std::abs(odd(0.6 * a, 0.0)) < 1e-12 * peak);
  CHECK(odd(0.6 * a, 0.5 * std::numbers::pi) == doctest::Approx(even(0.6 * a, 0.0)).epsilon(1e-12));

  // Core and cladding branches meet at r = a.
  for (const auto* f : {&lp01, &even}) {
    const double inside = (*f)(a * (1.0 - 1e-12), 0.0);
    const double outside = (*f)(a * (1.0 + 1e-12), 0.0);
    CHECK(std::abs(inside - outside) < 1e-8 * std::abs((*f)(0.0, 0.0) + (*f)(0.6 * a, 0.0)));
  }

  CHECK_THROWS_AS(mode_field(fiber690(), LP11ex, 0.95), ModeNotGuided);
}

TEST_CASE("mode fields are orthogonal") {
  const double lambda = 0.690;
  const auto lp01 = mode_field(fiber690(), LP01x, lambda);
  const auto even = mode_field(fiber690(), LP11ex, lambda);
  const auto odd = mode_field(fiber690(), LP11ox, lambda);
  const auto lp01y = mode_field(fiber690(), LP01y, lambda);
  CHECK(std::abs(inner_product(lp01, even)) < 1e-8);
  CHECK(std::abs(inner_product(lp01, odd)) < 1e-8);
  CHECK(std::abs(inner_product(even, odd)) < 1e-8);
  CHECK(inner_product(lp01, lp01y) == 0.0);

  PolarGrid other;
  other.radial_points = 128;
  const auto coarse = mode_field(fiber690(), LP01x, lambda, other);
  CHECK_THROWS_AS(inner_product(lp01, coarse), GridMismatch);
  CHECK_THROWS_AS(overlap_integral(lp01, lp01, lp01, coarse), GridMismatch);
}

TEST_CASE("four-wave overlap integrals") {
  const auto f1 = mode_field(fiber690(), LP01x, 0.690);
  const auto f2 = mode_field(fiber690(), LP11ex, 0.690);
  const auto f3 = mode_field(fiber690(), LP01y, 0.780);
  const auto f4 = mode_field(fiber690(), LP11ey, 0.620);
  std::vector<const ModeField*> fields{&f1, &f2, &f3, &f4};
  const double reference = overlap_integral(f1, f2, f3, f4);
  CHECK(reference > 0.0);
  std::sort(fields.begin(), fields.end());
  do {
    CHECK(overlap_integral(*fields[0], *fields[1], *fields[2], *fields[3]) ==
          doctest::Approx(reference).epsilon(1e-12));
  } while (std::next_permutation(fields.begin(), fields.end()));

  // One even and one odd LP11 with two LP01: the azimuthal integrand is odd.
  const auto odd = mode_field(fiber690(), LP11oy, 0.620);
  CHECK(std::abs(overlap_integral(f1, f2, f3, odd)) < 1e-10 * reference);

  // Brute-force Cartesian quadrature of the same integral.
  const double extent = 4.0 * fiber690().spec().core_radius_um;
  const int n = 600;
  const double h = 2.0 * extent / n;
  double sum = 0.0;
  for (int ix = 0; ix < n; ++ix) {
    for (int iy = 0; iy < n; ++iy) {
      const double x = -extent + (ix + 0.5) * h;
      const double y = -extent + (iy + 0.5) * h;
      const double r = std::hypot(x, y);
      if (r > extent) continue;
      const double phi = std::atan2(y, x);
      sum += f1(r, phi) * f2(r, phi) * f3(r, phi) * f4(r, phi);
    }
  }
  CHECK(sum * h * h == doctest::Approx(reference).epsilon(2e-3));
}

TEST_CASE("process overlaps at 690 nm") {
  const auto& all = processes690();
  const auto& a = processes::find_process(all, "a");
  const auto& b = processes::find_process(all, "b");
  const double oa = overlap_integral(fiber690(), a);
  const double ob = overlap_integral(fiber690(), b);
  const double oc = overlap_integral(fiber690(), processes::find_process(all, "c"));
  // Even and odd fields share their radial profile, so b's mode set at a's
  // wavelengths reproduces a's overlap; the residual a/b difference comes
  // from the 5 nm offset between their phasematched wavelengths.
  ProcessSpec b_at_a = a;
  b_at_a.modes = b.modes;
  CHECK(overlap_integral(fiber690(), b_at_a) == doctest::Approx(oa).epsilon(1e-10));
  CHECK(std::abs(oa - ob) <= 1e-2 * std::abs(oa));
  CHECK(oc > oa);
  CHECK(oc > ob);

  const auto lp01 = mode_field(fiber690(), LP01x, 0.690);
  const double all_fundamental = overlap_integral(lp01, lp01, lp01, lp01);
  CHECK(all_fundamental >= std::max({oa, ob, oc}));
}

TEST_CASE("process amplitudes follow the pump modes") {
  const auto& all = processes690();
  const auto& a = processes::find_process(all, "a");
  PumpSpec no_even = make_pump(690.0, 0.52);
  no_even.amplitudes = {{LP01x, 1.0}, {LP11ox, 1.0}};
  no_even.normalize();
  CHECK(process_amplitude(a, no_even, fiber690()) == Complex(0.0, 0.0));
  CHECK(std::abs(process_amplitude(processes::find_process(all, "b"), no_even, fiber690())) > 0.0);

  const auto pump = make_pump(690.0, 0.52);
  const double theta = 0.37;
  PumpSpec rotated = pump;
  for (auto& [mode, amp] : rotated.amplitudes) amp *= std::polar(1.0, theta);
  for (const auto& p : all) {
    CAPTURE(p.label);
    const double overlap = overlap_integral(fiber690(), p);
    const Complex base = process_amplitude(p, pump, overlap);
    const Complex turned = process_amplitude(p, rotated, overlap);
    CHECK(std::abs(turned - base * std::polar(1.0, 2.0 * theta)) < 1e-14 * std::abs(base));
    CHECK(process_amplitude(p, pump, fiber690()) == base);
  }

  const double ratio = std::norm(process_amplitude(processes::find_process(all, "c"), pump, fiber690())) /
                       std::norm(process_amplitude(a, pump, fiber690()));
  CHECK(ratio >= 3.0);
  CHECK(ratio <= 30.0);
}

TEST_CASE("assembled states") {
  const auto& s690 = state690();
  CHECK(s690.terms.size() == 3);
  CHECK(s690.normalized);
  CHECK(total_weight(s690) == doctest::Approx(1.0).epsilon(1e-10));

  const auto& s620 = state620();
  CHECK(s620.terms.size() == 10);
  CHECK(total_weight(s620) == doctest::Approx(1.0).epsilon(1e-10));

  const std::vector<ProcessSpec> single{processes::find_process(processes690(), "c")};
  const auto one = assemble_state(fiber690(), make_pump(690.0, 0.52), single);
  REQUIRE(one.terms.size() == 1);
  CHECK(std::abs(one.terms[0].eta) == doctest::Approx(1.0).epsilon(1e-12));

  // A pump without LP11ex drops process a.
  PumpSpec no_even = make_pump(690.0, 0.52);
  no_even.amplitudes = {{LP01x, 1.0}, {LP11ox, 1.0}};
  no_even.normalize();
  const auto reduced = assemble_state(fiber690(), no_even, processes690());
  CHECK(reduced.terms.size() == 2);

  PumpSpec only_even = make_pump(690.0, 0.52);
  only_even.amplitudes = {{LP11ex, 1.0}};
  CHECK_THROWS_AS(assemble_state(fiber690(), only_even, single), EmptySelection);
}

TEST_CASE("the 690 nm state has a discrete Schmidt form") {
  const auto form = schmidt_form(state690());
  REQUIRE(std::holds_alternative<std::vector<SchmidtPair>>(form));
  const auto& pairs = std::get<std::vector<SchmidtPair>>(form);
  REQUIRE(pairs.size() == 3);
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    const auto& pair = pairs[j];
    CAPTURE(pair.label);
    CHECK(pair.weight == doctest::Approx(state690().terms[j].weight()).epsilon(1e-9));
    CHECK(pair.purity > 0.7);
    // Trapezoid-free check of ∫|S|² dω = 1 on the uniform axis.
    const double ds = pair.omega_s[1] - pair.omega_s[0];
    const double di = pair.omega_i[1] - pair.omega_i[0];
    CHECK(pair.signal_packet.squaredNorm() * ds == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(pair.idler_packet.squaredNorm() * di == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("schmidt_form diagnoses a short fiber and overlapping packets") {
  const Fiber short_fiber{fiber_spec(2.0)};
  const auto state = assemble_state(short_fiber, make_pump(690.0, 0.52), processes690());
  const auto form = schmidt_form(state);
  REQUIRE(std::holds_alternative<NotSchmidt>(form));
  const auto& diagnosis = std::get<NotSchmidt>(form);
  CHECK(diagnosis.purities.size() == 3);
  CHECK(std::any_of(diagnosis.purities.begin(), diagnosis.purities.end(),
                    [](const auto& p) { return p.second <= 0.7; }));
  CHECK_FALSE(diagnosis.reason.empty());

  // Two copies of one process share both bands.
  auto first = state690().terms.back();
  auto twin = first;
  twin.process.label = "c2";
  const auto doubled = make_state({first, twin});
  const auto twin_form = schmidt_form(doubled);
  REQUIRE(std::holds_alternative<NotSchmidt>(twin_form));
  const auto& twin_diagnosis = std::get<NotSchmidt>(twin_form);
  REQUIRE(twin_diagnosis.overlapping.has_value());
  CHECK(twin_diagnosis.overlapping->first == "c");
  CHECK(twin_diagnosis.overlapping->second == "c2");
  CHECK(twin_diagnosis.overlap > 1e-3);
}

TEST_CASE("packet overlap") {
  std::vector<double> w(201);
  for (int j = 0; j < 201; ++j) w[j] = -10.0 + 0.1 * j;
  Eigen::VectorXcd g(201), shifted(201);
  for (int j = 0; j < 201; ++j) {
    g[j] = std::exp(-w[j] * w[j] / 2.0) / std::pow(std::numbers::pi, 0.25);
    shifted[j] = std::exp(-(w[j] - 1.0) * (w[j] - 1.0) / 2.0) / std::pow(std::numbers::pi, 0.25);
  }
  CHECK(packet_overlap(w, g, w, g) == doctest::Approx(1.0).epsilon(1e-6));
  // ∫ g(ω) g(ω−1) dω = e^{-1/4} for unit-norm Gaussians.
  CHECK(packet_overlap(w, g, w, shifted) == doctest::Approx(std::exp(-0.25)).epsilon(1e-5));
  std::vector<double> far(w);
  for (auto& x : far) x += 100.0;
  CHECK(packet_overlap(w, g, far, g) == 0.0);
}

TEST_CASE("post-selection") {
  const auto& state = state690();
  const auto same = postselect(state, {1.0, 1e5}, {1.0, 1e5});
  REQUIRE(same.terms.size() == state.terms.size());
  for (std::size_t j = 0; j < state.terms.size(); ++j)
    CHECK(std::abs(same.terms[j].weight() - state.terms[j].weight()) < 1e-12);
  CHECK(same.survival_probability == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(postselect(state, {1500.0, 1510.0}, {1500.0, 1510.0}), EmptySelection);
  CHECK_THROWS_AS(postselect(state, {700.0, 690.0}, {1.0, 1e5}), ArgumentOutOfRange);

  // Isolating process c keeps just that term.
  const auto& c = processes::find_process(processes690(), "c");
  const auto only_c = postselect(state, {c.lambda_s_nm() - 1.0, c.lambda_s_nm() + 1.0},
                                 {c.lambda_i_nm() - 1.0, c.lambda_i_nm() + 1.0});
  REQUIRE(only_c.terms.size() == 1);
  CHECK(only_c.terms[0].process.label == "c");
  CHECK(total_weight(only_c) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(only_c.survival_probability < state.terms[2].weight() + 1e-9);
  CHECK(only_c.survival_probability > 0.9 * state.terms[2].weight());
}

TEST_CASE("balanced LP11 post-selection at 620 nm") {
  const auto& state = state620();
  const auto& h = term_with_modes(state, LP11ex, LP11ey);
  const auto& i = term_with_modes(state, LP11ox, LP11oy);
  CHECK(h.process.lambda_s_nm() == doctest::Approx(679.7).epsilon(2.0 / 679.7));
  CHECK(h.process.lambda_i_nm() == doctest::Approx(570.0).epsilon(2.0 / 570.0));

  const double hw = 0.2;
  const double ls = h.process.lambda_s_nm();
  const double li = h.process.lambda_i_nm();
  const auto bell = postselect(state, {ls - hw, ls + hw}, {li - 0.7 * hw, li + 0.7 * hw});
  CHECK(total_weight(bell) == doctest::Approx(1.0).epsilon(1e-10));
  const auto& bh = term_with_modes(bell, LP11ex, LP11ey);
  const auto& bi = term_with_modes(bell, LP11ox, LP11oy);
  CHECK(bh.weight() == doctest::Approx(0.5).epsilon(1e-3 / 0.5));
  CHECK(bi.weight() == doctest::Approx(0.5).epsilon(1e-3 / 0.5));
  CHECK(bh.weight() + bi.weight() > 0.998);
  CHECK(bell.survival_probability > 0.0);
  CHECK(bell.survival_probability < h.weight() + i.weight());
}
