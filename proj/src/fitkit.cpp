#include "sfwm/fitkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "sfwm/constants.hpp"
#include "sfwm/parallel.hpp"

namespace sfwm::fitkit {
namespace {

constexpr double kPairingToleranceNm = 0.5;
constexpr double kAmbiguityToleranceNm = 1e-3;

// mt19937_64 is fully specified by the standard, but the library
// distributions are not; these two transforms keep the stream portable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }
  std::size_t index(std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
  }

 private:
  std::mt19937_64 engine_;
};

using Genome = std::array<double, 4>;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string side_name(Side side) { return side == Side::Signal ? "signal" : "idler"; }

Side parse_side(const std::string& text) {
  if (text == "signal" || text == "s") return Side::Signal;
  if (text == "idler" || text == "i") return Side::Idler;
  throw ConfigError("unknown peak side '" + text + "' (expected signal or idler)");
}

double ObservedPair::omega_s() const { return omega_from_nm(signal.wavelength_nm); }
double ObservedPair::omega_i() const { return omega_from_nm(idler.wavelength_nm); }

double conjugate_wavelength_nm(double pump_wavelength_um, double wavelength_nm) {
  return nm_from_omega(2.0 * omega_from_um(pump_wavelength_um) - omega_from_nm(wavelength_nm));
}

std::vector<ObservedPair> pair_observations(std::span<const PeakObservation> peaks,
                                            double pump_wavelength_um) {
  std::map<std::string, std::vector<const PeakObservation*>> groups;
  for (const auto& peak : peaks) {
    if (peak.pair_label.empty()) throw ConfigError("peak without a pair label");
    if (!(peak.wavelength_nm > 0.0) || !std::isfinite(peak.wavelength_nm))
      throw ConfigError("pair " + peak.pair_label + ": wavelength must be positive");
    groups[peak.pair_label].push_back(&peak);
  }

  std::vector<ObservedPair> pairs;
  for (const auto& [label, members] : groups) {
    const PeakObservation* signal = nullptr;
    const PeakObservation* idler = nullptr;
    for (const auto* p : members) {
      auto& slot = p->side == Side::Signal ? signal : idler;
      if (slot) throw ConfigError("pair " + label + ": more than one " + side_name(p->side) + " peak");
      slot = p;
    }
    if (!signal || !idler)
      throw ConfigError("pair " + label + " is unpaired: missing its " + (signal ? "idler" : "signal") + " peak");
    const double expected = conjugate_wavelength_nm(pump_wavelength_um, signal->wavelength_nm);
    if (!(std::abs(expected - idler->wavelength_nm) <= kPairingToleranceNm)) {
      std::ostringstream msg;
      msg << "pair " << label << " violates energy conservation: idler at " << idler->wavelength_nm
          << " nm, expected " << expected << " nm";
      throw ConfigError(msg.str());
    }
    pairs.push_back({label, *signal, *idler});
  }
  return pairs;
}

std::array<double, 4> FiberCore::as_array() const {
  return {core_radius_um, numerical_aperture, birefringence, parity_birefringence};
}

FiberCore FiberCore::from_array(const std::array<double, 4>& x) { return {x[0], x[1], x[2], x[3]}; }

FiberCore FiberCore::from_spec(const FiberSpec& spec) {
  return {spec.core_radius_um, spec.numerical_aperture, spec.birefringence, spec.parity_birefringence};
}

FiberSpec FiberCore::apply(FiberSpec base) const {
  base.core_radius_um = core_radius_um;
  base.numerical_aperture = numerical_aperture;
  base.birefringence = birefringence;
  base.parity_birefringence = parity_birefringence;
  return base;
}

double fitness(const FiberCore& candidate, std::span<const ObservedPair> pairs,
               std::span<const ModeCombo> combos, double pump_wavelength_um, const FiberSpec& base) {
  if (pairs.size() != combos.size()) throw ArgumentOutOfRange("fitness: one combination per pair required");
  try {
    const dispersion::Fiber fiber(candidate.apply(base));
    const double omega_p = omega_from_um(pump_wavelength_um);
    double sum = 0.0;
    for (std::size_t j = 0; j < pairs.size(); ++j)
      sum += std::abs(processes::phasemismatch(fiber, combos[j], omega_p, pairs[j].omega_s()));
    return std::isfinite(sum) ? sum : kUnguidedPenalty;
  } catch (const Error&) {
    return kUnguidedPenalty;
  }
}

std::map<std::string, ModeCombo> assign_processes(std::span<const ObservedPair> pairs,
                                                  std::span<const ModeCombo> candidates,
                                                  const dispersion::Fiber& fiber,
                                                  double pump_wavelength_um) {
  const double omega_p = omega_from_um(pump_wavelength_um);
  std::map<std::string, ModeCombo> out;
  for (const auto& pair : pairs) {
    struct Match {
      ModeCombo combo;
      double distance;
    };
    std::vector<Match> matches;
    for (const auto& combo : candidates) {
      if (combo.signal != pair.signal.mode || combo.idler != pair.idler.mode) continue;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : processes::solve_process(fiber, combo, omega_p)) {
        best = std::min(best, std::abs(p.lambda_s_nm() - pair.signal.wavelength_nm) +
                                  std::abs(p.lambda_i_nm() - pair.idler.wavelength_nm));
      }
      if (std::isfinite(best)) matches.push_back({combo, best});
    }
    if (matches.empty())
      throw NoAssignment("pair " + pair.label + " (" + pair.signal.mode.name() + ", " +
                         pair.idler.mode.name() + ") matches no phasematched viable process");
    std::stable_sort(matches.begin(), matches.end(),
                     [](const Match& a, const Match& b) { return a.distance < b.distance; });
    if (matches.size() > 1 && matches[1].distance - matches[0].distance <= kAmbiguityToleranceNm)
      throw AmbiguousAssignment("pair " + pair.label + " fits " + matches[0].combo.describe() + " and " +
                                matches[1].combo.describe() + " equally well");
    out.emplace(pair.label, matches.front().combo);
  }
  return out;
}

void FitConfig::validate() const {
  for (const auto& b : bounds)
    if (!(b.hi > b.lo) || !std::isfinite(b.lo) || !std::isfinite(b.hi))
      throw ConfigError("fit: every bound interval must be nonempty");
  if (bounds[0].lo <= 0.0 || bounds[1].lo <= 0.0) throw ConfigError("fit: r and NA bounds must be positive");
  if (population < 8) throw ConfigError("fit: population must be at least 8");
  if (generations < 1) throw ConfigError("fit: generations must be positive");
  if (tournament < 1 || tournament > population) throw ConfigError("fit: tournament size out of range");
  if (elitism < 0 || elitism >= population) throw ConfigError("fit: elitism must be below the population");
  if (!(mutation_scale >= 0.0) || !(mutation_decay > 0.0) || mutation_rate < 0.0 || mutation_rate > 1.0 ||
      blend_alpha < 0.0)
    throw ConfigError("fit: mutation and crossover settings out of range");
  if (plateau < 1) throw ConfigError("fit: plateau must be positive");
}

NotConverged::NotConverged(FitResult result)
    : Error("genetic algorithm did not converge; best fitness " + std::to_string(result.fitness)),
      result_(std::move(result)) {}

FitResult ga_fit(std::span<const ObservedPair> pairs, std::span<const ModeCombo> combos,
                 double pump_wavelength_um, const FitConfig& config, const FiberSpec& base) {
  config.validate();
  if (pairs.size() < 2) throw ArgumentOutOfRange("ga_fit: at least two observation pairs are needed");
  if (pairs.size() != combos.size()) throw ArgumentOutOfRange("ga_fit: one combination per pair required");

  Rng rng(config.seed);
  const auto n = static_cast<std::size_t>(config.population);
  std::vector<Genome> population(n);
  std::vector<double> scores(n);
  for (auto& g : population)
    for (std::size_t d = 0; d < 4; ++d)
      g[d] = config.bounds[d].lo + rng.uniform() * (config.bounds[d].hi - config.bounds[d].lo);

  // Scores are written by index, so scheduling never changes the outcome.
  auto evaluate = [&](std::size_t first) {
    parallel_for(n - first, config.threads, [&](std::size_t k) {
      scores[first + k] = fitness(FiberCore::from_array(population[first + k]), pairs, combos,
                                  pump_wavelength_um, base);
    });
  };
  auto ranking = [&] {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    return order;
  };
  auto tournament = [&]() -> const Genome& {
    std::size_t winner = rng.index(n);
    for (int t = 1; t < config.tournament; ++t) {
      const std::size_t challenger = rng.index(n);
      if (scores[challenger] < scores[winner] || (scores[challenger] == scores[winner] && challenger < winner))
        winner = challenger;
    }
    return population[winner];
  };

  evaluate(0);
  FitResult result;
  auto order = ranking();
  result.fitness = scores[order.front()];
  result.best = FiberCore::from_array(population[order.front()]);
  result.history.push_back(result.fitness);
  int last_improvement = 0;

  double mutation = config.mutation_scale;
  for (int gen = 1; gen <= config.generations; ++gen) {
    if (result.fitness < config.target_fitness || gen - 1 - last_improvement >= config.plateau) {
      result.converged = true;
      break;
    }
    std::vector<Genome> next;
    std::vector<double> next_scores;
    next.reserve(n);
    for (int e = 0; e < config.elitism; ++e) {
      next.push_back(population[order[e]]);
      next_scores.push_back(scores[order[e]]);
    }
    while (next.size() < n) {
      const Genome& a = tournament();
      const Genome& b = tournament();
      Genome child;
      for (std::size_t d = 0; d < 4; ++d) {
        const double lo = std::min(a[d], b[d]);
        const double hi = std::max(a[d], b[d]);
        const double spread = config.blend_alpha * (hi - lo);
        child[d] = (lo - spread) + rng.uniform() * ((hi - lo) + 2.0 * spread);
        const double range = config.bounds[d].hi - config.bounds[d].lo;
        if (rng.uniform() < config.mutation_rate) child[d] += mutation * range * rng.normal();
        child[d] = std::clamp(child[d], config.bounds[d].lo, config.bounds[d].hi);
      }
      next.push_back(child);
    }
    population = std::move(next);
    std::copy(next_scores.begin(), next_scores.end(), scores.begin());
    evaluate(next_scores.size());

    order = ranking();
    const double best = scores[order.front()];
    if (best < result.fitness * (1.0 - 1e-9)) last_improvement = gen;
    if (best <= result.fitness) {
      result.fitness = best;
      result.best = FiberCore::from_array(population[order.front()]);
    }
    result.history.push_back(result.fitness);
    result.generations = gen;
    mutation *= config.mutation_decay;
  }
  if (!result.converged &&
      (result.fitness < config.target_fitness || result.generations - last_improvement >= config.plateau))
    result.converged = true;
  if (!result.converged) throw NotConverged(result);
  return result;
}

std::vector<PeakObservation> synthesize_observations(std::span<const processes::ProcessSpec> processes) {
  std::vector<PeakObservation> peaks;
  for (std::size_t j = 0; j < processes.size(); ++j) {
    const auto& p = processes[j];
    std::string label;
    for (std::size_t k = j;; k = k / 26 - 1) {
      label.insert(label.begin(), static_cast<char>('A' + k % 26));
      if (k < 26) break;
    }
    peaks.push_back({label, Side::Signal, p.lambda_s_nm(), p.modes.signal});
    peaks.push_back({label, Side::Idler, p.lambda_i_nm(), p.modes.idler});
  }
  return peaks;
}

std::vector<std::string> split_csv_record(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t j = 0; j < line.size(); ++j) {
    const char ch = line[j];
    if (quoted) {
      if (ch == '"' && j + 1 < line.size() && line[j + 1] == '"') {
        field += '"';
        ++j;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field += ch;
    }
  }
  if (quoted) throw ConfigError("unterminated quoted field");
  fields.push_back(field);
  return fields;
}

std::vector<PeakObservation> read_observations_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open observations file " + path.string());
  const std::string where = path.filename().string();

  std::string line;
  int line_no = 0;
  std::map<std::string, std::size_t> column;
  std::vector<PeakObservation> peaks;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto at = where + ":" + std::to_string(line_no) + ": ";
    std::vector<std::string> fields;
    try {
      fields = split_csv_record(line);
    } catch (const ConfigError& e) {
      throw ConfigError(at + e.what());
    }
    if (column.empty()) {
      for (std::size_t c = 0; c < fields.size(); ++c) column[trim(fields[c])] = c;
      for (const char* key : {"pair_label", "side", "wavelength_nm", "mode"})
        if (!column.contains(key)) throw ConfigError(at + "header lacks column '" + key + "'");
      continue;
    }
    auto get = [&](const char* key) {
      const auto c = column.at(key);
      if (c >= fields.size()) throw ConfigError(at + "missing field '" + key + "'");
      return trim(fields[c]);
    };
    PeakObservation peak;
    try {
      peak.pair_label = get("pair_label");
      peak.side = parse_side(get("side"));
      peak.mode = ModeLabel::parse(get("mode"));
      const auto text = get("wavelength_nm");
      std::size_t used = 0;
      peak.wavelength_nm = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      throw ConfigError(msg.rfind(at, 0) == 0 ? msg : at + msg);
    } catch (const std::exception&) {
      throw ConfigError(at + "wavelength_nm is not a number");
    }
    peaks.push_back(std::move(peak));
  }
  if (column.empty()) throw ConfigError(where + ": empty observations file");
  return peaks;
}

std::vector<PeakObservation> read_observations_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open observations file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.filename().string() + ": " + e.what());
  }
  if (doc.is_object() && doc.contains("observations")) doc = doc["observations"];
  if (!doc.is_array()) throw ConfigError(path.filename().string() + ": expected an array of peaks");
  std::vector<PeakObservation> peaks;
  for (std::size_t j = 0; j < doc.size(); ++j) {
    const auto& item = doc[j];
    try {
      PeakObservation peak;
      peak.pair_label = item.at("pair_label").get<std::string>();
      peak.side = parse_side(item.at("side").get<std::string>());
      peak.wavelength_nm = item.at("wavelength_nm").get<double>();
      peak.mode = ModeLabel::parse(item.at("mode").get<std::string>());
      peaks.push_back(std::move(peak));
    } catch (const std::exception& e) {
      throw ConfigError(path.filename().string() + ": entry " + std::to_string(j) + ": " + e.what());
    }
  }
  return peaks;
}

std::vector<PeakObservation> read_observations(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".csv") return read_observations_csv(path);
  if (ext == ".json") return read_observations_json(path);
  throw ConfigError("observations file must be .csv or .json: " + path.string());
}

}  // namespace sfwm::fitkit
