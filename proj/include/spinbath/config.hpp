// config.hpp — scenario configuration: a flat key/value text format.
//
// Lines are `key = value` (or `key: value`); `#` starts a comment; blank
// lines are ignored.  Unknown keys are rejected by name — a typo must
// never silently fall back to a default and change the physics.  List
// values are whitespace-separated numbers.
#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "spinbath/errors.hpp"
#include "spinbath/format.hpp"
#include "spinbath/model.hpp"

namespace spinbath {

enum class Scenario {
  evolve,            // coherence traces over time
  overlap_vs_kappa,  // ground-state overlap across the frustration axis
  overlap_vs_delta,  // ground-state overlap vs coupling width
  correlation_scan,  // random (omega, delta) samples: overlap vs efficiency
  eigenflow,         // low eigenvalues tracked along a delta grid
  spacing,           // level-spacing statistics of the environment
  thermal,           // largest expansion term from thermal initial states
  field_sweep,       // ground-state overlap vs external field
};

inline const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::evolve: return "evolve";
    case Scenario::overlap_vs_kappa: return "overlap-vs-kappa";
    case Scenario::overlap_vs_delta: return "overlap-vs-delta";
    case Scenario::correlation_scan: return "correlation-scan";
    case Scenario::eigenflow: return "eigenflow";
    case Scenario::spacing: return "spacing";
    case Scenario::thermal: return "thermal";
    case Scenario::field_sweep: return "field-sweep";
  }
  return "?";
}

inline std::optional<Scenario> scenario_from_name(const std::string& name) {
  for (Scenario s : {Scenario::evolve, Scenario::overlap_vs_kappa,
                     Scenario::overlap_vs_delta, Scenario::correlation_scan,
                     Scenario::eigenflow, Scenario::spacing, Scenario::thermal,
                     Scenario::field_sweep})
    if (name == scenario_name(s)) return s;
  return std::nullopt;
}

// Sweep axes: any model parameter, or temperature (thermal scenario only).
enum class SweepAxis { none, n_spins, kappa, delta, omega, gamma, eps_sb, h_ext, temperature };

inline const char* sweep_axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::none: return "none";
    case SweepAxis::n_spins: return "N";
    case SweepAxis::kappa: return "kappa";
    case SweepAxis::delta: return "delta";
    case SweepAxis::omega: return "omega";
    case SweepAxis::gamma: return "gamma";
    case SweepAxis::eps_sb: return "eps_sb";
    case SweepAxis::h_ext: return "h_ext";
    case SweepAxis::temperature: return "temperature";
  }
  return "?";
}

struct ScenarioConfig {
  Scenario scenario = Scenario::evolve;
  ModelParams model;

  SweepAxis sweep_axis = SweepAxis::none;
  std::vector<double> sweep_grid;

  int ensemble = 1;

  double dt_sample = 0.1;
  double t_max = 300.0;
  double window_start = 200.0;
  double window_end = 300.0;

  std::string output_dir = "out";

  // correlation-scan
  int samples = 200;
  double scan_omega_min = 0.0, scan_omega_max = 1.0;
  double scan_delta_min = 0.0, scan_delta_max = 3.0;

  // eigenflow
  int k_lowest = 20;

  // spacing
  int bins = 40;
  double window_fraction = 0.8;
  bool sectored = false;

  // thermal
  std::vector<double> temperatures = {0.01, 0.1, 1.0};
};

namespace detail {

struct ConfigEntry {
  std::string value;
  int line;
};

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

inline double parse_real(const std::string& key, const ConfigEntry& e) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(e.value, &used);
  } catch (const std::exception&) {
    throw ParseError(e.line, key + ": expected a number, got '" + e.value + "'");
  }
  if (used != e.value.size())
    throw ParseError(e.line, key + ": trailing characters in '" + e.value + "'");
  return v;
}

inline long long parse_int(const std::string& key, const ConfigEntry& e) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(e.value, &used);
  } catch (const std::exception&) {
    throw ParseError(e.line, key + ": expected an integer, got '" + e.value + "'");
  }
  if (used != e.value.size())
    throw ParseError(e.line, key + ": trailing characters in '" + e.value + "'");
  return v;
}

inline std::uint64_t parse_seed(const std::string& key, const ConfigEntry& e) {
  try {
    return std::stoull(e.value, nullptr, 0);  // accepts decimal and 0x...
  } catch (const std::exception&) {
    throw ParseError(e.line, key + ": expected an unsigned seed, got '" + e.value + "'");
  }
}

inline bool parse_bool(const std::string& key, const ConfigEntry& e) {
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  throw ParseError(e.line, key + ": expected true or false, got '" + e.value + "'");
}

inline std::vector<double> parse_grid(const std::string& key, const ConfigEntry& e) {
  std::istringstream in(e.value);
  std::vector<double> grid;
  std::string token;
  while (in >> token) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (used != token.size())
      throw ParseError(e.line, key + ": bad list entry '" + token + "'");
    grid.push_back(v);
  }
  if (grid.empty()) throw ParseError(e.line, key + ": empty list");
  return grid;
}

}  // namespace detail

// Lexical pass: key/value extraction with duplicate detection.
inline std::map<std::string, detail::ConfigEntry> tokenize_config(
    const std::string& text) {
  std::map<std::string, detail::ConfigEntry> entries;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = detail::trim(raw);
    if (line.empty()) continue;
    std::size_t sep = line.find_first_of("=:");
    if (sep == std::string::npos)
      throw ParseError(line_no, "expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, sep));
    const std::string value = detail::trim(line.substr(sep + 1));
    if (key.empty()) throw ParseError(line_no, "missing key before separator");
    if (value.empty()) throw ParseError(line_no, "missing value for '" + key + "'");
    if (entries.count(key))
      throw ParseError(line_no, "duplicate key '" + key + "'");
    entries[key] = {value, line_no};
  }
  return entries;
}

// Semantic checks, shared by parse_config and anything that builds a
// ScenarioConfig programmatically.
inline void validate_config(const ScenarioConfig& cfg);

// Parse + validate a config document.  Throws ParseError (syntax, with
// line numbers) or ValidationError (named field).
inline ScenarioConfig parse_config(const std::string& text) {
  using detail::ConfigEntry;
  auto entries = tokenize_config(text);

  static const std::set<std::string> known = {
      "scenario", "N", "kappa", "delta", "omega", "gamma", "eps_sb", "h_ext",
      "seed", "isotropic_omega", "sweep_axis", "sweep_grid", "ensemble",
      "dt_sample", "t_max", "window_start", "window_end", "output_dir",
      "samples", "scan_omega_min", "scan_omega_max", "scan_delta_min",
      "scan_delta_max", "k_lowest", "bins", "window_fraction", "sectored",
      "temperatures"};
  for (const auto& [key, entry] : entries)
    if (!known.count(key))
      throw ValidationError(key, "unknown key (line " +
                                     std::to_string(entry.line) + ")");

  auto take = [&](const char* key) -> std::optional<ConfigEntry> {
    auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    return it->second;
  };
  auto require = [&](const char* key) -> ConfigEntry {
    auto e = take(key);
    if (!e) throw ValidationError(key, "required key is missing");
    return *e;
  };

  ScenarioConfig cfg;

  {
    const ConfigEntry e = require("scenario");
    auto s = scenario_from_name(e.value);
    if (!s) throw ValidationError("scenario", "unknown scenario '" + e.value + "'");
    cfg.scenario = *s;
  }

  // sweep first: it decides which model keys are required
  if (auto e = take("sweep_axis")) {
    static const std::map<std::string, SweepAxis> axes = {
        {"N", SweepAxis::n_spins},   {"kappa", SweepAxis::kappa},
        {"delta", SweepAxis::delta}, {"omega", SweepAxis::omega},
        {"gamma", SweepAxis::gamma}, {"eps_sb", SweepAxis::eps_sb},
        {"h_ext", SweepAxis::h_ext}, {"temperature", SweepAxis::temperature}};
    auto it = axes.find(e->value);
    if (it == axes.end())
      throw ValidationError("sweep_axis", "unknown axis '" + e->value + "'");
    cfg.sweep_axis = it->second;
    cfg.sweep_grid = detail::parse_grid("sweep_grid", require("sweep_grid"));
  } else if (take("sweep_grid")) {
    throw ValidationError("sweep_grid", "given without sweep_axis");
  }

  auto swept = [&](SweepAxis axis) { return cfg.sweep_axis == axis; };
  auto model_real = [&](const char* key, SweepAxis axis, double* dst,
                        std::optional<double> fallback) {
    auto e = take(key);
    if (swept(axis)) {
      if (e)
        throw ValidationError(key, "is the sweep axis; remove the scalar key");
      return;
    }
    if (e)
      *dst = detail::parse_real(key, *e);
    else if (fallback)
      *dst = *fallback;
    else
      throw ValidationError(key, "required key is missing");
  };

  if (swept(SweepAxis::n_spins)) {
    if (take("N")) throw ValidationError("N", "is the sweep axis; remove the scalar key");
    cfg.model.n_spins = 0;  // filled per sweep point
  } else {
    cfg.model.n_spins = static_cast<int>(detail::parse_int("N", require("N")));
  }
  model_real("kappa", SweepAxis::kappa, &cfg.model.kappa, std::nullopt);
  model_real("delta", SweepAxis::delta, &cfg.model.delta, std::nullopt);
  model_real("omega", SweepAxis::omega, &cfg.model.omega, 1.0);
  model_real("gamma", SweepAxis::gamma, &cfg.model.gamma, 1.0);
  model_real("eps_sb", SweepAxis::eps_sb, &cfg.model.eps_sb, 1e-3);
  model_real("h_ext", SweepAxis::h_ext, &cfg.model.h_ext, 0.0);
  cfg.model.seed = detail::parse_seed("seed", require("seed"));
  if (auto e = take("isotropic_omega"))
    cfg.model.isotropic_omega = detail::parse_bool("isotropic_omega", *e);

  if (auto e = take("ensemble")) cfg.ensemble = static_cast<int>(detail::parse_int("ensemble", *e));
  if (auto e = take("dt_sample")) cfg.dt_sample = detail::parse_real("dt_sample", *e);
  if (auto e = take("t_max")) cfg.t_max = detail::parse_real("t_max", *e);
  if (auto e = take("window_start")) cfg.window_start = detail::parse_real("window_start", *e);
  if (auto e = take("window_end")) cfg.window_end = detail::parse_real("window_end", *e);
  if (auto e = take("output_dir")) cfg.output_dir = e->value;
  if (auto e = take("samples")) cfg.samples = static_cast<int>(detail::parse_int("samples", *e));
  if (auto e = take("scan_omega_min")) cfg.scan_omega_min = detail::parse_real("scan_omega_min", *e);
  if (auto e = take("scan_omega_max")) cfg.scan_omega_max = detail::parse_real("scan_omega_max", *e);
  if (auto e = take("scan_delta_min")) cfg.scan_delta_min = detail::parse_real("scan_delta_min", *e);
  if (auto e = take("scan_delta_max")) cfg.scan_delta_max = detail::parse_real("scan_delta_max", *e);
  if (auto e = take("k_lowest")) cfg.k_lowest = static_cast<int>(detail::parse_int("k_lowest", *e));
  if (auto e = take("bins")) cfg.bins = static_cast<int>(detail::parse_int("bins", *e));
  if (auto e = take("window_fraction")) cfg.window_fraction = detail::parse_real("window_fraction", *e);
  if (auto e = take("sectored")) cfg.sectored = detail::parse_bool("sectored", *e);
  if (auto e = take("temperatures")) cfg.temperatures = detail::parse_grid("temperatures", *e);

  validate_config(cfg);
  return cfg;
}

inline void validate_config(const ScenarioConfig& cfg) {
  const bool sweep_n = cfg.sweep_axis == SweepAxis::n_spins;
  if (!sweep_n) {
    if (cfg.model.n_spins < 1) throw ValidationError("N", "must be >= 1");
    if (cfg.model.n_spins > kMaxSpins)
      throw CapacityError("N " + std::to_string(cfg.model.n_spins) +
                          " exceeds dense-diagonalization cap " +
                          std::to_string(kMaxSpins));
  }
  const bool sweep_kappa = cfg.sweep_axis == SweepAxis::kappa;
  if (!sweep_kappa && !(cfg.model.kappa >= 0.0 && cfg.model.kappa <= 1.0))
    throw ValidationError("kappa", "must lie in [0, 1]");
  if (cfg.sweep_axis != SweepAxis::delta && cfg.model.delta < 0.0)
    throw ValidationError("delta", "must be >= 0");
  if (cfg.sweep_axis != SweepAxis::omega && cfg.model.omega < 0.0)
    throw ValidationError("omega", "must be >= 0");

  if (cfg.sweep_axis != SweepAxis::none) {
    if (cfg.sweep_grid.empty())
      throw ValidationError("sweep_grid", "must not be empty");
    for (double v : cfg.sweep_grid) {
      switch (cfg.sweep_axis) {
        case SweepAxis::n_spins:
          if (v < 1 || v != std::floor(v))
            throw ValidationError("sweep_grid", "N values must be positive integers");
          if (v > kMaxSpins)
            throw CapacityError("sweep_grid N value exceeds cap " +
                                std::to_string(kMaxSpins));
          break;
        case SweepAxis::kappa:
          if (!(v >= 0.0 && v <= 1.0))
            throw ValidationError("sweep_grid", "kappa values must lie in [0, 1]");
          break;
        case SweepAxis::delta:
        case SweepAxis::omega:
          if (v < 0.0)
            throw ValidationError("sweep_grid", "width values must be >= 0");
          break;
        case SweepAxis::temperature:
          if (v <= 0.0)
            throw ValidationError("sweep_grid", "temperatures must be > 0");
          break;
        default:
          break;
      }
    }
    if (cfg.sweep_axis == SweepAxis::temperature &&
        cfg.scenario != Scenario::thermal)
      throw ValidationError("sweep_axis",
                            "temperature sweeps apply to the thermal scenario only");
  }

  if (cfg.scenario == Scenario::eigenflow) {
    if (cfg.sweep_axis != SweepAxis::delta)
      throw ValidationError("sweep_axis", "eigenflow requires sweep_axis = delta");
    if (cfg.k_lowest < 1) throw ValidationError("k_lowest", "must be >= 1");
  }
  if (cfg.scenario == Scenario::correlation_scan) {
    if (cfg.samples < 2) throw ValidationError("samples", "must be >= 2");
    if (cfg.ensemble != 1)
      throw ValidationError("ensemble",
                            "correlation-scan draws its own samples; set ensemble = 1");
    if (cfg.sweep_axis != SweepAxis::none)
      throw ValidationError("sweep_axis",
                            "correlation-scan draws widths at random; it does not sweep");
    if (!(cfg.scan_omega_max >= cfg.scan_omega_min) || cfg.scan_omega_min < 0.0)
      throw ValidationError("scan_omega_max", "scan range is empty or negative");
    if (!(cfg.scan_delta_max >= cfg.scan_delta_min) || cfg.scan_delta_min < 0.0)
      throw ValidationError("scan_delta_max", "scan range is empty or negative");
  }
  if (cfg.scenario == Scenario::overlap_vs_kappa &&
      cfg.sweep_axis != SweepAxis::kappa)
    throw ValidationError("sweep_axis",
                          "overlap-vs-kappa requires sweep_axis = kappa");
  if (cfg.scenario == Scenario::overlap_vs_delta &&
      cfg.sweep_axis != SweepAxis::delta)
    throw ValidationError("sweep_axis",
                          "overlap-vs-delta requires sweep_axis = delta");
  if (cfg.scenario == Scenario::field_sweep &&
      cfg.sweep_axis != SweepAxis::h_ext)
    throw ValidationError("sweep_axis",
                          "field-sweep requires sweep_axis = h_ext");
  if (cfg.scenario == Scenario::spacing) {
    auto enough_levels = [&](int n) {
      const double dim = std::ldexp(1.0, n);
      return std::floor(cfg.window_fraction * dim + 1e-9) >= 50.0;
    };
    if (sweep_n) {
      for (double v : cfg.sweep_grid)
        if (!enough_levels(static_cast<int>(v)))
          throw ValidationError(
              "sweep_grid", "spacing needs >= 50 levels inside the window");
    } else if (!enough_levels(cfg.model.n_spins)) {
      throw ValidationError("N",
                            "spacing needs >= 50 levels inside the window");
    }
  }

  if (cfg.ensemble < 1) throw ValidationError("ensemble", "must be >= 1");
  if (cfg.dt_sample <= 0.0) throw ValidationError("dt_sample", "must be > 0");
  if (cfg.t_max <= 0.0) throw ValidationError("t_max", "must be > 0");
  if (!(cfg.window_end > cfg.window_start))
    throw ValidationError("window_end", "window must have positive length");
  if (cfg.window_start < 0.0 || cfg.window_end > cfg.t_max + 1e-9)
    throw ValidationError("window_start", "window must lie within [0, t_max]");
  if (!(cfg.window_fraction > 0.0 && cfg.window_fraction <= 1.0))
    throw ValidationError("window_fraction", "must lie in (0, 1]");
  if (cfg.bins < 1) throw ValidationError("bins", "must be >= 1");
  for (double t : cfg.temperatures)
    if (t <= 0.0) throw ValidationError("temperatures", "must all be > 0");
  if (cfg.output_dir.empty()) throw ValidationError("output_dir", "must not be empty");
}

// Canonical echo of an effective config: sorted `key = value` lines,
// defaults filled in, the swept scalar omitted.  This is what lands in
// the manifest and what the config hash covers.
inline std::string canonical_echo(const ScenarioConfig& cfg) {
  std::map<std::string, std::string> kv;
  kv["scenario"] = scenario_name(cfg.scenario);
  if (cfg.sweep_axis != SweepAxis::n_spins)
    kv["N"] = std::to_string(cfg.model.n_spins);
  if (cfg.sweep_axis != SweepAxis::kappa) kv["kappa"] = fmt17(cfg.model.kappa);
  if (cfg.sweep_axis != SweepAxis::delta) kv["delta"] = fmt17(cfg.model.delta);
  if (cfg.sweep_axis != SweepAxis::omega) kv["omega"] = fmt17(cfg.model.omega);
  if (cfg.sweep_axis != SweepAxis::gamma) kv["gamma"] = fmt17(cfg.model.gamma);
  if (cfg.sweep_axis != SweepAxis::eps_sb) kv["eps_sb"] = fmt17(cfg.model.eps_sb);
  if (cfg.sweep_axis != SweepAxis::h_ext) kv["h_ext"] = fmt17(cfg.model.h_ext);
  kv["seed"] = std::to_string(cfg.model.seed);
  kv["isotropic_omega"] = cfg.model.isotropic_omega ? "true" : "false";
  if (cfg.sweep_axis != SweepAxis::none) {
    kv["sweep_axis"] = sweep_axis_name(cfg.sweep_axis);
    std::string grid;
    for (std::size_t k = 0; k < cfg.sweep_grid.size(); ++k) {
      if (k) grid += ' ';
      grid += fmt17(cfg.sweep_grid[k]);
    }
    kv["sweep_grid"] = grid;
  }
  kv["ensemble"] = std::to_string(cfg.ensemble);
  kv["dt_sample"] = fmt17(cfg.dt_sample);
  kv["t_max"] = fmt17(cfg.t_max);
  kv["window_start"] = fmt17(cfg.window_start);
  kv["window_end"] = fmt17(cfg.window_end);
  kv["output_dir"] = cfg.output_dir;
  if (cfg.scenario == Scenario::correlation_scan) {
    kv["samples"] = std::to_string(cfg.samples);
    kv["scan_omega_min"] = fmt17(cfg.scan_omega_min);
    kv["scan_omega_max"] = fmt17(cfg.scan_omega_max);
    kv["scan_delta_min"] = fmt17(cfg.scan_delta_min);
    kv["scan_delta_max"] = fmt17(cfg.scan_delta_max);
  }
  if (cfg.scenario == Scenario::eigenflow)
    kv["k_lowest"] = std::to_string(cfg.k_lowest);
  if (cfg.scenario == Scenario::spacing) {
    kv["bins"] = std::to_string(cfg.bins);
    kv["window_fraction"] = fmt17(cfg.window_fraction);
    kv["sectored"] = cfg.sectored ? "true" : "false";
  }
  if (cfg.scenario == Scenario::thermal &&
      cfg.sweep_axis != SweepAxis::temperature) {
    std::string ts;
    for (std::size_t k = 0; k < cfg.temperatures.size(); ++k) {
      if (k) ts += ' ';
      ts += fmt17(cfg.temperatures[k]);
    }
    kv["temperatures"] = ts;
  }
  std::string echo;
  for (const auto& [key, value] : kv) echo += key + " = " + value + "\n";
  return echo;
}

inline std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace spinbath
