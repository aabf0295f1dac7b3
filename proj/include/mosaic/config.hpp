#pragma once

#include "mosaic/bath.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/model.hpp"
#include "mosaic/poly.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace mosaic {

// Flat dotted key-value run description. Parsing is strict: unknown keys,
// duplicate keys, and keys that do not apply to the chosen model kind are
// all rejected.
struct RunConfig {
  std::string name = "custom";
  ModelSpec model;
  SpectralDensityParams bath;

  struct Dynamics {
    double horizon = 50.0;
    double step = 1e-3;
    int decimation = 10;
  } dynamics;

  struct Analysis {
    enum class Initial { all, levels, vector };
    Initial initial = Initial::all;
    std::vector<int> levels;
    std::vector<Complex> state;  // explicit amplitude vector
    double tol_steady = 1e-10;
    double oracle_tol = 1e-6;
    double volterra_tol = 1e-5;
  } analysis;

  struct Sweep {
    std::string axis;  // "", "delta" or "sites"
    std::vector<double> values;
  } sweep;

  struct Output {
    std::string dir;
    bool plot_stub = false;
  } output;

  std::map<std::string, std::string> raw;  // effective keys, echoed verbatim
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

inline double parse_real(const std::string& key, const std::string& value) {
  if (value == "pi") return std::numbers::pi;
  if (value == "-pi") return -std::numbers::pi;
  try {
    size_t used = 0;
    const double x = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects a real number, got '" + value + "'");
  }
}

inline int parse_int(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const int x = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects an integer, got '" + value + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError("config: key '" + key + "' expects true|false, got '" + value + "'");
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

}  // namespace detail

// Canonical key order for serialization and manifests.
inline const std::vector<std::string>& config_schema() {
  static const std::vector<std::string> keys = {
      "model.kind",       "model.sites",     "model.kappa",      "model.a",
      "model.delta",      "model.phi",       "model.lambda",     "model.beta",
      "bath.eta",         "bath.omega_c",    "dynamics.horizon", "dynamics.step",
      "dynamics.decimation", "analysis.initial", "analysis.tol_steady",
      "analysis.oracle_tol", "analysis.volterra_tol", "sweep.axis", "sweep.values",
      "output.dir",       "output.plot_stub"};
  return keys;
}

// Builds the typed view from the raw key-value map. Model-kind conditional
// keys are checked here, once the kind is known.
inline void materialize(RunConfig& cfg) {
  const auto& schema = config_schema();
  for (const auto& [key, value] : cfg.raw) {
    if (std::find(schema.begin(), schema.end(), key) == schema.end())
      throw ConfigError("config: unknown key '" + key + "'");
    (void)value;
  }

  cfg.model = ModelSpec{};
  cfg.bath = SpectralDensityParams{};
  cfg.dynamics = RunConfig::Dynamics{};
  cfg.analysis = RunConfig::Analysis{};
  cfg.sweep = RunConfig::Sweep{};
  cfg.output = RunConfig::Output{};

  const auto get = [&](const char* key) -> const std::string* {
    const auto it = cfg.raw.find(key);
    return it == cfg.raw.end() ? nullptr : &it->second;
  };

  if (const auto* v = get("model.kind")) {
    if (*v == "mosaic") cfg.model.kind = ModelKind::mosaic;
    else if (*v == "aah") cfg.model.kind = ModelKind::aah;
    else if (*v == "gaah") cfg.model.kind = ModelKind::gaah;
    else throw ConfigError("config: model.kind must be mosaic|aah|gaah, got '" + *v + "'");
  }
  if (const auto* v = get("model.kappa")) {
    if (cfg.model.kind != ModelKind::mosaic)
      throw ConfigError("config: model.kappa only applies to the mosaic kind");
    cfg.model.cell = detail::parse_int("model.kappa", *v);
  }
  if (const auto* v = get("model.a")) {
    if (cfg.model.kind != ModelKind::gaah)
      throw ConfigError("config: model.a only applies to the gaah kind");
    cfg.model.gaah_a = detail::parse_real("model.a", *v);
  }
  if (const auto* v = get("model.sites")) cfg.model.sites = detail::parse_int("model.sites", *v);
  if (const auto* v = get("model.delta")) cfg.model.disorder = detail::parse_real("model.delta", *v);
  if (const auto* v = get("model.phi")) cfg.model.phase = detail::parse_real("model.phi", *v);
  if (const auto* v = get("model.lambda")) cfg.model.hopping = detail::parse_real("model.lambda", *v);
  if (const auto* v = get("model.beta")) {
    if (*v == "irrational") cfg.model.beta = golden_beta();
    else if (*v == "fibonacci") cfg.model.beta = fibonacci_beta(cfg.model.sites);
    else cfg.model.beta = detail::parse_real("model.beta", *v);
  }

  if (const auto* v = get("bath.eta")) cfg.bath.coupling = detail::parse_real("bath.eta", *v);
  if (const auto* v = get("bath.omega_c")) cfg.bath.width = detail::parse_real("bath.omega_c", *v);

  if (const auto* v = get("dynamics.horizon"))
    cfg.dynamics.horizon = detail::parse_real("dynamics.horizon", *v);
  if (const auto* v = get("dynamics.step"))
    cfg.dynamics.step = detail::parse_real("dynamics.step", *v);
  if (const auto* v = get("dynamics.decimation"))
    cfg.dynamics.decimation = detail::parse_int("dynamics.decimation", *v);

  if (const auto* v = get("analysis.initial")) {
    if (*v == "all") {
      cfg.analysis.initial = RunConfig::Analysis::Initial::all;
    } else if (v->rfind("levels:", 0) == 0) {
      cfg.analysis.initial = RunConfig::Analysis::Initial::levels;
      for (const std::string& item : detail::split(v->substr(7), ','))
        cfg.analysis.levels.push_back(detail::parse_int("analysis.initial", item));
      if (cfg.analysis.levels.empty())
        throw ConfigError("config: analysis.initial levels list is empty");
    } else if (v->rfind("vector:", 0) == 0) {
      cfg.analysis.initial = RunConfig::Analysis::Initial::vector;
      std::istringstream in(v->substr(7));
      Complex amp;
      char sep = ',';
      while (in >> amp) {
        cfg.analysis.state.push_back(amp);
        if (!(in >> sep)) break;
        if (sep != ',') throw ConfigError("config: analysis.initial vector needs ',' separators");
      }
      if (cfg.analysis.state.empty())
        throw ConfigError("config: analysis.initial vector is empty");
    } else {
      throw ConfigError("config: analysis.initial must be all | levels:... | vector:...");
    }
  }
  if (const auto* v = get("analysis.tol_steady"))
    cfg.analysis.tol_steady = detail::parse_real("analysis.tol_steady", *v);
  if (const auto* v = get("analysis.oracle_tol"))
    cfg.analysis.oracle_tol = detail::parse_real("analysis.oracle_tol", *v);
  if (const auto* v = get("analysis.volterra_tol"))
    cfg.analysis.volterra_tol = detail::parse_real("analysis.volterra_tol", *v);

  if (const auto* v = get("sweep.axis")) {
    if (*v != "delta" && *v != "sites")
      throw ConfigError("config: sweep.axis must be delta|sites, got '" + *v + "'");
    cfg.sweep.axis = *v;
  }
  if (const auto* v = get("sweep.values")) {
    for (const std::string& item : detail::split(*v, ','))
      if (!item.empty()) cfg.sweep.values.push_back(detail::parse_real("sweep.values", item));
  }

  if (const auto* v = get("output.dir")) cfg.output.dir = *v;
  if (const auto* v = get("output.plot_stub"))
    cfg.output.plot_stub = detail::parse_bool("output.plot_stub", *v);

  try {
    cfg.model.validate();
    cfg.bath.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!(cfg.dynamics.step > 0.0) || !(cfg.dynamics.horizon > 0.0))
    throw ConfigError("config: dynamics.step and dynamics.horizon must be positive");
  if (cfg.dynamics.decimation < 1)
    throw ConfigError("config: dynamics.decimation must be >= 1");
  if (!(cfg.analysis.tol_steady > 0.0))
    throw ConfigError("config: analysis.tol_steady must be positive");
}

inline RunConfig parse_config_text(const std::string& text, std::string name = "custom") {
  RunConfig cfg;
  cfg.name = std::move(name);
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(line_no) + " is not 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config: line " + std::to_string(line_no) + " has an empty key or value");
    if (cfg.raw.count(key))
      throw ConfigError("config: duplicate key '" + key + "'");
    cfg.raw[key] = value;
  }
  materialize(cfg);
  return cfg;
}

// Applies one 'key=value' override and revalidates.
inline void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = detail::trim(assignment.substr(0, eq));
  const std::string value = detail::trim(assignment.substr(eq + 1));
  if (key.empty() || value.empty())
    throw ConfigError("override '" + assignment + "' has an empty key or value");
  cfg.raw[key] = value;
  materialize(cfg);
}

inline std::string serialize(const RunConfig& cfg) {
  std::string out;
  for (const std::string& key : config_schema()) {
    const auto it = cfg.raw.find(key);
    if (it != cfg.raw.end()) out += key + " = " + it->second + "\n";
  }
  return out;
}

// Canonical run descriptions shipped with the tool, named after the
// artifacts they reproduce.
inline const std::map<std::string, std::string>& bundled_configs() {
  static const std::map<std::string, std::string> configs = {
      {"table1_k2",
       "# mosaic ring, cell size 2: canonical pole-table configuration\n"
       "model.kind = mosaic\n"
       "model.sites = 12\n"
       "model.kappa = 2\n"
       "model.delta = 2.0\n"
       "model.phi = 0.0\n"
       "bath.eta = 0.1\n"
       "bath.omega_c = 1.0\n"
       "dynamics.horizon = 50.0\n"
       "dynamics.step = 1e-3\n"
       "dynamics.decimation = 10\n"},
      {"table1_k3",
       "# mosaic ring, cell size 3: canonical pole-table configuration\n"
       "model.kind = mosaic\n"
       "model.sites = 12\n"
       "model.kappa = 3\n"
       "model.delta = 2.0\n"
       "model.phi = 0.0\n"
       "bath.eta = 0.1\n"
       "bath.omega_c = 1.0\n"
       "dynamics.horizon = 50.0\n"
       "dynamics.step = 1e-3\n"
       "dynamics.decimation = 10\n"},
      {"tableA2_gaah",
       "# GAAH ring, a = +0.5: pole-table configuration\n"
       "model.kind = gaah\n"
       "model.sites = 8\n"
       "model.a = 0.5\n"
       "model.delta = 2.0\n"
       "model.phi = pi\n"
       "bath.eta = 0.1\n"
       "bath.omega_c = 1.0\n"
       "dynamics.horizon = 50.0\n"
       "dynamics.step = 1e-3\n"
       "dynamics.decimation = 10\n"},
      {"tableA2_gaah_neg",
       "# GAAH ring, a = -0.5: pole-table configuration\n"
       "model.kind = gaah\n"
       "model.sites = 8\n"
       "model.a = -0.5\n"
       "model.delta = 2.0\n"
       "model.phi = pi\n"
       "bath.eta = 0.1\n"
       "bath.omega_c = 1.0\n"
       "dynamics.horizon = 50.0\n"
       "dynamics.step = 1e-3\n"
       "dynamics.decimation = 10\n"},
      {"fig3_k2",
       "# IPR relaxation curves, mosaic cell size 2, all eigenlevel starts\n"
       "model.kind = mosaic\n"
       "model.sites = 12\n"
       "model.kappa = 2\n"
       "model.delta = 2.0\n"
       "model.phi = 0.0\n"
       "bath.eta = 0.1\n"
       "bath.omega_c = 1.0\n"
       "dynamics.horizon = 50.0\n"
       "dynamics.step = 1e-3\n"
       "dynamics.decimation = 10\n"
       "analysis.initial = all\n"},
      {"fig3_k3",
       "# IPR relaxation curves, mosaic cell size 3, all eigenlevel starts\n"
       "model.kind = mosaic\n"
       "model.sites = 12\n"
       "model.kappa = 3\n"
       "model.delta = 2.0\n"
       "model.phi = 0.0\n"
       "bath.eta = 0.1\n"
       "bath.omega_c = 1.0\n"
       "dynamics.horizon = 50.0\n"
       "dynamics.step = 1e-3\n"
       "dynamics.decimation = 10\n"
       "analysis.initial = all\n"},
      {"figA1",
       "# large-ring IPR spectrum, mosaic cell size 2\n"
       "model.kind = mosaic\n"
       "model.sites = 610\n"
       "model.kappa = 2\n"
       "model.delta = 2.0\n"
       "model.phi = 0.0\n"
       "bath.eta = 0.1\n"
       "bath.omega_c = 1.0\n"},
  };
  return configs;
}

// Resolves a bundled name first, then a filesystem path.
inline RunConfig load_config(const std::string& name_or_path) {
  const auto& bundled = bundled_configs();
  if (const auto it = bundled.find(name_or_path); it != bundled.end())
    return parse_config_text(it->second, name_or_path);
  std::ifstream in(name_or_path);
  if (!in) throw ConfigError("config: no bundled config or file named '" + name_or_path + "'");
  std::ostringstream body;
  body << in.rdbuf();
  std::string name = name_or_path;
  if (const auto slash = name.find_last_of("/\\"); slash != std::string::npos)
    name.erase(0, slash + 1);
  if (const auto dot = name.find_last_of('.'); dot != std::string::npos) name.erase(dot);
  return parse_config_text(body.str(), name);
}

}  // namespace mosaic
