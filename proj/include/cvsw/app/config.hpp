#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cvsw/error.hpp"
#include "cvsw/initial.hpp"
#include "cvsw/model.hpp"
#include "cvsw/timestepper.hpp"

namespace cvsw::app {

/// Every recognized key with its default, in canonical order.
inline const std::vector<std::pair<std::string, std::string>>& config_defaults() {
  static const std::vector<std::pair<std::string, std::string>> defaults{
      {"model.a", "2"},
      {"model.alpha", "0"},
      {"model.kappa", "1"},
      {"model.branch", "right"},
      {"grid.n", "256"},
      {"time.T", "1"},
      {"time.dt", "0.001"},
      {"time.method", "rk4"},
      {"time.dt_min", "1e-12"},
      {"time.abs_tol", "1e-8"},
      {"time.rel_tol", "1e-8"},
      {"time.max_ux", "1e6"},
      {"time.min_jacobian", "1e-3"},
      {"run.formulation", "eulerian"},
      {"run.rhs_form", "u"},
      {"run.track_flowmap", "false"},
      {"run.seed", "1"},
      {"initial.u", "cosine(mode=1, amplitude=0.01)"},
      {"initial.rho", "constant(value=0.01)"},
      {"output.dir", "out"},
      {"output.snapshot_every", "0.1"},
      {"output.plot", "false"},
      {"compare.threshold", "1e-6"},
      {"convergence.ladder", "temporal"},
      {"convergence.floor", "1e-12"},
  };
  return defaults;
}

/// Key/value pairs after defaults, file contents and overrides are merged.
using RawConfig = std::map<std::string, std::string>;

inline bool is_known_key(const std::string& key) {
  for (const auto& [k, v] : config_defaults()) {
    if (k == key) return true;
  }
  return false;
}

inline RawConfig default_raw_config() {
  RawConfig raw;
  for (const auto& [k, v] : config_defaults()) raw[k] = v;
  return raw;
}

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline double parse_plain_number(std::string_view s, const std::string& what) {
  const std::string t = trim(s);
  if (t == "pi") return std::numbers::pi;
  double v = 0.0;
  const auto* first = t.data();
  const auto* last = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (t.empty() || ec != std::errc() || ptr != last) throw ConfigError(what + ": cannot parse number '" + t + "'");
  return v;
}

}  // namespace detail

/// Real number, optionally a product/quotient with `pi`: "0.5", "-pi", "2*pi", "pi/4", "1.5e-3".
inline double parse_real(std::string_view text, const std::string& what) {
  std::string t = detail::trim(text);
  double sign = 1.0;
  if (!t.empty() && (t[0] == '-' || t[0] == '+')) {
    if (t[0] == '-') sign = -1.0;
    t = detail::trim(std::string_view(t).substr(1));
    if (!t.empty() && (t[0] == '-' || t[0] == '+')) throw ConfigError(what + ": malformed number '" + std::string(text) + "'");
  }
  double value = 1.0;
  char op = '*';
  std::size_t start = 0;
  for (std::size_t i = 0; i <= t.size(); ++i) {
    if (i == t.size() || t[i] == '*' || t[i] == '/') {
      const double f = detail::parse_plain_number(std::string_view(t).substr(start, i - start), what);
      value = op == '*' ? value * f : value / f;
      if (i < t.size()) op = t[i];
      start = i + 1;
    }
  }
  if (!std::isfinite(value)) throw ConfigError(what + ": value '" + std::string(text) + "' is not finite");
  return sign * value;
}

inline long long parse_integer(std::string_view text, const std::string& what) {
  const std::string t = detail::trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(what + ": expected an integer, got '" + t + "'");
  }
  return v;
}

inline bool parse_bool(std::string_view text, const std::string& what) {
  const std::string t = detail::trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(what + ": expected true/false, got '" + t + "'");
}

/**
 * @brief Parse an initial-condition descriptor: terms joined by '+', each
 * `name(key=value, ...)`.
 *
 *   gaussian(center=pi, width=0.5, amplitude=1)
 *   cosine(mode=1, amplitude=1, phase=0)
 *   constant(value=0)
 *   samples(file=path)          one value per grid node, whitespace/comma separated
 *   random(kmax=8, amplitude=0.1[, seed=N])   seed defaults to run.seed
 *
 * Relative sample paths resolve against `base_dir`.
 */
inline InitialCondition parse_initial(std::string_view text, const std::string& what, std::uint64_t default_seed,
                                      const std::filesystem::path& base_dir = {}) {
  InitialCondition ic;
  const std::string s = detail::trim(text);
  if (s.empty() || s == "0" || s == "zero") return ic;

  std::vector<std::string> terms;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i < s.size() && s[i] == '(') ++depth;
    if (i < s.size() && s[i] == ')') --depth;
    if (depth < 0) throw ConfigError(what + ": unbalanced ')'");
    if (i == s.size() || (s[i] == '+' && depth == 0)) {
      terms.push_back(detail::trim(std::string_view(s).substr(start, i - start)));
      start = i + 1;
    }
  }
  if (depth != 0) throw ConfigError(what + ": unbalanced '('");

  for (const std::string& term : terms) {
    const auto open = term.find('(');
    if (open == std::string::npos || term.back() != ')') {
      throw ConfigError(what + ": term '" + term + "' is not of the form name(key=value, ...)");
    }
    const std::string name = detail::trim(std::string_view(term).substr(0, open));
    const std::string body = term.substr(open + 1, term.size() - open - 2);
    std::map<std::string, std::string> args;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (detail::trim(item).empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ConfigError(what + ": argument '" + detail::trim(item) + "' lacks '='");
      args[detail::trim(std::string_view(item).substr(0, eq))] = detail::trim(std::string_view(item).substr(eq + 1));
    }
    const std::string where = what + " " + name;
    auto take = [&](const std::string& key) -> std::optional<std::string> {
      auto it = args.find(key);
      if (it == args.end()) return std::nullopt;
      std::string v = it->second;
      args.erase(it);
      return v;
    };
    auto real = [&](const std::string& key, double def) {
      auto v = take(key);
      return v ? parse_real(*v, where + "." + key) : def;
    };

    if (name == "gaussian") {
      GaussianBump g;
      g.center = real("center", g.center);
      g.width = real("width", g.width);
      g.amplitude = real("amplitude", g.amplitude);
      ic.terms.emplace_back(g);
    } else if (name == "cosine") {
      Cosine c;
      if (auto v = take("mode")) c.mode = static_cast<int>(parse_integer(*v, where + ".mode"));
      c.amplitude = real("amplitude", c.amplitude);
      c.phase = real("phase", c.phase);
      ic.terms.emplace_back(c);
    } else if (name == "constant") {
      ic.terms.emplace_back(Constant{real("value", 0.0)});
    } else if (name == "samples") {
      auto file = take("file");
      if (!file) throw ConfigError(where + ": missing file=");
      std::filesystem::path path(*file);
      if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
      std::ifstream in(path);
      if (!in) throw ConfigError(where + ": cannot open '" + path.string() + "'");
      CustomSamples cs;
      std::string tok;
      while (in >> tok) {
        std::stringstream parts(tok);
        std::string p;
        while (std::getline(parts, p, ',')) {
          if (!p.empty()) cs.values.push_back(parse_real(p, where));
        }
      }
      ic.terms.emplace_back(std::move(cs));
    } else if (name == "random") {
      RandomModes r;
      r.seed = default_seed;
      if (auto v = take("kmax")) r.kmax = static_cast<int>(parse_integer(*v, where + ".kmax"));
      r.amplitude = real("amplitude", r.amplitude);
      if (auto v = take("seed")) r.seed = static_cast<std::uint64_t>(parse_integer(*v, where + ".seed"));
      ic.terms.emplace_back(r);
    } else {
      throw ConfigError(what + ": unknown term '" + name + "' (expected gaussian, cosine, constant, samples, random)");
    }
    if (!args.empty()) throw ConfigError(where + ": unknown argument '" + args.begin()->first + "'");
  }
  return ic;
}

/// Typed run configuration.
struct RunConfig {
  ModelParams params;
  Branch branch = Branch::right;
  std::size_t grid_n = 256;
  double T = 1.0;
  StepControl control;
  Formulation formulation = Formulation::eulerian;
  RhsForm rhs_form = RhsForm::u_form;
  bool track_flowmap = false;
  std::uint64_t seed = 1;
  std::string initial_u;
  std::string initial_rho;
  std::filesystem::path base_dir;  ///< directory of the config file, for relative sample paths
  double snapshot_every = 0.1;
  std::filesystem::path output_dir = "out";
  bool plot = false;
  double compare_threshold = 1e-6;
  std::string ladder = "temporal";
  double convergence_floor = 1e-12;
  RawConfig raw;  ///< merged key/value echo

  RunOptions run_options() const {
    RunOptions o;
    o.formulation = formulation;
    o.rhs_form = rhs_form;
    o.track_flowmap = track_flowmap;
    return o;
  }

  /// Initial Eulerian state on an n-point grid (grid_n by default).
  EulerianState initial_state(std::size_t n = 0) const {
    const SpectralGrid g(n == 0 ? grid_n : n);
    const Field u = initial_condition(parse_initial(initial_u, "initial.u", seed, base_dir), g);
    const Field rho = initial_condition(parse_initial(initial_rho, "initial.rho", seed, base_dir), g);
    return EulerianState::from_velocity(u, rho, params.alpha);
  }
};

/// Build and validate the typed configuration from merged key/value pairs.
inline RunConfig build_config(const RawConfig& raw, const std::filesystem::path& base_dir = {}) {
  for (const auto& [k, v] : raw) {
    if (!is_known_key(k)) throw ConfigError("unknown key '" + k + "'");
  }
  auto get = [&raw](const std::string& k) -> const std::string& { return raw.at(k); };
  auto wrap = [](const std::string& key, auto&& fn) {
    try {
      return fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(key + ": " + e.what());
    }
  };

  RunConfig c;
  c.raw = raw;
  c.base_dir = base_dir;
  const double a = parse_real(get("model.a"), "model.a");
  const double alpha = parse_real(get("model.alpha"), "model.alpha");
  const double kappa = parse_real(get("model.kappa"), "model.kappa");
  c.params = wrap("model", [&] { return ModelParams(a, alpha, kappa); });
  c.branch = wrap("model.branch", [&] { return parse_branch(detail::trim(get("model.branch"))); });

  const long long n = parse_integer(get("grid.n"), "grid.n");
  if (n < 8 || n % 2 != 0) throw ConfigError("grid.n: must be an even integer >= 8, got " + std::to_string(n));
  c.grid_n = static_cast<std::size_t>(n);

  c.T = parse_real(get("time.T"), "time.T");
  if (!(c.T > 0.0)) throw ConfigError("time.T: must be positive");
  c.control.dt = parse_real(get("time.dt"), "time.dt");
  c.control.method = wrap("time.method", [&] { return parse_step_method(detail::trim(get("time.method"))); });
  c.control.dt_min = parse_real(get("time.dt_min"), "time.dt_min");
  c.control.abs_tol = parse_real(get("time.abs_tol"), "time.abs_tol");
  c.control.rel_tol = parse_real(get("time.rel_tol"), "time.rel_tol");
  c.control.max_ux = parse_real(get("time.max_ux"), "time.max_ux");
  c.control.min_jacobian = parse_real(get("time.min_jacobian"), "time.min_jacobian");
  wrap("time", [&] {
    c.control.validate();
    return 0;
  });

  c.formulation = wrap("run.formulation", [&] { return parse_formulation(detail::trim(get("run.formulation"))); });
  c.rhs_form = wrap("run.rhs_form", [&] { return parse_rhs_form(detail::trim(get("run.rhs_form"))); });
  c.track_flowmap = parse_bool(get("run.track_flowmap"), "run.track_flowmap");
  const long long seed = parse_integer(get("run.seed"), "run.seed");
  if (seed < 0) throw ConfigError("run.seed: must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);

  c.initial_u = get("initial.u");
  c.initial_rho = get("initial.rho");
  // Parse and evaluate once so descriptor errors surface at load time.
  wrap("initial", [&] {
    c.initial_state();
    return 0;
  });

  c.output_dir = get("output.dir");
  c.snapshot_every = parse_real(get("output.snapshot_every"), "output.snapshot_every");
  if (!(c.snapshot_every >= 0.0)) throw ConfigError("output.snapshot_every: must be non-negative");
  c.plot = parse_bool(get("output.plot"), "output.plot");
  c.compare_threshold = parse_real(get("compare.threshold"), "compare.threshold");
  if (!(c.compare_threshold > 0.0)) throw ConfigError("compare.threshold: must be positive");
  c.ladder = detail::trim(get("convergence.ladder"));
  if (c.ladder != "spatial" && c.ladder != "temporal") {
    throw ConfigError("convergence.ladder: must be 'spatial' or 'temporal', got '" + c.ladder + "'");
  }
  c.convergence_floor = parse_real(get("convergence.floor"), "convergence.floor");
  return c;
}

/**
 * @brief Parse the flat text format into `raw`:
 *
 *   # comment
 *   model.a = 2
 *   [time]          section header: following bare keys are prefixed "time."
 *   dt = 1e-3
 *
 * Errors carry "<source>:<line>:".
 */
inline void parse_config_text(std::string_view text, RawConfig& raw, const std::string& source) {
  std::string section;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno);
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(where + ": malformed section header '" + t + "'");
      section = detail::trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value', got '" + t + "'");
    std::string key = detail::trim(std::string_view(t).substr(0, eq));
    if (!section.empty() && key.find('.') == std::string::npos) key = section + "." + key;
    if (!is_known_key(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    raw[key] = detail::trim(std::string_view(t).substr(eq + 1));
  }
}

/// Merge a JSON object of key -> scalar; a run.json is accepted through its "config" member.
inline void parse_config_json(const nlohmann::json& j, RawConfig& raw, const std::string& source) {
  const nlohmann::json& obj = j.contains("config") ? j.at("config") : j;
  if (!obj.is_object()) throw ConfigError(source + ": expected a JSON object of configuration keys");
  for (const auto& [key, value] : obj.items()) {
    if (!is_known_key(key)) throw ConfigError(source + ": unknown key '" + key + "'");
    if (value.is_string()) {
      raw[key] = value.get<std::string>();
    } else if (value.is_boolean()) {
      raw[key] = value.get<bool>() ? "true" : "false";
    } else if (value.is_number()) {
      raw[key] = value.dump();
    } else {
      throw ConfigError(source + ": key '" + key + "' must be a scalar");
    }
  }
}

inline void load_config_file(const std::filesystem::path& path, RawConfig& raw) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  if (path.extension() == ".json") {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
    parse_config_json(j, raw, path.string());
  } else {
    parse_config_text(buf.str(), raw, path.string());
  }
}

/// Apply `--key=value` overrides.
inline void apply_overrides(const std::vector<std::string>& args, RawConfig& raw) {
  for (const std::string& arg : args) {
    if (arg.rfind("--", 0) != 0 || arg.find('=') == std::string::npos) {
      throw ConfigError("unrecognized argument '" + arg + "' (overrides take the form --key=value)");
    }
    const auto eq = arg.find('=');
    const std::string key = arg.substr(2, eq - 2);
    if (!is_known_key(key)) throw ConfigError("override: unknown key '" + key + "'");
    raw[key] = arg.substr(eq + 1);
  }
}

/// Defaults, then the optional file, then overrides.
inline RunConfig load_config(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides) {
  RawConfig raw = default_raw_config();
  std::filesystem::path base;
  if (file) {
    load_config_file(*file, raw);
    base = file->parent_path();
  }
  apply_overrides(overrides, raw);
  return build_config(raw, base);
}

/// Configuration echo as a JSON object of strings, in canonical key order.
inline nlohmann::ordered_json config_echo(const RawConfig& raw, bool include_output = true) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config_defaults()) {
    if (!include_output && k.rfind("output.", 0) == 0) continue;
    j[k] = raw.at(k);
  }
  return j;
}

}  // namespace cvsw::app
