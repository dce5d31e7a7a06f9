#pragma once

// Run configuration: line-oriented `key = value`, `#` starts a comment.

#include <algorithm>
#include <charconv>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "billiard/domain.hpp"

namespace billiard {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = 0, std::string key = {})
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line),
        key_(std::move(key)) {}
  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  int line_;
  std::string key_;
};

struct ModeIndex {
  int m = 0;
  int n = 1;
  bool operator==(const ModeIndex&) const = default;
};

enum class Task { modes, pantograph, populations, energy_rate, validate };

inline std::string to_string(Task t) {
  switch (t) {
    case Task::modes: return "modes";
    case Task::pantograph: return "pantograph";
    case Task::populations: return "populations";
    case Task::energy_rate: return "energy-rate";
    case Task::validate: return "validate";
  }
  return "?";
}

inline std::optional<Task> parse_task(std::string_view s) {
  if (s == "modes") return Task::modes;
  if (s == "pantograph") return Task::pantograph;
  if (s == "populations") return Task::populations;
  if (s == "energy-rate") return Task::energy_rate;
  if (s == "validate") return Task::validate;
  return std::nullopt;
}

struct RunConfig {
  // physics
  double mu = 1.0;
  double hbar = 1.0;
  double kappa = 0.1;
  double gamma = 0.5;  // 5 kappa unless given
  double epsilon = 0.05;
  double r0 = 1.0;
  // basis
  int m_max = 5;
  int n_max = 8;
  // grid
  int nr = 256;
  int ntheta = 64;
  double dt = 0.01;
  // schedule
  double t_end = 50.0;  // 5 / kappa unless given
  int n_samples = 201;
  // task
  Task task = Task::populations;
  std::string preset = "fig1";
  ModeIndex initial{0, 1};
  std::vector<ModeIndex> targets{{1, 1}, {1, 2}, {1, 3}, {1, 4}};
  std::string element_form = "derived";
  unsigned seed = 20240917u;
  std::string output;

  DomainSpec domain() const {
    DomainSpec s;
    s.mu = mu;
    s.hbar = hbar;
    s.r0 = r0;
    s.kappa = kappa;
    s.gamma = gamma;
    s.epsilon = epsilon;
    return s;
  }
};

/// Keys accepted in a configuration document.
inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{"mu",     "hbar",    "kappa",  "gamma",     "epsilon", "r0",
                                             "m_max",  "n_max",   "nr",     "ntheta",    "dt",      "t_end",
                                             "n_samples", "task", "preset", "initial",  "targets", "element_form",
                                             "seed",   "output"};
  return keys;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view v, int line, const std::string& key) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end) throw ConfigError(key + ": expected a number, got '" + std::string(v) + "'", line, key);
  return x;
}

inline long parse_long(std::string_view v, int line, const std::string& key) {
  long x = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end) throw ConfigError(key + ": expected an integer, got '" + std::string(v) + "'", line, key);
  return x;
}

inline int parse_int(std::string_view v, int line, const std::string& key) {
  const long x = parse_long(v, line, key);
  if (x < -1000000000L || x > 1000000000L) throw ConfigError(key + ": integer out of range", line, key);
  return static_cast<int>(x);
}

// "m n"
inline ModeIndex parse_mode(std::string_view v, int line, const std::string& key) {
  std::istringstream in{std::string(v)};
  std::string a, b, extra;
  if (!(in >> a >> b) || (in >> extra)) throw ConfigError(key + ": expected a mode as 'm n'", line, key);
  ModeIndex idx{parse_int(a, line, key), parse_int(b, line, key)};
  if (idx.n < 1) throw ConfigError(key + ": radial index n must be >= 1", line, key);
  return idx;
}

// "m n, m n, ..."
inline std::vector<ModeIndex> parse_modes(std::string_view v, int line, const std::string& key) {
  std::vector<ModeIndex> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const auto comma = v.find(',', start);
    const auto piece = trim(v.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (piece.empty()) throw ConfigError(key + ": empty entry in mode list", line, key);
    out.push_back(parse_mode(piece, line, key));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace detail

/// Parses and validates a configuration document. Omitted keys take the
/// defaults of the first figure: eps = 0.05, gamma = 5 kappa, hbar = mu = r0 = 1,
/// t_end = 5 / kappa, initial (0,1), targets (1,1)..(1,4).
inline RunConfig parse_config(std::string_view text) {
  struct Entry {
    std::string value;
    int line;
  };
  std::map<std::string, Entry> entries;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (!line.empty()) {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
      const std::string key(detail::trim(line.substr(0, eq)));
      const std::string value(detail::trim(line.substr(eq + 1)));
      if (key.empty()) throw ConfigError("missing key before '='", line_no);
      const auto& keys = config_keys();
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError("unknown key '" + key + "'", line_no, key);
      if (value.empty()) throw ConfigError(key + ": missing value", line_no, key);
      if (entries.count(key)) {
        throw ConfigError("duplicate key '" + key + "' (first set on line " + std::to_string(entries[key].line) + ")",
                          line_no, key);
      }
      entries[key] = {value, line_no};
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }

  RunConfig c;
  auto has = [&](const char* k) { return entries.count(k) != 0; };
  auto num = [&](const char* k, double& dst) {
    if (has(k)) dst = detail::parse_double(entries[k].value, entries[k].line, k);
  };
  auto integer = [&](const char* k, int& dst) {
    if (has(k)) dst = detail::parse_int(entries[k].value, entries[k].line, k);
  };

  if (has("preset")) {
    const auto& e = entries["preset"];
    c.preset = e.value;
    if (c.preset == "fig2") {
      c.initial = {2, 1};
      c.targets = {{3, 1}, {3, 2}, {1, 1}, {1, 2}};
    } else if (c.preset != "fig1") {
      throw ConfigError("preset: expected fig1 or fig2, got '" + e.value + "'", e.line, "preset");
    }
  }
  if (has("task")) {
    const auto& e = entries["task"];
    const auto t = parse_task(e.value);
    if (!t) throw ConfigError("task: expected modes, pantograph, populations, energy-rate or validate", e.line, "task");
    c.task = *t;
  }
  num("mu", c.mu);
  num("hbar", c.hbar);
  num("kappa", c.kappa);
  num("epsilon", c.epsilon);
  num("r0", c.r0);
  num("dt", c.dt);
  integer("m_max", c.m_max);
  integer("n_max", c.n_max);
  integer("nr", c.nr);
  integer("ntheta", c.ntheta);
  integer("n_samples", c.n_samples);
  if (has("initial")) c.initial = detail::parse_mode(entries["initial"].value, entries["initial"].line, "initial");
  if (has("targets")) c.targets = detail::parse_modes(entries["targets"].value, entries["targets"].line, "targets");
  if (has("output")) c.output = entries["output"].value;
  if (has("seed")) {
    const long s = detail::parse_long(entries["seed"].value, entries["seed"].line, "seed");
    if (s < 0 || s > 4294967295L) throw ConfigError("seed: must be in [0, 2^32)", entries["seed"].line, "seed");
    c.seed = static_cast<unsigned>(s);
  }
  if (has("element_form")) {
    const auto& e = entries["element_form"];
    if (e.value != "derived" && e.value != "as_printed")
      throw ConfigError("element_form: expected derived or as_printed", e.line, "element_form");
    c.element_form = e.value;
  }

  auto fail = [&](const char* key, const std::string& msg) {
    throw ConfigError(std::string(key) + ": " + msg, has(key) ? entries[key].line : 0, key);
  };
  if (!(c.mu > 0.0)) fail("mu", "must be positive");
  if (!(c.hbar > 0.0)) fail("hbar", "must be positive");
  if (!(c.r0 > 0.0)) fail("r0", "must be positive");
  if (!(c.kappa >= 0.0)) fail("kappa", "must be >= 0");
  if (!(c.epsilon >= 0.0)) fail("epsilon", "must be >= 0");
  if (has("gamma")) {
    num("gamma", c.gamma);
  } else {
    if (c.kappa == 0.0) fail("gamma", "must be given when kappa = 0");
    c.gamma = 5.0 * c.kappa;
  }
  if (!(c.gamma > 0.0)) fail("gamma", "must be positive");
  if (has("t_end")) {
    num("t_end", c.t_end);
  } else {
    if (c.kappa == 0.0) fail("t_end", "must be given when kappa = 0");
    c.t_end = 5.0 / c.kappa;
  }
  if (!(c.t_end > 0.0)) fail("t_end", "must be positive");
  if (c.t_end * c.kappa > 100.0) fail("t_end", "t_end * kappa exceeds 100");
  if (!(c.dt > 0.0)) fail("dt", "must be positive");
  if (c.m_max < 0) fail("m_max", "must be >= 0");
  if (c.n_max < 1) fail("n_max", "must be >= 1");
  if (c.nr < 16) fail("nr", "must be >= 16");
  if (c.ntheta < 16 || c.ntheta % 2 != 0) fail("ntheta", "must be even and >= 16");
  if (c.n_samples < 5) fail("n_samples", "must be >= 5");
  if (c.targets.empty()) fail("targets", "need at least one target mode");
  return c;
}

}  // namespace billiard
