#pragma once

// Task dispatch for the command-line front end. Every task writes one CSV
// table and a JSON sidecar (`<csv>.json`) holding the resolved configuration.

#include <json.hpp>

#include <fstream>
#include <string>
#include <vector>

#include "billiard/config.hpp"
#include "billiard/csv.hpp"
#include "billiard/domain.hpp"
#include "billiard/oracle.hpp"
#include "billiard/pantograph.hpp"
#include "billiard/perturbation.hpp"
#include "billiard/specfun.hpp"
#include "billiard/validation.hpp"

namespace billiard {

inline nlohmann::ordered_json config_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["task"] = to_string(c.task);
  j["preset"] = c.preset;
  j["mu"] = c.mu;
  j["hbar"] = c.hbar;
  j["kappa"] = c.kappa;
  j["gamma"] = c.gamma;
  j["epsilon"] = c.epsilon;
  j["r0"] = c.r0;
  j["m_max"] = c.m_max;
  j["n_max"] = c.n_max;
  j["nr"] = c.nr;
  j["ntheta"] = c.ntheta;
  j["dt"] = c.dt;
  j["t_end"] = c.t_end;
  j["n_samples"] = c.n_samples;
  j["initial"] = {c.initial.m, c.initial.n};
  auto targets = nlohmann::ordered_json::array();
  for (const auto& t : c.targets) targets.push_back({t.m, t.n});
  j["targets"] = targets;
  j["element_form"] = c.element_form;
  j["seed"] = c.seed;
  return j;
}

struct RunResult {
  std::string csv_path;
  std::string json_path;
  std::size_t rows = 0;
  /// False when a validation criterion failed.
  bool all_passed = true;
};

namespace detail {

inline std::string mode_label(const char* prefix, const ModeIndex& m) {
  return std::string(prefix) + "(" + std::to_string(m.m) + "," + std::to_string(m.n) + ")";
}

// Reported time: units of 1/kappa when kappa > 0.
inline double report_time(const RunConfig& c, double t) { return c.kappa > 0.0 ? t * c.kappa : t; }

inline CsvTable run_modes(const RunConfig& c) {
  const auto set = make_mode_set(c.m_max, c.n_max, c.domain());
  CsvTable csv({"m", "n", "zero", "k", "E", "A"});
  for (const auto& md : set.modes)
    csv.add_row({std::to_string(md.m), std::to_string(md.n), csv_number(md.zero), csv_number(md.k),
                 csv_number(md.energy), csv_number(md.norm)});
  return csv;
}

inline CsvTable run_pantograph(const RunConfig& c) {
  auto spec = c.domain();
  spec.epsilon = 0.0;
  const auto mode = mode_make(c.initial.m, c.initial.n, spec);
  const auto state = PantographicState::single(mode);
  const auto times = uniform_times(c.t_end, c.n_samples);
  const PolarGrid grid(c.nr, c.ntheta, spec.r0);
  auto psi = sample_grid(grid, [&](double r, double th) { return phi_exact(mode, spec, r, th, 0.0); });
  const auto boundary = pantographic_boundary(spec);
  CsvTable csv({"t", "R", "alpha", "beta", "energy", "energy_rate", "cn_fidelity"});
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    if (i > 0) psi = propagate(boundary, spec, std::move(psi), t, c.dt);
    const auto ex = sample_grid(grid, [&](double r, double th) { return phi_exact(mode, spec, r, th, t); }, t);
    csv.add_numbers({report_time(c, t), spec.lambda(t), alpha(spec, t), beta(mode, spec, t),
                     mean_energy(state, spec, t), energy_rate(state, spec, t), fidelity(ex, psi)});
  }
  return csv;
}

inline CsvTable run_populations(const RunConfig& c, nlohmann::ordered_json& extra) {
  const auto spec = c.domain();
  check_star(spec, c.t_end);
  const auto init = mode_make(c.initial.m, c.initial.n, spec);
  std::vector<BesselMode> targets;
  std::vector<std::string> header{"t"};
  for (const auto& t : c.targets) {
    targets.push_back(mode_make(t.m, t.n, spec));
    header.push_back(mode_label("P", t));
  }
  const auto times = uniform_times(c.t_end, c.n_samples);
  AmplitudeOptions opt;
  opt.form = c.element_form == "as_printed" ? ElementForm::as_printed : ElementForm::derived;
  const auto table = amplitudes(init, targets, spec, times, opt);
  extra["max_leakage"] = table.max_leakage;
  extra["perturbative"] = table.perturbative;
  CsvTable csv(header);
  for (std::size_t it = 0; it < times.size(); ++it) {
    std::vector<double> row{report_time(c, times[it])};
    for (std::size_t k = 0; k < targets.size(); ++k) row.push_back(std::norm(table.amplitudes[k][it]));
    csv.add_numbers(row);
  }
  return csv;
}

inline CsvTable run_energy_rate(const RunConfig& c) {
  auto spec = c.domain();
  spec.epsilon = 0.0;
  const auto state = PantographicState::single(mode_make(c.initial.m, c.initial.n, spec));
  const auto times = uniform_times(c.t_end, c.n_samples);
  std::vector<double> energy;
  for (double t : times) energy.push_back(mean_energy(state, spec, t));
  const auto fd = fd_derivative(energy, times[1] - times[0]);
  CsvTable csv({"t", "energy", "rate_contact", "rate_fd"});
  for (std::size_t i = 0; i < times.size(); ++i)
    csv.add_numbers({report_time(c, times[i]), energy[i], energy_rate(state, spec, times[i]), fd[i]});
  return csv;
}

inline CsvTable run_validate(const RunConfig& c, const std::string& csv_path, bool& all_passed,
                             nlohmann::ordered_json& extra) {
  validation::SuiteOptions opt;
  opt.seed = c.seed;
  opt.fig1_csv = csv_path + ".fig1.csv";
  CsvTable csv({"criterion", "name", "passed", "seconds", "detail"});
  const auto results = validation::run_suite(validation::all_criteria(), opt, [](const validation::CriterionResult& r) {
    std::printf("%s\n", validation::format_result(r).c_str());
    std::fflush(stdout);
  });
  all_passed = true;
  for (const auto& r : results) {
    all_passed = all_passed && r.passed;
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.2f", r.seconds);
    csv.add_row({std::to_string(r.id), r.name, r.passed ? "true" : "false", secs, r.detail});
  }
  extra["fig1_table"] = opt.fig1_csv;
  extra["all_passed"] = all_passed;
  return csv;
}

}  // namespace detail

/// Default output file for a task.
inline std::string default_output(const RunConfig& c) { return to_string(c.task) + ".csv"; }

/// Executes the configured task and writes `csv_path` plus `csv_path + ".json"`.
inline RunResult run(const RunConfig& c, const std::string& csv_path) {
  RunResult res;
  res.csv_path = csv_path;
  res.json_path = csv_path + ".json";
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();
  CsvTable csv = [&] {
    switch (c.task) {
      case Task::modes: return detail::run_modes(c);
      case Task::pantograph: return detail::run_pantograph(c);
      case Task::populations: return detail::run_populations(c, extra);
      case Task::energy_rate: return detail::run_energy_rate(c);
      case Task::validate: return detail::run_validate(c, csv_path, res.all_passed, extra);
    }
    throw std::logic_error("unknown task");
  }();
  csv.write(csv_path);
  res.rows = csv.rows();

  nlohmann::ordered_json side;
  side["config"] = config_json(c);
  side["time_unit"] = c.kappa > 0.0 ? "1/kappa" : "raw";
  side["csv"] = csv_path;
  side["rows"] = res.rows;
  if (!extra.empty()) side["result"] = extra;
  std::ofstream f(res.json_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + res.json_path + "' for writing");
  f << side.dump(2) << '\n';
  return res;
}

}  // namespace billiard
