// billiard <task> --config <path> [--out <path>]

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "billiard/config.hpp"
#include "billiard/run.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read config '" + path + "'");
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

int report_error(const std::string& kind, const std::exception& e, const std::string& out, int line = 0,
                 const std::string& key = {}) {
  nlohmann::ordered_json j;
  j["status"] = "error";
  j["kind"] = kind;
  j["message"] = e.what();
  if (line > 0) j["line"] = line;
  if (!key.empty()) j["key"] = key;
  std::cerr << j.dump() << '\n';
  if (!out.empty()) {
    std::ofstream f(out + ".error.json", std::ios::binary);
    if (f) f << j.dump(2) << '\n';
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum particle in a dilating, deforming disk"};
  std::string task_name;
  std::string config_path;
  std::string out;
  app.add_option("task", task_name, "modes | pantograph | populations | energy-rate | validate")->required();
  app.add_option("--config", config_path, "run configuration (key = value lines)")->required();
  app.add_option("--out", out, "CSV output path (sidecar JSON written next to it)");
  CLI11_PARSE(app, argc, argv);

  billiard::RunConfig config;
  try {
    const auto task = billiard::parse_task(task_name);
    if (!task) throw std::invalid_argument("unknown task '" + task_name + "'");
    config = billiard::parse_config(read_file(config_path));
    config.task = *task;
    if (out.empty()) out = config.output.empty() ? billiard::default_output(config) : config.output;
  } catch (const billiard::ConfigError& e) {
    return report_error("config", e, out, e.line(), e.key());
  } catch (const std::exception& e) {
    return report_error("usage", e, out);
  }

  try {
    const auto res = billiard::run(config, out);
    std::cerr << "wrote " << res.csv_path << " (" << res.rows << " rows) and " << res.json_path << '\n';
    return res.all_passed ? 0 : 2;
  } catch (const billiard::DomainError& e) {
    return report_error("domain", e, out);
  } catch (const billiard::NumericalError& e) {
    return report_error("numerical", e, out);
  } catch (const std::exception& e) {
    return report_error("runtime", e, out);
  }
}
