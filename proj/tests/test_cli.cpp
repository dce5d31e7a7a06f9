#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path d = [] {
    auto p = fs::temp_directory_path() / ("billiard_cli_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path write_config(const std::string& name, const std::string& body) {
  const auto p = workdir() / name;
  std::ofstream(p, std::ios::binary) << body;
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BILLIARD_CLI) + " " + args + " 2>" + (workdir() / "stderr.txt").string();
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
    out.push_back(l);
  }
  return out;
}

const char* small_grid = "nr = 48\nntheta = 16\nn_samples = 11\nt_end = 5\n";

}  // namespace

TEST(Cli, ModesTableAndSidecar) {
  const auto cfg = write_config("modes.conf", "m_max = 2\nn_max = 2\n");
  const auto out = workdir() / "modes.csv";
  ASSERT_EQ(run_cli("modes --config " + cfg.string() + " --out " + out.string()), 0);
  const auto rows = lines(slurp(out));
  ASSERT_EQ(rows.size(), 11u);
  EXPECT_EQ(rows[0], "m,n,zero,k,E,A");
  const auto side = nlohmann::json::parse(slurp(out.string() + ".json"));
  EXPECT_EQ(side["rows"], 10);
  EXPECT_EQ(side["config"]["m_max"], 2);
}

TEST(Cli, ZeroEpsilonGivesZeroPopulations) {
  const auto cfg = write_config("zero.conf", std::string(small_grid) + "epsilon = 0\n");
  const auto out = workdir() / "zero.csv";
  ASSERT_EQ(run_cli("populations --config " + cfg.string() + " --out " + out.string()), 0);
  const auto rows = lines(slurp(out));
  ASSERT_EQ(rows.size(), 12u);
  EXPECT_EQ(rows[0].rfind("t,", 0), 0u);
  double last_t = -1.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::istringstream in(rows[i]);
    std::string field;
    std::getline(in, field, ',');
    const double t = std::stod(field);
    EXPECT_GT(t, last_t);
    last_t = t;
    while (std::getline(in, field, ',')) EXPECT_EQ(std::stod(field), 0.0) << rows[i];
  }
}

TEST(Cli, RunsAreByteIdentical) {
  const auto cfg = write_config("det.conf", small_grid);
  const auto a = workdir() / "det_a.csv", b = workdir() / "det_b.csv";
  ASSERT_EQ(run_cli("populations --config " + cfg.string() + " --out " + a.string()), 0);
  ASSERT_EQ(run_cli("populations --config " + cfg.string() + " --out " + b.string()), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  const std::string ja = slurp(a.string() + ".json"), jb = slurp(b.string() + ".json");
  EXPECT_EQ(nlohmann::json::parse(ja)["result"], nlohmann::json::parse(jb)["result"]);
}

TEST(Cli, BadConfigWritesErrorRecord) {
  const auto cfg = write_config("bad.conf", "kappa = 0.1\nepsilon = -0.1\n");
  const auto out = workdir() / "bad.csv";
  EXPECT_EQ(run_cli("populations --config " + cfg.string() + " --out " + out.string()), 1);
  const auto err = nlohmann::json::parse(slurp(out.string() + ".error.json"));
  EXPECT_EQ(err["status"], "error");
  EXPECT_EQ(err["kind"], "config");
  EXPECT_EQ(err["line"], 2);
  EXPECT_EQ(err["key"], "epsilon");
  EXPECT_FALSE(fs::exists(out));
  EXPECT_NE(slurp(workdir() / "stderr.txt").find("\"status\":\"error\""), std::string::npos);
}

TEST(Cli, UnknownTaskAndMissingConfig) {
  const auto cfg = write_config("ok.conf", "");
  EXPECT_EQ(run_cli("dance --config " + cfg.string() + " --out " + (workdir() / "x.csv").string()), 1);
  EXPECT_EQ(run_cli("modes --config " + (workdir() / "missing.conf").string() + " --out " +
                    (workdir() / "y.csv").string()),
            1);
  EXPECT_TRUE(fs::exists(workdir() / "y.csv.error.json"));
}

TEST(Cli, PantographTaskReportsFidelity) {
  const auto cfg = write_config("pan.conf", std::string(small_grid) + "epsilon = 0\n");
  const auto out = workdir() / "pan.csv";
  ASSERT_EQ(run_cli("pantograph --config " + cfg.string() + " --out " + out.string()), 0);
  const auto rows = lines(slurp(out));
  ASSERT_GE(rows.size(), 2u);
  EXPECT_EQ(rows[0], "t,R,alpha,beta,energy,energy_rate,cn_fidelity");
}
