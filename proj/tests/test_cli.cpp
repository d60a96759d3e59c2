#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fsv/config.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& scratch() {
  static const fs::path p = [] {
    const fs::path d = fs::temp_directory_path() / ("fsv_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string smoke_text() { return slurp(fs::path(FSV_CONFIG_DIR) / "smoke.conf"); }

std::string with_line(const std::string& text, const std::string& key, const std::string& line) {
  std::istringstream in(text);
  std::string out, l;
  while (std::getline(in, l)) {
    if (l.rfind(key + " =", 0) == 0) {
      if (!line.empty()) out += line + "\n";
      continue;
    }
    out += l + "\n";
  }
  return out;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / (name + ".conf");
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

struct RunResult {
  int code;
  std::string err;
};

RunResult run(const std::string& args) {
  const fs::path err = scratch() / "stderr.txt";
  const std::string cmd = std::string("\"") + FSVMV_PATH + "\" " + args + " >/dev/null 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

RunResult run_config(const std::string& sub, const fs::path& config, const fs::path& out,
                     const std::string& extra = "") {
  return run(sub + " --config \"" + config.string() + "\" --out \"" + out.string() + "\" " + extra);
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("usage and configuration errors exit 2") {
  const fs::path out = scratch() / "errors";
  const RunResult missing = run_config("riccati", write_config("missing", with_line(smoke_text(), "alpha", "")), out);
  CHECK(missing.code == 2);
  CHECK(missing.err.find("missing required field model.alpha") != std::string::npos);
  const RunResult unknown = run_config("riccati", write_config("unknown", smoke_text() + "foo = 1\n"), out);
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("experiment.foo") != std::string::npos);
  CHECK(run_config("riccati", scratch() / "nonexistent.conf", out).code == 2);
  CHECK(run("bogus").code == 2);
  CHECK(run("").code == 2);
  CHECK(run("riccati --nope").code == 2);
  CHECK(run("--help").code == 0);
}

TEST_CASE("numerical failures exit 3") {
  const RunResult r =
      run_config("riccati", write_config("k2", with_line(smoke_text(), "truncation_K", "truncation_K = 2")),
                 scratch() / "k2");
  CHECK(r.code == 3);
  CHECK(r.err.find("series unusable") != std::string::npos);
}

TEST_CASE("riccati without market price of risk writes zero psi") {
  const fs::path out = scratch() / "theta0";
  const fs::path cfg = write_config("theta0", with_line(smoke_text(), "theta", "theta = 0, 0"));
  REQUIRE(run_config("riccati", cfg, out).code == 0);
  const auto rows = read_csv(out / "riccati.csv");
  REQUIRE(rows.size() == 102);
  CHECK(rows[0] == std::vector<std::string>{"t", "psi_1", "psi_2"});
  for (std::size_t k = 1; k < rows.size(); ++k) {
    REQUIRE(rows[k].size() == 3);
    CHECK(std::stod(rows[k][1]) == 0.0);
    CHECK(std::stod(rows[k][2]) == 0.0);
  }
  CHECK(fs::exists(out / "manifest.json"));
}

TEST_CASE("stabilizer output layout and residuals") {
  const fs::path out = scratch() / "stab";
  REQUIRE(run_config("stabilizer", write_config("stab", smoke_text()), out).code == 0);
  const auto rows = read_csv(out / "stabilizer.csv");
  REQUIRE(rows.size() > 2);
  CHECK(rows[0] == std::vector<std::string>{"t", "sigma_1", "sigma_2", "residual_1", "residual_2"});
  for (std::size_t k = 1; k < rows.size(); ++k) {
    REQUIRE(rows[k].size() == 5);
    CHECK(std::stod(rows[k][1]) >= 0.0);
    CHECK(std::stod(rows[k][3]) <= 1e-3);
    CHECK(std::stod(rows[k][4]) <= 1e-3);
  }
}

TEST_CASE("reruns are byte identical and the seed changes the output") {
  const fs::path cfg = write_config("rerun", smoke_text());
  for (const std::string sub : {"simulate", "wealth"}) {
    const fs::path a = scratch() / (sub + "_a"), b = scratch() / (sub + "_b"), c = scratch() / (sub + "_c");
    REQUIRE(run_config(sub, cfg, a).code == 0);
    REQUIRE(run_config(sub, cfg, b).code == 0);
    REQUIRE(run_config(sub, cfg, c, "--seed 7").code == 0);
    const std::string file = sub == "simulate" ? "variance_stats.csv" : "wealth.csv";
    INFO(sub);
    CHECK(slurp(a / file) == slurp(b / file));
    CHECK(slurp(a / file) != slurp(c / file));
    const auto ma = nlohmann::json::parse(slurp(a / "manifest.json"));
    const auto mc = nlohmann::json::parse(slurp(c / "manifest.json"));
    CHECK(ma["subcommand"] == sub);
    CHECK(ma["mc"]["seed"] == 20250701);
    CHECK(mc["mc"]["seed"] == 7);
    CHECK(ma["input_hash"] == mc["input_hash"]);
  }
}

TEST_CASE("full run reports every criterion and its exit code agrees") {
  const fs::path out = scratch() / "full";
  const RunResult r = run_config("full", write_config("full", smoke_text()), out);
  const auto rows = read_csv(out / "acceptance.csv");
  REQUIRE(rows.size() == 10);
  CHECK(rows[0] == std::vector<std::string>{"criterion", "pass"});
  bool all = true;
  for (int k = 1; k <= 9; ++k) {
    REQUIRE(rows[k].size() == 2);
    CHECK(rows[k][0] == std::to_string(k));
    all = all && rows[k][1] == "1";
  }
  CHECK(r.code == (all ? 0 : 4));
  for (const char* f : {"stabilizer.csv", "riccati.csv", "variance_stats.csv", "wealth.csv", "strategy.csv",
                        "frontier_T1.csv", "laplace.csv", "manifest.json"})
    CHECK(fs::exists(out / f));
}

TEST_CASE("bundled example configurations parse") {
  for (const auto& e : fs::directory_iterator(FSV_CONFIG_DIR)) {
    if (e.path().extension() != ".conf") continue;
    INFO(e.path().filename().string());
    CHECK_NOTHROW(fsv::load_config(e.path()));
  }
  const fsv::ExperimentConfig file = fsv::load_config(fs::path(FSV_CONFIG_DIR) / "default.conf");
  const fsv::ExperimentConfig builtin = fsv::parse_config(fsv::default_config_text());
  CHECK(file.model.alpha == builtin.model.alpha);
  CHECK(file.model.rho == builtin.model.rho);
  CHECK(file.n == builtin.n);
  CHECK(file.M == builtin.M);
  CHECK(file.seed == builtin.seed);
  CHECK(file.frontier_T == builtin.frontier_T);
  CHECK(file.laplace_u == builtin.laplace_u);
}
