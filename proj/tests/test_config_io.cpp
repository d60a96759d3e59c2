#include "doctest.h"

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "fsv/config.hpp"
#include "fsv/errors.hpp"
#include "fsv/io.hpp"
#include "fsv/model.hpp"
#include "fsv/simulate.hpp"

using namespace fsv;
namespace fs = std::filesystem;

namespace {

std::string replace_line(const std::string& text, const std::string& key, const std::string& line) {
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

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fsv_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("bundled configuration is the reference parameter table") {
  const ExperimentConfig cfg = parse_config(default_config_text());
  const MarketModel ref = reference_model();
  CHECK(cfg.model.d == ref.d);
  CHECK(cfg.model.alpha == ref.alpha);
  CHECK(cfg.model.lam == ref.lam);
  CHECK(cfg.model.nu == ref.nu);
  CHECK(cfg.model.rho == ref.rho);
  CHECK(cfg.model.theta == ref.theta);
  CHECK(cfg.model.mu0 == ref.mu0);
  CHECK(cfg.model.c == ref.c);
  CHECK(cfg.model.r == ref.r);
  CHECK(cfg.model.x0 == ref.x0);
  CHECK(cfg.model.T == ref.T);
  CHECK(cfg.n == 600);
  CHECK(cfg.M == 5000);
  CHECK(cfg.seed == 20250701u);
  CHECK(cfg.n_boot == 1000);
  CHECK(cfg.truncation_K == 60);
  CHECK(cfg.oracle_refinement == 8);
  CHECK(cfg.experiment == "full");
  CHECK(cfg.m == 2.255);
  CHECK(cfg.frontier_T == std::vector<double>{0.5, 1.0, 5.0});
  CHECK(cfg.frontier_points == 8);
  CHECK(cfg.laplace_u == std::vector<double>{-0.05, -0.05});
  CHECK(cfg.laplace_M == 20000);
  CHECK(cfg.stationarity_M == 10000);
  CHECK(cfg.source == default_config_text());
}

TEST_CASE("optional sections fall back to defaults") {
  const std::string minimal = R"([model]
d = 1
alpha = 0.7
lambda = 0.3
nu = 0.2
rho = -0.4
theta = 0.1
mu0 = 1.5
c = 0.02   ; trailing comment
r = 0.01   # another
x0 = 1

[grid]
T = 2
n = 100
)";
  const ExperimentConfig cfg = parse_config(minimal);
  CHECK(cfg.model.T == 2.0);
  CHECK(cfg.n == 100);
  CHECK(cfg.model.c == std::vector<double>{0.02});
  CHECK(cfg.M == 5000);
  CHECK(cfg.laplace_u == std::vector<double>{-0.05});
  CHECK(cfg.experiment == "full");
}

TEST_CASE("missing, unknown, duplicate and malformed entries are rejected with the field path") {
  const std::string base = default_config_text();
  CHECK(config_error(replace_line(base, "alpha", "")) == "missing required field model.alpha");
  CHECK(config_error(replace_line(base, "n", "")) == "missing required field grid.n");
  CHECK(config_error(replace_line(base, "r", "r = 0.02\nfoo = 1")) == "unknown key model.foo");
  CHECK(config_error(replace_line(base, "r", "r = 0.02\nr = 0.03")) == "duplicate key model.r");
  CHECK(config_error(replace_line(base, "r", "r = abc")).find("model.r") != std::string::npos);
  CHECK(config_error(replace_line(base, "r", "r = 0.02x")).find("model.r") != std::string::npos);
  CHECK(config_error(replace_line(base, "alpha", "alpha = 0.6,")).find("model.alpha") != std::string::npos);
  CHECK(config_error(replace_line(base, "alpha", "alpha = 0.4, 0.9")).find("model.alpha[0]") != std::string::npos);
  CHECK(config_error(replace_line(base, "alpha", "alpha = 0.6")).find("model.alpha") != std::string::npos);
  CHECK(config_error(replace_line(base, "rho", "rho = -1.5, 0")).find("model.rho[0]") != std::string::npos);
  CHECK(config_error(replace_line(base, "laplace_u", "laplace_u = 0.1, 0")).find("experiment.laplace_u") !=
        std::string::npos);
  CHECK(config_error(replace_line(base, "name", "name = bogus")).find("experiment.name") != std::string::npos);
  CHECK(config_error(replace_line(base, "n", "n = 0")).find("grid.n") != std::string::npos);
  CHECK(config_error("[model\nd = 2\n").find("section header") != std::string::npos);
  CHECK(config_error("d = 2\n").find("outside a section") != std::string::npos);
  CHECK(config_error("[model]\njust words\n").find("key = value") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/fsv.conf"), ConfigError);
}

TEST_CASE("CSV formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(-2.5e-20) == "-2.5e-20");
  CHECK(format_number(600) == "600");
  CsvTable t({"t", "x"});
  t.add_row({0.0, 1.0 / 3.0});
  t.add_row({0.5, 2.0});
  CHECK(t.rows() == 2);
  CHECK(t.str() == "t,x\n0,0.333333333333\n0.5,2\n");
  CHECK_THROWS_AS(t.add_row({1.0}), ParameterError);
  CHECK_THROWS_AS(CsvTable({}), ParameterError);
  const fs::path dir = scratch_dir("csv");
  t.write(dir / "a.csv");
  const std::string bytes = slurp(dir / "a.csv");
  CHECK(bytes == t.str());
  CHECK(bytes.find('\r') == std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("git blob hash") {
  CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("path dump round trip and layout") {
  const MarketModel m = reference_model();
  const PathEnsemble ens = simulate_variance_paths(m, build_stabilizers(m), Grid(1.0, 12), 3, 4);
  const fs::path dir = scratch_dir("dump");
  write_path_dump(dir / "paths.bin", ens);
  const PathDump p = read_path_dump(dir / "paths.bin");
  CHECK(p.M == 3);
  CHECK(p.d == 2);
  CHECK(p.n == 12);
  CHECK(p.T == 1.0);
  CHECK(p.values == ens.V);
  const std::string raw = slurp(dir / "paths.bin");
  REQUIRE(raw.size() == 32 + ens.V.size() * 8);
  CHECK(static_cast<unsigned char>(raw[0]) == 3);
  for (int b = 1; b < 8; ++b) CHECK(raw[b] == 0);
  CHECK(static_cast<unsigned char>(raw[16]) == 12);
  {
    std::ofstream cut(dir / "short.bin", std::ios::binary);
    cut.write(raw.data(), 40);
  }
  CHECK_THROWS(read_path_dump(dir / "short.bin"));
  fs::remove_all(dir);
}

TEST_CASE("manifest records parameters, seed, versions and the input hash") {
  const ExperimentConfig cfg = parse_config(default_config_text());
  const fs::path dir = scratch_dir("manifest");
  ManifestEntry e;
  e.subcommand = "riccati";
  e.seed = 42;
  e.outputs = {"riccati.csv"};
  e.extra = {{"gamma0", "0.876"}};
  write_manifest(dir, cfg, e);
  const auto j = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(j["subcommand"] == "riccati");
  CHECK(j["input_hash"] == git_blob_hash(default_config_text()));
  CHECK(j["mc"]["seed"] == 42);
  CHECK(j["model"]["alpha"][1] == 0.9);
  CHECK(j["grid"]["n"] == 600);
  CHECK(j["outputs"][0] == "riccati.csv");
  CHECK(j["results"]["gamma0"] == "0.876");
  CHECK(j["versions"].contains("compiler"));
  CHECK(j["versions"].contains("eigen"));
  CHECK(j["timestamp"].get<std::string>().size() == 20);
  fs::remove_all(dir);
}
