#include "fsv/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fsv/errors.hpp"

namespace fsv {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

using Table = std::map<std::string, std::string>;  // "section.key" -> raw value

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "model.d",          "model.alpha",           "model.lambda",
      "model.nu",         "model.rho",             "model.theta",
      "model.mu0",        "model.c",               "model.r",
      "model.x0",         "grid.T",                "grid.n",
      "mc.M",             "mc.seed",               "mc.n_boot",
      "riccati.truncation_K",                      "riccati.oracle_refinement",
      "experiment.name",  "experiment.output_dir", "experiment.m",
      "experiment.frontier_T",                     "experiment.frontier_points",
      "experiment.laplace_u",                      "experiment.laplace_M",
      "experiment.stationarity_M",                 "experiment.admissibility_p",
      "experiment.admissibility_a",                "experiment.strict_v0",
      "experiment.dump_paths"};
  return keys;
}

Table tokenize(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": key outside a section");
    const std::string path = section + "." + trim(line.substr(0, eq));
    if (!known_keys().count(path)) throw ConfigError("unknown key " + path);
    if (t.count(path)) throw ConfigError("duplicate key " + path);
    t[path] = trim(line.substr(eq + 1));
  }
  return t;
}

template <class T>
T parse_number(const std::string& path, const std::string& raw) {
  const std::string s = trim(raw);
  T value{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
    throw ConfigError(path + ": cannot parse '" + s + "'");
  return value;
}

std::vector<double> parse_list(const std::string& path, const std::string& raw) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(raw);
  while (std::getline(in, item, ',')) out.push_back(parse_number<double>(path, item));
  if (out.empty()) throw ConfigError(path + ": empty list");
  return out;
}

bool parse_bool(const std::string& path, const std::string& raw) {
  if (raw == "true" || raw == "1" || raw == "yes") return true;
  if (raw == "false" || raw == "0" || raw == "no") return false;
  throw ConfigError(path + ": expected true or false");
}

class Reader {
 public:
  explicit Reader(Table t) : t_(std::move(t)) {}

  const std::string& required(const std::string& path) const {
    auto it = t_.find(path);
    if (it == t_.end()) throw ConfigError("missing required field " + path);
    return it->second;
  }
  const std::string* optional(const std::string& path) const {
    auto it = t_.find(path);
    return it == t_.end() ? nullptr : &it->second;
  }

  double real(const std::string& path) const { return parse_number<double>(path, required(path)); }
  int integer(const std::string& path) const { return parse_number<int>(path, required(path)); }
  std::vector<double> list(const std::string& path) const { return parse_list(path, required(path)); }

  template <class T>
  void maybe(const std::string& path, T& out) const {
    const std::string* raw = optional(path);
    if (!raw) return;
    if constexpr (std::is_same_v<T, std::vector<double>>)
      out = parse_list(path, *raw);
    else if constexpr (std::is_same_v<T, bool>)
      out = parse_bool(path, *raw);
    else if constexpr (std::is_same_v<T, std::string>)
      out = *raw;
    else
      out = parse_number<T>(path, *raw);
  }

 private:
  Table t_;
};

const std::set<std::string> kExperiments = {"stabilizer", "riccati", "simulate", "wealth",
                                           "frontier",   "laplace", "full"};

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  const Reader rd(tokenize(text));
  ExperimentConfig cfg;
  cfg.source = text;
  MarketModel& m = cfg.model;
  m.d = rd.integer("model.d");
  m.alpha = rd.list("model.alpha");
  m.lam = rd.list("model.lambda");
  m.nu = rd.list("model.nu");
  m.rho = rd.list("model.rho");
  m.theta = rd.list("model.theta");
  m.mu0 = rd.list("model.mu0");
  m.c = rd.list("model.c");
  m.r = rd.real("model.r");
  m.x0 = rd.real("model.x0");
  m.T = rd.real("grid.T");
  cfg.n = rd.integer("grid.n");

  rd.maybe("mc.M", cfg.M);
  rd.maybe("mc.seed", cfg.seed);
  rd.maybe("mc.n_boot", cfg.n_boot);
  rd.maybe("riccati.truncation_K", cfg.truncation_K);
  rd.maybe("riccati.oracle_refinement", cfg.oracle_refinement);
  rd.maybe("experiment.name", cfg.experiment);
  rd.maybe("experiment.output_dir", cfg.output_dir);
  rd.maybe("experiment.m", cfg.m);
  rd.maybe("experiment.frontier_T", cfg.frontier_T);
  rd.maybe("experiment.frontier_points", cfg.frontier_points);
  rd.maybe("experiment.laplace_u", cfg.laplace_u);
  rd.maybe("experiment.laplace_M", cfg.laplace_M);
  rd.maybe("experiment.stationarity_M", cfg.stationarity_M);
  rd.maybe("experiment.admissibility_p", cfg.admissibility_p);
  rd.maybe("experiment.admissibility_a", cfg.admissibility_a);
  rd.maybe("experiment.strict_v0", cfg.strict_v0);
  rd.maybe("experiment.dump_paths", cfg.dump_paths);
  if (cfg.laplace_u.empty()) cfg.laplace_u.assign(std::max(m.d, 0), -0.05);

  // Validation happens here so that nothing runs on a bad file.
  try {
    m.validate();
    Grid g(m.T, cfg.n);
    (void)g;
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  if (cfg.M < 2) throw ConfigError("mc.M must be >= 2");
  if (cfg.n_boot < 1) throw ConfigError("mc.n_boot must be >= 1");
  if (cfg.truncation_K < 2) throw ConfigError("riccati.truncation_K must be >= 2");
  if (cfg.oracle_refinement < 1) throw ConfigError("riccati.oracle_refinement must be >= 1");
  if (!kExperiments.count(cfg.experiment)) throw ConfigError("experiment.name: unknown experiment " + cfg.experiment);
  if (cfg.output_dir.empty()) throw ConfigError("experiment.output_dir must not be empty");
  if (!std::isfinite(cfg.m)) throw ConfigError("experiment.m must be finite");
  for (double T : cfg.frontier_T)
    if (!(T > 0.0)) throw ConfigError("experiment.frontier_T entries must be > 0");
  if (cfg.frontier_points < 2) throw ConfigError("experiment.frontier_points must be >= 2");
  if (static_cast<int>(cfg.laplace_u.size()) != m.d)
    throw ConfigError("experiment.laplace_u must have d entries");
  for (double u : cfg.laplace_u)
    if (!(u <= 0.0)) throw ConfigError("experiment.laplace_u entries must be <= 0");
  if (cfg.laplace_M < 2) throw ConfigError("experiment.laplace_M must be >= 2");
  if (cfg.stationarity_M < 2) throw ConfigError("experiment.stationarity_M must be >= 2");
  if (!(cfg.admissibility_p >= 1.0)) throw ConfigError("experiment.admissibility_p must be >= 1");
  if (!(cfg.admissibility_a >= 1.0)) throw ConfigError("experiment.admissibility_a must be >= 1");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string default_config_text() {
  return R"([model]
d = 2
alpha = 0.6, 0.9
lambda = 0.2, 0.2
nu = 0.40, 0.32
rho = -0.7, -0.55
theta = 0.1, 0.12
mu0 = 2, 1
c = 0.01, 0.03
r = 0.02
x0 = 2

[grid]
T = 1
n = 600

[mc]
M = 5000
seed = 20250701
n_boot = 1000

[riccati]
truncation_K = 60
oracle_refinement = 8

[experiment]
name = full
output_dir = out
m = 2.255
frontier_T = 0.5, 1, 5
frontier_points = 8
laplace_u = -0.05, -0.05
laplace_M = 20000
stationarity_M = 10000
)";
}

}  // namespace fsv
