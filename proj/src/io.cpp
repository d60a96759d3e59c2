#include "fsv/io.hpp"

#include <boost/uuid/detail/sha1.hpp>
#include <boost/version.hpp>
#include <Eigen/Core>
#include <bit>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "fsv/errors.hpp"

namespace fsv {

namespace {

static_assert(std::endian::native == std::endian::little, "binary dumps assume a little-endian host");

template <class T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw NumericalError("truncated path dump");
  return v;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw ParameterError("CSV header must not be empty");
}

void CsvTable::add_row(const std::vector<double>& row) {
  if (row.size() != header_.size()) throw ParameterError("CSV row width differs from the header");
  rows_.push_back(row);
}

std::string CsvTable::str() const {
  std::string s;
  for (std::size_t j = 0; j < header_.size(); ++j) {
    if (j) s += ',';
    s += header_[j];
  }
  s += '\n';
  for (const auto& row : rows_) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) s += ',';
      s += format_number(row[j]);
    }
    s += '\n';
  }
  return s;
}

void CsvTable::write(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  const std::string s = str();
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string git_blob_hash(const std::string& content) {
  boost::uuids::detail::sha1 h;
  const std::string head = "blob " + std::to_string(content.size());
  h.process_bytes(head.data(), head.size() + 1);  // includes the terminating NUL
  h.process_bytes(content.data(), content.size());
  boost::uuids::detail::sha1::digest_type dig;
  h.get_digest(dig);
  std::ostringstream os;
  for (unsigned int w : dig) os << std::hex << std::setw(8) << std::setfill('0') << w;
  return os.str();
}

void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& cfg, const ManifestEntry& entry) {
  using nlohmann::ordered_json;
  const MarketModel& m = cfg.model;
  ordered_json j;
  j["subcommand"] = entry.subcommand;
  j["timestamp"] = utc_timestamp();
  j["input_hash"] = git_blob_hash(cfg.source);
  j["model"] = {{"d", m.d},         {"alpha", m.alpha}, {"lambda", m.lam}, {"nu", m.nu},
                {"rho", m.rho},     {"theta", m.theta}, {"mu0", m.mu0},    {"c", m.c},
                {"r", m.r},         {"x0", m.x0}};
  j["grid"] = {{"T", m.T}, {"n", cfg.n}};
  j["mc"] = {{"M", cfg.M}, {"seed", entry.seed}, {"n_boot", cfg.n_boot}};
  j["riccati"] = {{"truncation_K", cfg.truncation_K}, {"oracle_refinement", cfg.oracle_refinement}};
  j["experiment"] = {{"m", cfg.m},
                     {"frontier_T", cfg.frontier_T},
                     {"frontier_points", cfg.frontier_points},
                     {"laplace_u", cfg.laplace_u},
                     {"laplace_M", cfg.laplace_M},
                     {"stationarity_M", cfg.stationarity_M}};
  j["versions"] = {{"fsv", "1.0.0"},
                   {"compiler", __VERSION__},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"boost", BOOST_LIB_VERSION}};
  j["outputs"] = entry.outputs;
  ordered_json res = ordered_json::object();
  for (const auto& [k, v] : entry.extra) res[k] = v;
  j["results"] = res;
  std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
  out << j.dump(2) << '\n';
}

void write_path_dump(const std::filesystem::path& file, const PathEnsemble& ens) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  put<std::uint64_t>(out, static_cast<std::uint64_t>(ens.M));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(ens.d));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(ens.grid.n));
  put<double>(out, ens.grid.T);
  out.write(reinterpret_cast<const char*>(ens.V.data()), static_cast<std::streamsize>(ens.V.size() * sizeof(double)));
}

PathDump read_path_dump(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  PathDump p;
  p.M = get<std::uint64_t>(in);
  p.d = get<std::uint64_t>(in);
  p.n = get<std::uint64_t>(in);
  p.T = get<double>(in);
  p.values.resize(p.M * p.d * (p.n + 1));
  in.read(reinterpret_cast<char*>(p.values.data()), static_cast<std::streamsize>(p.values.size() * sizeof(double)));
  if (!in) throw NumericalError("truncated path dump");
  return p;
}

}  // namespace fsv
