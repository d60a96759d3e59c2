#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fsv/config.hpp"
#include "fsv/simulate.hpp"

namespace fsv {

// Column-oriented CSV table; all values printed with 12 significant digits.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(const std::vector<double>& row);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;
  void write(const std::filesystem::path& file) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

std::string format_number(double x);

// SHA-1 of "blob <size>\0<content>", as git computes object ids.
std::string git_blob_hash(const std::string& content);

struct ManifestEntry {
  std::string subcommand;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  std::vector<std::pair<std::string, std::string>> extra;  // free-form key/value results
};

// manifest.json with parameters, seeds, versions, input hash and a timestamp.
void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& cfg, const ManifestEntry& entry);

// Little-endian {M, d, n : uint64, T : double} followed by V in row-major
// (path, asset, time) order.
void write_path_dump(const std::filesystem::path& file, const PathEnsemble& ens);

struct PathDump {
  std::uint64_t M = 0, d = 0, n = 0;
  double T = 0.0;
  std::vector<double> values;
};
PathDump read_path_dump(const std::filesystem::path& file);

}  // namespace fsv
