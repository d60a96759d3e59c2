#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fsv/model.hpp"

namespace fsv {

// Flat-section key-value configuration:
//
//   [model]
//   alpha = 0.6, 0.9
//   ...
//
// Every key must be known; missing required fields and malformed values raise
// ConfigError naming the field as section.key.
struct ExperimentConfig {
  MarketModel model;
  int n = 600;
  int M = 5000;
  std::uint64_t seed = 20250701;
  int n_boot = 1000;
  int truncation_K = 60;
  int oracle_refinement = 8;
  std::string experiment = "full";
  std::string output_dir = "out";

  double m = 2.255;
  std::vector<double> frontier_T{0.5, 1.0, 5.0};
  int frontier_points = 8;
  std::vector<double> laplace_u;  // defaults to -0.05 per asset
  int laplace_M = 20000;
  int stationarity_M = 10000;
  double admissibility_p = 1.0;
  double admissibility_a = 1.0;
  bool strict_v0 = false;
  bool dump_paths = false;

  std::string source;  // raw text, hashed into the manifest
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Text of the bundled default configuration.
std::string default_config_text();

}  // namespace fsv
