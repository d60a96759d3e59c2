#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fsv/model.hpp"
#include "fsv/simulate.hpp"
#include "fsv/stabilizer.hpp"

namespace fsv {

struct EnsembleStats {
  std::vector<double> times;
  std::vector<double> mean, variance;
  std::vector<double> ci_low, ci_high;          // 95% percentile bootstrap for the mean
  std::vector<double> var_ci_low, var_ci_high;  // same for the variance
  std::vector<double> mean_se, var_se;          // bootstrap standard deviations
  int n_boot = 0;
  int M = 0;
};

// paths: M x (number of times). Whole paths are resampled.
EnsembleStats ensemble_stats(const Eigen::MatrixXd& paths, const std::vector<double>& times, int n_boot,
                             std::uint64_t seed);

// Variance paths of asset i as an M x (n+1) matrix.
Eigen::MatrixXd asset_paths(const PathEnsemble& ens, int i);

struct StationarityAsset {
  double mean_fraction = 0.0;  // share of grid times whose 3-SE mean band holds x_inf
  double var_fraction = 0.0;   // same for the variance band and v0
  double max_mean_z = 0.0;
  double max_var_z = 0.0;
  bool pass = false;
};

struct StationarityReport {
  std::vector<StationarityAsset> assets;
  std::vector<EnsembleStats> stats;
  bool pass = false;
};

StationarityReport stationarity_diagnostics(const PathEnsemble& ens, const MarketModel& model, int n_boot,
                                            std::uint64_t seed);

struct FrontierRow {
  double m = 0.0;
  double sigma_theory = 0.0;
  double var_theory = 0.0;
  double var_mc = 0.0;
  double var_se = 0.0;
  double var_ci_low = 0.0, var_ci_high = 0.0;
  double mean_mc = 0.0;
  double mean_se = 0.0;
  double sigma_mc() const { return var_mc > 0.0 ? std::sqrt(var_mc) : 0.0; }
};

struct FrontierTable {
  double T = 0.0;
  double gamma0 = 0.0;
  double slope = 0.0;
  std::vector<FrontierRow> rows;
};

// m grid x0 e^{(r + a) T} for a spaced evenly in [lo, hi].
std::vector<double> frontier_targets(const MarketModel& model, int count, double lo = 0.01, double hi = 0.5);

// One variance ensemble shared by all targets; xi* and the wealth paths per target.
FrontierTable frontier_experiment(const MarketModel& model, const std::vector<Stabilizer>& stab,
                                  const std::vector<double>& m_values, int M, int n, std::uint64_t seed,
                                  int n_boot);

}  // namespace fsv
