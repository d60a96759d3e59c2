#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fsv/config.hpp"
#include "fsv/montecarlo.hpp"

namespace fsv {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

// Each check derives its own seed from cfg.seed, so any subset can be rerun alone.
CriterionResult check_terminal_mean(const ExperimentConfig& cfg);
CriterionResult check_frontier(const ExperimentConfig& cfg, std::vector<FrontierTable>* tables = nullptr);
CriterionResult check_stationarity(const ExperimentConfig& cfg);
CriterionResult check_riccati(const ExperimentConfig& cfg);
CriterionResult check_kernels(const ExperimentConfig& cfg);
CriterionResult check_stabilizer(const ExperimentConfig& cfg);
CriterionResult check_gamma0(const ExperimentConfig& cfg);
CriterionResult check_laplace(const ExperimentConfig& cfg);
CriterionResult check_identities(const ExperimentConfig& cfg);

// Runs criteria 1..9 in order; on_result sees each one as soon as it is known.
std::vector<CriterionResult> run_acceptance(const ExperimentConfig& cfg,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

// Relative tolerance for the frontier variance at horizon T.
double frontier_tolerance(double T);

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t purpose);

}  // namespace fsv
