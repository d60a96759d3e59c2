#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "fsv/model.hpp"
#include "fsv/stabilizer.hpp"

namespace fsv {

// psi_i(t) = int_0^t K_i(t - s) [a_i + F_i(T - s, psi(s))] ds with fractional K_i and
// F_i(s, psi) = (D^T psi)_i + lin_i(s) psi_i + quad_i(s) psi_i^2.
struct RiccatiSystem {
  double T = 1.0;
  std::vector<double> alpha;
  Eigen::VectorXd forcing;
  Eigen::MatrixXd D;
  std::vector<std::function<double(double)>> lin;
  std::vector<std::function<double(double)>> quad;

  int dim() const { return static_cast<int>(alpha.size()); }
  // a + F(s, psi).
  Eigen::VectorXd rhs(double s, const Eigen::VectorXd& psi) const;
  // The scalar equation of component i (other components frozen at zero).
  RiccatiSystem component(int i) const;
};

// Markowitz system: a_i = -theta_i^2, lin_i = -2 theta_i rho_i nu_i sigma_i,
// quad_i = nu_i^2 (1 - 2 rho_i^2) sigma_i^2 / 2, D = -diag(lambda).
RiccatiSystem markowitz_system(const MarketModel& model, const std::vector<Stabilizer>& stab);
// Laplace-transform system with forcing u: lin = 0, quad_i = nu_i^2 sigma_i^2 / 2.
RiccatiSystem laplace_system(const MarketModel& model, const std::vector<Stabilizer>& stab,
                             const Eigen::VectorXd& u);

struct RiccatiSolution {
  RiccatiSolution(Grid g, Eigen::MatrixXd p) : grid(g), psi(std::move(p)) {}
  Grid grid;
  Eigen::MatrixXd psi;  // d x (n+1)
  int dim() const { return static_cast<int>(psi.rows()); }
  // Linear interpolation on the solver grid; t clamped to [0, T].
  double at(int i, double t) const;
};

Eigen::VectorXd riccati_rhs(const MarketModel& model, const std::vector<Stabilizer>& stab, double s,
                            const Eigen::VectorXd& psi);

// Fractional Adams predictor-corrector. |psi_i| > cap_i throws RiccatiDivergence.
RiccatiSolution solve_adams(const RiccatiSystem& sys, int n, const Eigen::VectorXd& cap);
RiccatiSolution solve_riccati_adams(const MarketModel& model, const std::vector<Stabilizer>& stab, int n);

struct PicardReport {
  int sweeps = 0;
  double last_change = 0.0;
};

// Fixed-point sweeps with product-rectangle quadrature on the grid of n_fine steps.
RiccatiSolution picard_solve(const RiccatiSystem& sys, int n_fine, int sweeps, PicardReport* report = nullptr);
RiccatiSolution oracle_volterra_picard(const MarketModel& model, const std::vector<Stabilizer>& stab,
                                       int n_fine, int sweeps);

struct RiccatiBound {
  Eigen::VectorXd lambda_bar;
  Eigen::VectorXd bound;         // +inf where inapplicable
  std::vector<bool> applicable;  // lambda_bar > 0
};

RiccatiBound riccati_bound(const MarketModel& model, const std::vector<Stabilizer>& stab, double T);

struct AdmissibilityReport {
  bool pass = false;
  double lhs = 0.0;
  double a_p = 0.0;
  double threshold = 0.0;  // a / a(p)
  std::string str() const;
};

double admissibility_constant(double p, double sigma_norm);
AdmissibilityReport check_admissibility(const MarketModel& model, const std::vector<Stabilizer>& stab,
                                        const RiccatiSolution& sol, double p, double a);

}  // namespace fsv
