#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "fsv/model.hpp"
#include "fsv/riccati.hpp"
#include "fsv/simulate.hpp"
#include "fsv/stabilizer.hpp"

namespace fsv {

struct Gamma0Forms {
  double fractional = 0.0;  // through I^{1-alpha} psi(T) and I^1 psi(T)
  double direct = 0.0;      // trapezoid of -theta^2 + F(s, psi(T-s))
  double relative_difference = 0.0;
};

Gamma0Forms gamma0_forms(const MarketModel& model, const std::vector<Stabilizer>& stab,
                         const RiccatiSolution& sol, const std::vector<double>& v0);
// Grid-independent sanity guard on the two forms. Their gap is discretization
// error, about 4e-7 at n = 600 over one year and 4e-6 over five.
inline constexpr double kGamma0Consistency = 1e-4;

// Fractional-integral form; throws NumericalError when the direct form disagrees
// beyond kGamma0Consistency.
double gamma0(const MarketModel& model, const std::vector<Stabilizer>& stab, const RiccatiSolution& sol,
              const std::vector<double>& v0);

std::pair<double, double> xi_eta_star(double gamma0, const MarketModel& model, double m);
double variance_of_terminal(double gamma0, const MarketModel& model, double m);
// Frontier m = m0 + slope * sigma, slope = sqrt(e^{2rT} / Gamma0 - 1).
double frontier_slope(double gamma0, const MarketModel& model);
// (sigma, m) pairs.
std::vector<std::pair<double, double>> efficient_frontier(double gamma0, const MarketModel& model,
                                                          const std::vector<double>& m_values);

struct MarkowitzSolution {
  double gamma0 = 0.0;
  double m = 0.0;
  double xi_star = 0.0;
  double eta_star = 0.0;
  double slope = 0.0;
  double v_of_m = 0.0;
  std::vector<double> v0_used;
};

MarkowitzSolution solve_markowitz(const MarketModel& model, const std::vector<Stabilizer>& stab,
                                  const RiccatiSolution& sol, double m, const std::vector<double>& v0);

Eigen::VectorXd optimal_control(const MarketModel& model, const RiccatiSolution& sol,
                                const std::vector<Stabilizer>& stab, double xi_star, double t, double X,
                                const Eigen::VectorXd& V);

struct WealthEnsemble {
  WealthEnsemble(int M_, int d_, Grid g) : M(M_), d(d_), grid(g) {}
  int M, d;
  Grid grid;
  std::vector<double> X;       // M x (n+1)
  std::vector<double> alpha;   // M x d x n, empty unless requested
  double terminal_mean = 0.0;
  double terminal_var = 0.0;
  double x(int m, int k) const { return X[static_cast<std::size_t>(m) * (grid.n + 1) + k]; }
};

// Per-path xi* (strict mode) may be given through xi_per_path; otherwise xi_star is shared.
WealthEnsemble simulate_wealth(const MarketModel& model, const PathEnsemble& ens, const RiccatiSolution& sol,
                               const std::vector<Stabilizer>& stab, double xi_star, bool store_alpha = false,
                               const std::vector<double>* xi_per_path = nullptr);

struct LaplaceReport {
  double closed_form = 0.0;  // averaged over the drawn initial variances
  double mc_estimate = 0.0;
  double mc_se = 0.0;
  double paired_se = 0.0;
  double z_score = 0.0;
  bool degenerate = false;
  bool pass = false;
};

// Exposure coefficients of the closed form: log E = sum_i V0_i A_i + B.
struct LaplaceExponent {
  Eigen::VectorXd A;
  double B = 0.0;
};

LaplaceExponent laplace_exponent(const MarketModel& model, const std::vector<Stabilizer>& stab,
                                 const Eigen::VectorXd& u, const Grid& grid);

LaplaceReport laplace_affine_check(const MarketModel& model, const std::vector<Stabilizer>& stab,
                                   const Eigen::VectorXd& u, const Grid& grid, int M, std::uint64_t seed,
                                   int chunk = 2048);

}  // namespace fsv
