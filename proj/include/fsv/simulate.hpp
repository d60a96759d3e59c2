#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "fsv/kernels.hpp"
#include "fsv/model.hpp"
#include "fsv/stabilizer.hpp"

namespace fsv {

// Covariance of (int_{t_{l-1}}^{t_l} K(t_{l+j} - s) dW_s for j = 0..n-1, dW_{t_l}) and a
// truncated spectral factor of it. The matrix only depends on lags, so one factor
// serves every interval: the sub-vector for interval l is a row subset.
struct GaussianBlockFactor {
  GaussianBlockFactor(const KernelSpec& k, const Grid& g) : kernel(k), grid(g) {}
  KernelSpec kernel;
  Grid grid;
  Eigen::MatrixXd covariance;  // (n+1) x (n+1), last index is the plain increment
  Eigen::MatrixXd factor;      // (n+1) x rank, covariance ~ factor factor^T
  Eigen::VectorXd mean_segments;  // int over one cell of K at lag j, j = 0..n-1
  double min_eigenvalue = 0.0;
  double relative_error = 0.0;  // Frobenius, of factor factor^T against covariance
  int rank() const { return static_cast<int>(factor.cols()); }
};

Eigen::MatrixXd gaussian_block_covariance(const KernelSpec& spec, const Grid& grid);
GaussianBlockFactor build_gaussian_factor(const KernelSpec& spec, const Grid& grid, double tolerance = 1e-12);

struct SimulationOptions {
  bool random_initial = true;        // false: V_0 = x_inf
  bool store_increments = true;      // dW and dWperp
  bool store_kernel_integrals = false;
  std::int64_t path_offset = 0;      // global index of the first path (chunked runs)
  int block = 32;                    // paths per GEMM batch
};

struct PathEnsemble {
  PathEnsemble(int M_, int d_, Grid g, std::uint64_t s) : M(M_), d(d_), grid(g), seed(s) {}
  int M, d;
  Grid grid;
  std::uint64_t seed;
  std::vector<double> V;       // M x d x (n+1)
  std::vector<double> dW;      // M x d x n
  std::vector<double> dWperp;  // M x d x n
  std::vector<double> kernel_integrals;  // M x d x n, lag-0 stochastic integral per interval

  std::size_t vidx(int m, int i, int k) const { return (static_cast<std::size_t>(m) * d + i) * (grid.n + 1) + k; }
  std::size_t iidx(int m, int i, int l) const { return (static_cast<std::size_t>(m) * d + i) * grid.n + l; }
  double v(int m, int i, int k) const { return V[vidx(m, i, k)]; }
  bool has_increments() const { return !dW.empty(); }
};

double initial_variance_draw(const MarketModel& model, std::uint64_t seed, std::int64_t path, int i);
Eigen::MatrixXd sample_initial_variance(const MarketModel& model, int M, std::uint64_t seed);

PathEnsemble simulate_variance_paths(const MarketModel& model, const std::vector<Stabilizer>& stab,
                                     const Grid& grid, int M, std::uint64_t seed,
                                     const SimulationOptions& opt = {});
PathEnsemble simulate_variance_paths(const MarketModel& model, const std::vector<Stabilizer>& stab,
                                     const std::vector<GaussianBlockFactor>& factors, int M,
                                     std::uint64_t seed, const SimulationOptions& opt = {});

// dB_i = rho_i dW_i - sqrt(1 - rho_i^2) dWperp_i, laid out like dW.
std::vector<double> correlate_asset_brownian(const PathEnsemble& ens, const MarketModel& model);

}  // namespace fsv
