#include "fsv/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fsv/errors.hpp"
#include "fsv/parallel.hpp"
#include "fsv/rng.hpp"

namespace fsv {

Eigen::MatrixXd gaussian_block_covariance(const KernelSpec& spec, const Grid& grid) {
  const int n = grid.n;
  const double h = grid.dt();
  Eigen::MatrixXd C(n + 1, n + 1);
  for (int j = 0; j < n; ++j) {
    for (int jp = j; jp < n; ++jp) {
      const double v = kernel_cross_segment(spec, (j + 1) * h, (jp + 1) * h, 0.0, h);
      C(j, jp) = C(jp, j) = v;
    }
    C(j, n) = C(n, j) = kernel_mean_segment(spec, (j + 1) * h, 0.0, h);
  }
  C(n, n) = h;
  return C;
}

GaussianBlockFactor build_gaussian_factor(const KernelSpec& spec, const Grid& grid, double tolerance) {
  GaussianBlockFactor out(spec, grid);
  out.covariance = gaussian_block_covariance(spec, grid);
  const int n = grid.n;
  out.mean_segments.resize(n);
  for (int j = 0; j < n; ++j) out.mean_segments(j) = out.covariance(j, n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.covariance);
  if (es.info() != Eigen::Success) throw FactorizationError("eigen-decomposition of the block covariance failed");
  const Eigen::VectorXd& ev = es.eigenvalues();  // ascending
  out.min_eigenvalue = ev(0);
  const double top = ev(ev.size() - 1);
  if (ev(0) < -1e-8 * top) {
    std::ostringstream os;
    os << "block covariance is not positive semi-definite: smallest eigenvalue " << ev(0);
    throw FactorizationError(os.str());
  }
  // Keep the leading eigenpairs until the discarded spectrum is below tolerance
  // in relative Frobenius norm; negative eigenvalues are dropped with it.
  const double frob2 = ev.squaredNorm();
  double dropped = 0.0;
  int keep = static_cast<int>(ev.size());
  for (int k = 0; k < ev.size(); ++k) {
    const double next = dropped + ev(k) * ev(k);
    if (ev(k) > 0.0 && next > tolerance * tolerance * frob2) break;
    dropped = next;
    --keep;
  }
  keep = std::max(keep, 1);
  out.factor.resize(n + 1, keep);
  for (int q = 0; q < keep; ++q) {
    const int k = static_cast<int>(ev.size()) - 1 - q;
    Eigen::VectorXd col = es.eigenvectors().col(k) * std::sqrt(std::max(ev(k), 0.0));
    if (col(n) < 0.0) col = -col;
    out.factor.col(q) = col;
  }
  out.relative_error = (out.factor * out.factor.transpose() - out.covariance).norm() / out.covariance.norm();
  if (!(out.relative_error <= 1e-8)) {
    std::ostringstream os;
    os << "block factor misses the covariance by " << out.relative_error << " (smallest eigenvalue "
       << out.min_eigenvalue << ")";
    throw FactorizationError(os.str());
  }
  return out;
}

double initial_variance_draw(const MarketModel& model, std::uint64_t seed, std::int64_t path, int i) {
  auto gen = substream(seed, static_cast<std::uint64_t>(path), i, StreamTag::initial_variance);
  std::normal_distribution<double> nd(0.0, 1.0);
  const double z = nd(gen);
  return std::max(0.0, model.x_inf(i) + std::sqrt(model.v0(i)) * z);
}

Eigen::MatrixXd sample_initial_variance(const MarketModel& model, int M, std::uint64_t seed) {
  model.validate();
  Eigen::MatrixXd out(M, model.d);
  for (int m = 0; m < M; ++m)
    for (int i = 0; i < model.d; ++i) out(m, i) = initial_variance_draw(model, seed, m, i);
  return out;
}

PathEnsemble simulate_variance_paths(const MarketModel& model, const std::vector<Stabilizer>& stab,
                                     const Grid& grid, int M, std::uint64_t seed, const SimulationOptions& opt) {
  model.validate();
  std::vector<GaussianBlockFactor> factors;
  for (int i = 0; i < model.d; ++i) factors.push_back(build_gaussian_factor(model.kernel(i), grid));
  return simulate_variance_paths(model, stab, factors, M, seed, opt);
}

PathEnsemble simulate_variance_paths(const MarketModel& model, const std::vector<Stabilizer>& stab,
                                     const std::vector<GaussianBlockFactor>& factors, int M,
                                     std::uint64_t seed, const SimulationOptions& opt) {
  model.validate();
  if (M < 1) throw ParameterError("number of paths must be >= 1");
  if (static_cast<int>(stab.size()) != model.d || static_cast<int>(factors.size()) != model.d)
    throw ParameterError("one stabilizer and one factor per asset required");
  const Grid grid = factors[0].grid;
  for (const auto& f : factors)
    if (f.grid.n != grid.n || f.grid.T != grid.T) throw ParameterError("factors built on different grids");
  const int n = grid.n;
  const int d = model.d;
  const double h = grid.dt();

  PathEnsemble ens(M, d, grid, seed);
  ens.V.assign(static_cast<std::size_t>(M) * d * (n + 1), 0.0);
  if (opt.store_increments) {
    ens.dW.assign(static_cast<std::size_t>(M) * d * n, 0.0);
    ens.dWperp.assign(static_cast<std::size_t>(M) * d * n, 0.0);
  }
  if (opt.store_kernel_integrals) ens.kernel_integrals.assign(static_cast<std::size_t>(M) * d * n, 0.0);

  struct AssetTables {
    Eigen::MatrixXd fext;    // n x (rank+1): drift segment column then lag rows of the factor
    Eigen::RowVectorXd fw;   // plain-increment row of the factor
    Eigen::RowVectorXd f0;   // lag-0 row
    std::vector<double> diffusion;  // nu sigma(t_{l-1})
  };
  std::vector<AssetTables> tables(d);
  for (int i = 0; i < d; ++i) {
    const GaussianBlockFactor& F = factors[i];
    const int r = F.rank();
    tables[i].fext.resize(n, r + 1);
    tables[i].fext.col(0) = F.mean_segments;
    tables[i].fext.rightCols(r) = F.factor.topRows(n);
    tables[i].fw = F.factor.row(n);
    tables[i].f0 = F.factor.row(0);
    tables[i].diffusion.resize(n);
    for (int l = 0; l < n; ++l) tables[i].diffusion[l] = model.nu[i] * stab[i](grid.time(l));
  }

  const int B = std::max(1, opt.block);
  const int nblocks = (M + B - 1) / B;
  parallel_for(static_cast<std::size_t>(nblocks) * d, [&](std::size_t item) {
    const int blk = static_cast<int>(item / d);
    const int i = static_cast<int>(item % d);
    const int m0 = blk * B;
    const int nb = std::min(B, M - m0);
    const AssetTables& tb = tables[i];
    const int r = static_cast<int>(tb.fw.size());
    const double mu = model.mu0[i], lam = model.lam[i];

    std::vector<Eigen::MatrixXd> Z(nb);
    Eigen::VectorXd v0(nb);
    for (int b = 0; b < nb; ++b) {
      const std::int64_t gp = opt.path_offset + m0 + b;
      v0(b) = opt.random_initial ? initial_variance_draw(model, seed, gp, i) : model.x_inf(i);
      auto gen = substream(seed, static_cast<std::uint64_t>(gp), i, StreamTag::gaussian);
      std::normal_distribution<double> nd(0.0, 1.0);
      Z[b].resize(r, n);
      for (int l = 0; l < n; ++l)
        for (int q = 0; q < r; ++q) Z[b](q, l) = nd(gen);
      if (opt.store_increments) {
        auto gp2 = substream(seed, static_cast<std::uint64_t>(gp), i, StreamTag::orthogonal);
        std::normal_distribution<double> nd2(0.0, std::sqrt(h));
        for (int l = 0; l < n; ++l) ens.dWperp[ens.iidx(m0 + b, i, l)] = nd2(gp2);
      }
    }

    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, nb);  // row k-1 holds the sum for V(t_k)
    Eigen::MatrixXd W(r + 1, nb);
    Eigen::VectorXd prev = v0;
    for (int b = 0; b < nb; ++b) ens.V[ens.vidx(m0 + b, i, 0)] = v0(b);
    for (int l = 1; l <= n; ++l) {
      const double diff = tb.diffusion[l - 1];
      for (int b = 0; b < nb; ++b) {
        const double v = prev(b);
        W(0, b) = mu - lam * v;
        W.col(b).tail(r) = (diff * std::sqrt(std::max(v, 0.0))) * Z[b].col(l - 1);
      }
      const int rows = n - l + 1;
      acc.middleRows(l - 1, rows).noalias() += tb.fext.topRows(rows) * W;
      for (int b = 0; b < nb; ++b) {
        prev(b) = v0(b) + acc(l - 1, b);
        ens.V[ens.vidx(m0 + b, i, l)] = prev(b);
      }
    }
    if (opt.store_increments || opt.store_kernel_integrals) {
      for (int b = 0; b < nb; ++b) {
        for (int l = 0; l < n; ++l) {
          if (opt.store_increments) ens.dW[ens.iidx(m0 + b, i, l)] = tb.fw.dot(Z[b].col(l));
          if (opt.store_kernel_integrals) ens.kernel_integrals[ens.iidx(m0 + b, i, l)] = tb.f0.dot(Z[b].col(l));
        }
      }
    }
  });
  return ens;
}

std::vector<double> correlate_asset_brownian(const PathEnsemble& ens, const MarketModel& model) {
  if (!ens.has_increments()) throw ParameterError("ensemble was simulated without stored increments");
  if (model.d != ens.d) throw ParameterError("model and ensemble dimensions differ");
  for (int i = 0; i < model.d; ++i)
    if (!(std::fabs(model.rho[i]) <= 1.0)) throw ParameterError("|rho| must not exceed 1");
  std::vector<double> dB(ens.dW.size());
  for (int m = 0; m < ens.M; ++m)
    for (int i = 0; i < ens.d; ++i) {
      const double rh = model.rho[i];
      const double co = std::sqrt(std::max(0.0, 1.0 - rh * rh));
      for (int l = 0; l < ens.grid.n; ++l) {
        const std::size_t k = ens.iidx(m, i, l);
        dB[k] = rh * ens.dW[k] - co * ens.dWperp[k];
      }
    }
  return dB;
}

}  // namespace fsv
