#include "fsv/montecarlo.hpp"

#include <algorithm>
#include <cmath>

#include "fsv/errors.hpp"
#include "fsv/markowitz.hpp"
#include "fsv/riccati.hpp"
#include "fsv/rng.hpp"

namespace fsv {

namespace {

double percentile(std::vector<double>& v, double q) {
  // Linear interpolation between order statistics.
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double w = pos - lo;
  return (1.0 - w) * v[lo] + w * v[hi];
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = 0.0;
  for (double x : v) m += x;
  m /= v.size();
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1));
}

}  // namespace

EnsembleStats ensemble_stats(const Eigen::MatrixXd& paths, const std::vector<double>& times, int n_boot,
                             std::uint64_t seed) {
  const int M = static_cast<int>(paths.rows());
  const int nt = static_cast<int>(paths.cols());
  if (M < 2) throw ParameterError("ensemble statistics need M >= 2");
  if (static_cast<int>(times.size()) != nt) throw ParameterError("times must match the path columns");
  if (n_boot < 1) throw ParameterError("n_boot must be >= 1");

  EnsembleStats st;
  st.times = times;
  st.n_boot = n_boot;
  st.M = M;
  const Eigen::RowVectorXd mean = paths.colwise().mean();
  const Eigen::MatrixXd centered = paths.rowwise() - mean;
  const Eigen::RowVectorXd var = centered.colwise().squaredNorm() / (M - 1);
  st.mean.assign(mean.data(), mean.data() + nt);
  st.variance.assign(var.data(), var.data() + nt);

  // Resample counts per bootstrap replicate; the replicate moments are then two
  // matrix products over the centered paths (centering keeps the variances accurate).
  const Eigen::MatrixXd sq = centered.cwiseProduct(centered);
  Eigen::MatrixXd boot_mean(n_boot, nt), boot_var(n_boot, nt);
  constexpr int kBatch = 64;
  for (int b0 = 0; b0 < n_boot; b0 += kBatch) {
    const int nb = std::min(kBatch, n_boot - b0);
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(nb, M);
    for (int b = 0; b < nb; ++b) {
      auto gen = substream(seed, static_cast<std::uint64_t>(b0 + b), 0, StreamTag::bootstrap);
      std::uniform_int_distribution<int> pick(0, M - 1);
      for (int k = 0; k < M; ++k) counts(b, pick(gen)) += 1.0;
    }
    const Eigen::MatrixXd s1 = counts * centered / M;  // replicate mean minus sample mean
    const Eigen::MatrixXd s2 = counts * sq / M;
    boot_mean.middleRows(b0, nb) = s1.rowwise() + mean;
    boot_var.middleRows(b0, nb) = ((s2 - s1.cwiseProduct(s1)) * (static_cast<double>(M) / (M - 1))).cwiseMax(0.0);
  }

  st.ci_low.resize(nt);
  st.ci_high.resize(nt);
  st.var_ci_low.resize(nt);
  st.var_ci_high.resize(nt);
  st.mean_se.resize(nt);
  st.var_se.resize(nt);
  std::vector<double> col(n_boot);
  for (int t = 0; t < nt; ++t) {
    for (int b = 0; b < n_boot; ++b) col[b] = boot_mean(b, t);
    st.mean_se[t] = stddev(col);
    st.ci_low[t] = std::min(percentile(col, 0.025), st.mean[t]);
    st.ci_high[t] = std::max(percentile(col, 0.975), st.mean[t]);
    for (int b = 0; b < n_boot; ++b) col[b] = boot_var(b, t);
    st.var_se[t] = stddev(col);
    st.var_ci_low[t] = std::min(percentile(col, 0.025), st.variance[t]);
    st.var_ci_high[t] = std::max(percentile(col, 0.975), st.variance[t]);
  }
  return st;
}

Eigen::MatrixXd asset_paths(const PathEnsemble& ens, int i) {
  const int n = ens.grid.n;
  Eigen::MatrixXd P(ens.M, n + 1);
  for (int m = 0; m < ens.M; ++m)
    for (int k = 0; k <= n; ++k) P(m, k) = ens.v(m, i, k);
  return P;
}

StationarityReport stationarity_diagnostics(const PathEnsemble& ens, const MarketModel& model, int n_boot,
                                            std::uint64_t seed) {
  if (ens.d != model.d) throw ParameterError("ensemble dimension differs from the model");
  StationarityReport rep;
  std::vector<double> times(ens.grid.n + 1);
  for (int k = 0; k <= ens.grid.n; ++k) times[k] = ens.grid.time(k);
  rep.pass = true;
  for (int i = 0; i < model.d; ++i) {
    EnsembleStats st = ensemble_stats(asset_paths(ens, i), times, n_boot, seed + 7919 * (i + 1));
    StationarityAsset a;
    const double xinf = model.x_inf(i), v0 = model.v0(i);
    int ok_mean = 0, ok_var = 0;
    const int nt = static_cast<int>(times.size());
    for (int k = 0; k < nt; ++k) {
      const double dm = std::fabs(st.mean[k] - xinf);
      const double dv = std::fabs(st.variance[k] - v0);
      const double zm = st.mean_se[k] > 0.0 ? dm / st.mean_se[k] : (dm == 0.0 ? 0.0 : INFINITY);
      const double zv = st.var_se[k] > 0.0 ? dv / st.var_se[k] : (dv == 0.0 ? 0.0 : INFINITY);
      a.max_mean_z = std::max(a.max_mean_z, zm);
      a.max_var_z = std::max(a.max_var_z, zv);
      if (zm <= 3.0) ++ok_mean;
      if (zv <= 3.0) ++ok_var;
    }
    a.mean_fraction = static_cast<double>(ok_mean) / nt;
    a.var_fraction = static_cast<double>(ok_var) / nt;
    a.pass = a.mean_fraction >= 0.99 && a.var_fraction >= 0.95;
    rep.pass = rep.pass && a.pass;
    rep.assets.push_back(a);
    rep.stats.push_back(std::move(st));
  }
  return rep;
}

std::vector<double> frontier_targets(const MarketModel& model, int count, double lo, double hi) {
  std::vector<double> m(count);
  for (int j = 0; j < count; ++j) {
    const double a = count == 1 ? lo : lo + (hi - lo) * j / (count - 1);
    m[j] = model.x0 * std::exp((model.r + a) * model.T);
  }
  return m;
}

FrontierTable frontier_experiment(const MarketModel& model, const std::vector<Stabilizer>& stab,
                                  const std::vector<double>& m_values, int M, int n, std::uint64_t seed,
                                  int n_boot) {
  model.validate();
  const Grid grid(model.T, n);
  const RiccatiSolution sol = solve_riccati_adams(model, stab, n);
  std::vector<double> v0(model.d);
  for (int i = 0; i < model.d; ++i) v0[i] = model.x_inf(i);
  FrontierTable tab;
  tab.T = model.T;
  tab.gamma0 = gamma0(model, stab, sol, v0);
  tab.slope = frontier_slope(tab.gamma0, model);
  const PathEnsemble ens = simulate_variance_paths(model, stab, grid, M, seed);
  for (std::size_t j = 0; j < m_values.size(); ++j) {
    const double m = m_values[j];
    FrontierRow row;
    row.m = m;
    row.var_theory = variance_of_terminal(tab.gamma0, model, m);
    row.sigma_theory = std::sqrt(row.var_theory);
    const double xi = xi_eta_star(tab.gamma0, model, m).first;
    const WealthEnsemble w = simulate_wealth(model, ens, sol, stab, xi);
    Eigen::MatrixXd term(M, 1);
    for (int p = 0; p < M; ++p) term(p, 0) = w.x(p, n);
    const EnsembleStats st = ensemble_stats(term, {model.T}, n_boot, seed ^ (0x51ed27ULL + j));
    row.mean_mc = st.mean[0];
    row.mean_se = st.mean_se[0];
    row.var_mc = st.variance[0];
    row.var_se = st.var_se[0];
    row.var_ci_low = st.var_ci_low[0];
    row.var_ci_high = st.var_ci_high[0];
    tab.rows.push_back(row);
  }
  return tab;
}

}  // namespace fsv
