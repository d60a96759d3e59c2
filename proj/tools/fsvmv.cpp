// fsvmv: experiments for the fake-stationary Volterra variance model and the
// mean-variance portfolio built on it.
//
//   fsvmv <subcommand> [--config FILE] [--seed N] [--out DIR]
//
// Exit status: 0 ok, 2 bad configuration, 3 numerical failure, 4 failed
// acceptance check (full only). FSV_THREADS sets the worker count.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fsv/acceptance.hpp"
#include "fsv/config.hpp"
#include "fsv/errors.hpp"
#include "fsv/io.hpp"
#include "fsv/markowitz.hpp"
#include "fsv/montecarlo.hpp"
#include "fsv/parallel.hpp"
#include "fsv/riccati.hpp"
#include "fsv/simulate.hpp"
#include "fsv/stabilizer.hpp"

namespace fs = std::filesystem;
using namespace fsv;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitAcceptance = 4;

struct Run {
  const ExperimentConfig& cfg;
  fs::path dir;
  ManifestEntry manifest;

  void wrote(const std::string& file) { manifest.outputs.push_back(file); }
  void note(const std::string& key, const std::string& value) { manifest.extra.emplace_back(key, value); }
  void note(const std::string& key, double value) { note(key, format_number(value)); }
};

std::vector<double> stationary_means(const MarketModel& m) {
  std::vector<double> v(m.d);
  for (int i = 0; i < m.d; ++i) v[i] = m.x_inf(i);
  return v;
}

std::string indexed(const std::string& stem, int i) { return stem + "_" + std::to_string(i + 1); }

void run_stabilizer(Run& run) {
  const MarketModel& m = run.cfg.model;
  const int n = run.cfg.n;
  std::vector<StabilizerSeries> series;
  std::vector<std::vector<double>> resid;
  std::vector<std::string> header{"t"};
  for (int i = 0; i < m.d; ++i) header.push_back(indexed("sigma", i));
  for (int i = 0; i < m.d; ++i) header.push_back(indexed("residual", i));
  for (int i = 0; i < m.d; ++i) {
    series.emplace_back(m.alpha[i], m.lam[i], m.c[i], run.cfg.truncation_K);
    resid.push_back(stabilizer_residual_profile(series.back(), m.T, n));
    run.note(indexed("sigma_limit", i), series.back().limit());
    run.note(indexed("switch_time", i), series.back().switch_time());
  }
  CsvTable tab(header);
  for (int k = 0; k <= n; ++k) {
    const double t = m.T * k / n;
    std::vector<double> row{t};
    for (int i = 0; i < m.d; ++i) row.push_back(series[i](t));
    for (int i = 0; i < m.d; ++i) row.push_back(resid[i][k]);
    tab.add_row(row);
  }
  tab.write(run.dir / "stabilizer.csv");
  run.wrote("stabilizer.csv");
}

void run_riccati(Run& run) {
  const MarketModel& m = run.cfg.model;
  const auto stab = build_stabilizers(m, run.cfg.truncation_K);
  const RiccatiSolution sol = solve_riccati_adams(m, stab, run.cfg.n);
  std::vector<std::string> header{"t"};
  for (int i = 0; i < m.d; ++i) header.push_back(indexed("psi", i));
  CsvTable tab(header);
  for (int k = 0; k <= run.cfg.n; ++k) {
    std::vector<double> row{sol.grid.time(k)};
    for (int i = 0; i < m.d; ++i) row.push_back(sol.psi(i, k));
    tab.add_row(row);
  }
  tab.write(run.dir / "riccati.csv");
  run.wrote("riccati.csv");

  const RiccatiBound b = riccati_bound(m, stab, m.T);
  for (int i = 0; i < m.d; ++i)
    if (b.applicable[i]) run.note(indexed("psi_bound", i), b.bound(i));
  const AdmissibilityReport adm =
      check_admissibility(m, stab, sol, run.cfg.admissibility_p, run.cfg.admissibility_a);
  run.note("admissibility", adm.str());
  const Gamma0Forms g = gamma0_forms(m, stab, sol, stationary_means(m));
  run.note("gamma0", g.fractional);
  run.note("gamma0_direct", g.direct);
}

void run_simulate(Run& run) {
  const ExperimentConfig& cfg = run.cfg;
  const MarketModel& m = cfg.model;
  const auto stab = build_stabilizers(m, cfg.truncation_K);
  const Grid grid(m.T, cfg.n);
  SimulationOptions opt;
  opt.store_increments = false;
  const PathEnsemble ens = simulate_variance_paths(m, stab, grid, cfg.M, run.manifest.seed, opt);
  const StationarityReport rep = stationarity_diagnostics(ens, m, cfg.n_boot, derived_seed(run.manifest.seed, 1));
  std::vector<std::string> header{"t"};
  for (int i = 0; i < m.d; ++i)
    for (const char* s : {"mean", "var", "mean_ci_low", "mean_ci_high", "var_ci_low", "var_ci_high"})
      header.push_back(indexed(s, i));
  CsvTable tab(header);
  for (int k = 0; k <= cfg.n; ++k) {
    std::vector<double> row{grid.time(k)};
    for (int i = 0; i < m.d; ++i) {
      const EnsembleStats& st = rep.stats[i];
      for (double v : {st.mean[k], st.variance[k], st.ci_low[k], st.ci_high[k], st.var_ci_low[k], st.var_ci_high[k]})
        row.push_back(v);
    }
    tab.add_row(row);
  }
  tab.write(run.dir / "variance_stats.csv");
  run.wrote("variance_stats.csv");
  for (int i = 0; i < m.d; ++i) {
    run.note(indexed("mean_fraction", i), rep.assets[i].mean_fraction);
    run.note(indexed("var_fraction", i), rep.assets[i].var_fraction);
  }
  if (cfg.dump_paths) {
    write_path_dump(run.dir / "paths.bin", ens);
    run.wrote("paths.bin");
  }
}

void run_wealth(Run& run) {
  const ExperimentConfig& cfg = run.cfg;
  const MarketModel& m = cfg.model;
  const auto stab = build_stabilizers(m, cfg.truncation_K);
  const RiccatiSolution sol = solve_riccati_adams(m, stab, cfg.n);
  const Grid grid(m.T, cfg.n);
  const PathEnsemble ens = simulate_variance_paths(m, stab, grid, cfg.M, run.manifest.seed);
  const MarkowitzSolution ms = solve_markowitz(m, stab, sol, cfg.m, stationary_means(m));
  std::vector<double> xi_paths;
  if (cfg.strict_v0) {
    xi_paths.resize(cfg.M);
    for (int p = 0; p < cfg.M; ++p) {
      std::vector<double> v0(m.d);
      for (int i = 0; i < m.d; ++i) v0[i] = ens.v(p, i, 0);
      xi_paths[p] = xi_eta_star(gamma0(m, stab, sol, v0), m, cfg.m).first;
    }
  }
  const WealthEnsemble w = simulate_wealth(m, ens, sol, stab, ms.xi_star, true, cfg.strict_v0 ? &xi_paths : nullptr);
  const int n = cfg.n;
  std::vector<double> times(n + 1);
  for (int k = 0; k <= n; ++k) times[k] = grid.time(k);
  Eigen::MatrixXd X(cfg.M, n + 1);
  for (int p = 0; p < cfg.M; ++p)
    for (int k = 0; k <= n; ++k) X(p, k) = w.x(p, k);
  const std::uint64_t bseed = derived_seed(run.manifest.seed, 2);
  const EnsembleStats sx = ensemble_stats(X, times, cfg.n_boot, bseed);
  CsvTable wt({"t", "mean_X", "ci_low_X", "ci_high_X", "var_X"});
  for (int k = 0; k <= n; ++k) wt.add_row({times[k], sx.mean[k], sx.ci_low[k], sx.ci_high[k], sx.variance[k]});
  wt.write(run.dir / "wealth.csv");
  run.wrote("wealth.csv");

  // Controls live on the left end of each step.
  std::vector<double> left(times.begin(), times.end() - 1);
  std::vector<EnsembleStats> sa;
  for (int i = 0; i < m.d; ++i) {
    Eigen::MatrixXd A(cfg.M, n);
    for (int p = 0; p < cfg.M; ++p)
      for (int k = 0; k < n; ++k) A(p, k) = w.alpha[(static_cast<std::size_t>(p) * m.d + i) * n + k];
    sa.push_back(ensemble_stats(A, left, cfg.n_boot, bseed + i + 1));
  }
  std::vector<std::string> header{"t"};
  for (int i = 0; i < m.d; ++i)
    for (const char* s : {"mean_alpha", "ci_low_alpha", "ci_high_alpha"}) header.push_back(indexed(s, i));
  CsvTable at(header);
  for (int k = 0; k < n; ++k) {
    std::vector<double> row{left[k]};
    for (int i = 0; i < m.d; ++i) {
      row.push_back(sa[i].mean[k]);
      row.push_back(sa[i].ci_low[k]);
      row.push_back(sa[i].ci_high[k]);
    }
    at.add_row(row);
  }
  at.write(run.dir / "strategy.csv");
  run.wrote("strategy.csv");
  run.note("gamma0", ms.gamma0);
  run.note("xi_star", ms.xi_star);
  run.note("variance_theory", ms.v_of_m);
  run.note("terminal_mean", sx.mean[n]);
  run.note("terminal_mean_se", sx.mean_se[n]);
  run.note("terminal_var", sx.variance[n]);
}

void write_frontier(Run& run, const FrontierTable& tab) {
  CsvTable out({"m", "sigma_theoretical", "sigma_mc", "mc_se"});
  for (const FrontierRow& r : tab.rows) {
    const double s = r.sigma_mc();
    // Delta method: se(sigma) = se(var) / (2 sigma).
    out.add_row({r.m, r.sigma_theory, s, s > 0.0 ? r.var_se / (2.0 * s) : 0.0});
  }
  const std::string name = "frontier_T" + format_number(tab.T) + ".csv";
  out.write(run.dir / name);
  run.wrote(name);
  run.note("gamma0_T" + format_number(tab.T), tab.gamma0);
  run.note("slope_T" + format_number(tab.T), tab.slope);
}

void run_frontier(Run& run) {
  const ExperimentConfig& cfg = run.cfg;
  for (double T : cfg.frontier_T) {
    MarketModel m = cfg.model;
    m.T = T;
    const auto stab = build_stabilizers(m, cfg.truncation_K);
    const std::vector<double> targets = frontier_targets(m, cfg.frontier_points);
    write_frontier(run, frontier_experiment(m, stab, targets, cfg.M, cfg.n,
                                            derived_seed(run.manifest.seed, static_cast<std::uint64_t>(T * 1000)),
                                            cfg.n_boot));
  }
}

void run_laplace(Run& run) {
  const ExperimentConfig& cfg = run.cfg;
  const MarketModel& m = cfg.model;
  const auto stab = build_stabilizers(m, cfg.truncation_K);
  const Grid grid(m.T, cfg.n);
  const Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(cfg.laplace_u.data(), m.d);
  const LaplaceReport rep = laplace_affine_check(m, stab, u, grid, cfg.laplace_M, run.manifest.seed);
  CsvTable tab({"closed_form", "mc_estimate", "mc_se", "paired_se", "z_score", "pass"});
  tab.add_row({rep.closed_form, rep.mc_estimate, rep.mc_se, rep.paired_se, rep.z_score, rep.pass ? 1.0 : 0.0});
  tab.write(run.dir / "laplace.csv");
  run.wrote("laplace.csv");
}

bool run_full(Run& run) {
  run_stabilizer(run);
  run_riccati(run);
  run_simulate(run);
  run_wealth(run);
  run_frontier(run);
  run_laplace(run);
  ExperimentConfig acc = run.cfg;
  acc.seed = run.manifest.seed;
  const std::vector<CriterionResult> results = run_acceptance(acc, [](const CriterionResult& r) {
    std::printf("[%s] %d %s: %s\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.detail.c_str());
    std::fflush(stdout);
  });
  bool ok = true;
  std::FILE* f = std::fopen((run.dir / "acceptance.csv").c_str(), "wb");
  if (!f) throw std::runtime_error("cannot write acceptance.csv");
  std::fputs("criterion,pass\n", f);
  for (const CriterionResult& r : results) {
    std::fprintf(f, "%d,%d\n", r.id, r.pass ? 1 : 0);
    run.note("criterion_" + std::to_string(r.id), std::string(r.pass ? "pass: " : "fail: ") + r.detail);
    ok = ok && r.pass;
  }
  std::fclose(f);
  run.wrote("acceptance.csv");
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fake-stationary Volterra variance model: stabilizer, Riccati, simulation, Markowitz"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"stabilizer", "stabilizer curves and residuals"},
      {"riccati", "Riccati-Volterra solution psi"},
      {"simulate", "variance ensemble statistics and stationarity check"},
      {"wealth", "optimal wealth and strategy statistics"},
      {"frontier", "efficient frontier, closed form against Monte Carlo"},
      {"laplace-check", "Laplace transform against its closed form"},
      {"full", "every experiment plus the acceptance checks"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "configuration file (bundled defaults if omitted)");
    sub->add_option("--seed", seed, "override mc.seed");
    sub->add_option("--out", out_dir, "override experiment.output_dir");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  ExperimentConfig cfg;
  try {
    cfg = config_path.empty() ? parse_config(default_config_text()) : load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    fs::create_directories(cfg.output_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  Run run{cfg, cfg.output_dir, {}};
  run.manifest.subcommand = cmd;
  run.manifest.seed = cfg.seed;
  run.note("threads", std::to_string(thread_count()));
  try {
    bool ok = true;
    if (cmd == "stabilizer") run_stabilizer(run);
    else if (cmd == "riccati") run_riccati(run);
    else if (cmd == "simulate") run_simulate(run);
    else if (cmd == "wealth") run_wealth(run);
    else if (cmd == "frontier") run_frontier(run);
    else if (cmd == "laplace-check") run_laplace(run);
    else ok = run_full(run);
    write_manifest(run.dir, cfg, run.manifest);
    return ok ? 0 : kExitAcceptance;
  } catch (const ParameterError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DomainError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
