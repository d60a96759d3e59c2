#include "fsv/markowitz.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fsv/errors.hpp"
#include "fsv/kernels.hpp"

namespace fsv {

namespace {

void check_solution(const MarketModel& model, const RiccatiSolution& sol) {
  if (sol.dim() != model.d) throw ParameterError("Riccati solution dimension differs from the model");
  if (std::fabs(sol.grid.T - model.T) > 1e-12 * model.T) throw ParameterError("Riccati solution horizon differs from model.T");
}

// trapezoid over the solver grid of -theta^2 + F_i(s, psi(T - s)).
double direct_exposure(const RiccatiSystem& sys, const RiccatiSolution& sol, int i) {
  const Grid& g = sol.grid;
  double acc = 0.0;
  for (int k = 0; k <= g.n; ++k) {
    const double s = g.time(k);
    const Eigen::VectorXd psi = sol.psi.col(g.n - k);
    const double w = (k == 0 || k == g.n) ? 0.5 : 1.0;
    acc += w * sys.rhs(s, psi)(i);
  }
  return acc * g.dt();
}

}  // namespace

Gamma0Forms gamma0_forms(const MarketModel& model, const std::vector<Stabilizer>& stab,
                         const RiccatiSolution& sol, const std::vector<double>& v0) {
  model.validate();
  check_solution(model, sol);
  if (static_cast<int>(v0.size()) != model.d) throw ParameterError("v0 must have d entries");
  for (double v : v0)
    if (!(v >= 0.0)) throw ParameterError("v0 must be non-negative");
  const RiccatiSystem sys = markowitz_system(model, stab);
  const double T = model.T;
  const int n = sol.grid.n;
  double frac = 2.0 * model.r * T;
  double direct = 2.0 * model.r * T;
  for (int i = 0; i < model.d; ++i) {
    std::vector<double> row(n + 1);
    for (int k = 0; k <= n; ++k) row[k] = sol.psi(i, k);
    const double order = 1.0 - model.alpha[i];
    const double ifrac = order > 0.0 ? fractional_integral(order, row, T) : row[n];
    const double i1 = fractional_integral(1.0, row, T);
    frac += v0[i] * ifrac + model.mu0[i] * i1;
    direct += v0[i] * direct_exposure(sys, sol, i) + model.mu0[i] * i1;
  }
  Gamma0Forms out;
  out.fractional = std::exp(frac);
  out.direct = std::exp(direct);
  out.relative_difference = std::fabs(out.fractional - out.direct) / out.fractional;
  return out;
}

double gamma0(const MarketModel& model, const std::vector<Stabilizer>& stab, const RiccatiSolution& sol,
              const std::vector<double>& v0) {
  const Gamma0Forms f = gamma0_forms(model, stab, sol, v0);
  if (!(f.relative_difference <= kGamma0Consistency)) {
    std::ostringstream os;
    os << "Gamma_0 forms disagree: fractional " << f.fractional << ", direct " << f.direct << " (relative "
       << f.relative_difference << ")";
    throw NumericalError(os.str());
  }
  return f.fractional;
}

namespace {

void check_target(double gamma0, const MarketModel& model, double m) {
  const double m0 = model.m0();
  if (m < m0 - 1e-12 * std::max(1.0, std::fabs(m0))) {
    std::ostringstream os;
    os << "target m = " << m << " is below m0 = x0 e^{rT} = " << m0;
    throw ParameterError(os.str());
  }
  const double denom = 1.0 - gamma0 * std::exp(-2.0 * model.r * model.T);
  // A denominator at rounding level means Gamma_0 = e^{2rT}: no risk premium, no frontier.
  if (!(gamma0 > 0.0) || !(denom > 1e-14)) throw ParameterError("Gamma_0 must lie in (0, e^{2rT})");
}

}  // namespace

std::pair<double, double> xi_eta_star(double gamma0, const MarketModel& model, double m) {
  check_target(gamma0, model, m);
  const double e1 = std::exp(-model.r * model.T);
  const double denom = 1.0 - gamma0 * e1 * e1;
  const double xi = (m - gamma0 * e1 * model.x0) / denom;
  // eta* = m - xi* = Gamma0 e^{-rT}(x0 - m e^{-rT}) / (1 - Gamma0 e^{-2rT}).
  const double eta = gamma0 * e1 * (model.x0 - m * e1) / denom;
  return {xi, eta};
}

double variance_of_terminal(double gamma0, const MarketModel& model, double m) {
  check_target(gamma0, model, m);
  const double e1 = std::exp(-model.r * model.T);
  const double gap = model.x0 - m * e1;
  return gamma0 * gap * gap / (1.0 - gamma0 * e1 * e1);
}

double frontier_slope(double gamma0, const MarketModel& model) {
  check_target(gamma0, model, model.m0());
  return std::sqrt(std::exp(2.0 * model.r * model.T) / gamma0 - 1.0);
}

std::vector<std::pair<double, double>> efficient_frontier(double gamma0, const MarketModel& model,
                                                          const std::vector<double>& m_values) {
  std::vector<std::pair<double, double>> out;
  out.reserve(m_values.size());
  for (double m : m_values) out.emplace_back(std::sqrt(variance_of_terminal(gamma0, model, m)), m);
  return out;
}

MarkowitzSolution solve_markowitz(const MarketModel& model, const std::vector<Stabilizer>& stab,
                                  const RiccatiSolution& sol, double m, const std::vector<double>& v0) {
  MarkowitzSolution s;
  s.gamma0 = gamma0(model, stab, sol, v0);
  s.m = m;
  std::tie(s.xi_star, s.eta_star) = xi_eta_star(s.gamma0, model, m);
  s.slope = frontier_slope(s.gamma0, model);
  s.v_of_m = variance_of_terminal(s.gamma0, model, m);
  s.v0_used = v0;
  return s;
}

Eigen::VectorXd optimal_control(const MarketModel& model, const RiccatiSolution& sol,
                                const std::vector<Stabilizer>& stab, double xi_star, double t, double X,
                                const Eigen::VectorXd& V) {
  const double T = model.T;
  const double gap = X - xi_star * std::exp(-model.r * (T - t));
  Eigen::VectorXd a(model.d);
  for (int i = 0; i < model.d; ++i) {
    const double lev = model.theta[i] + model.rho[i] * model.nu[i] * stab[i](t) * sol.at(i, T - t);
    a(i) = -lev * std::sqrt(std::max(V(i), 0.0)) * gap;
  }
  return a;
}

WealthEnsemble simulate_wealth(const MarketModel& model, const PathEnsemble& ens, const RiccatiSolution& sol,
                               const std::vector<Stabilizer>& stab, double xi_star, bool store_alpha,
                               const std::vector<double>* xi_per_path) {
  check_solution(model, sol);
  if (ens.d != model.d) throw ParameterError("ensemble dimension differs from the model");
  if (ens.grid.n != sol.grid.n || std::fabs(ens.grid.T - sol.grid.T) > 1e-12 * sol.grid.T)
    throw ParameterError("ensemble and Riccati solution must share the grid");
  if (xi_per_path && static_cast<int>(xi_per_path->size()) != ens.M)
    throw ParameterError("per-path xi* must have one entry per path");
  const std::vector<double> dB = correlate_asset_brownian(ens, model);
  const Grid& g = ens.grid;
  const int n = g.n, d = model.d;
  const double h = g.dt();
  const double T = g.T;

  // lev_i(t_k) = theta_i + rho_i nu_i sigma_i(t_k) psi_i(T - t_k) on the shared grid.
  Eigen::MatrixXd lev(d, n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < d; ++i)
      lev(i, k) = model.theta[i] + model.rho[i] * model.nu[i] * stab[i](g.time(k)) * sol.psi(i, n - k);
  std::vector<double> disc(n);
  for (int k = 0; k < n; ++k) disc[k] = std::exp(-model.r * (T - g.time(k)));

  WealthEnsemble w(ens.M, d, g);
  w.X.assign(static_cast<std::size_t>(ens.M) * (n + 1), 0.0);
  if (store_alpha) w.alpha.assign(static_cast<std::size_t>(ens.M) * d * n, 0.0);
  double sum = 0.0;
  for (int m = 0; m < ens.M; ++m) {
    const double xi = xi_per_path ? (*xi_per_path)[m] : xi_star;
    double X = model.x0;
    double* row = &w.X[static_cast<std::size_t>(m) * (n + 1)];
    row[0] = X;
    for (int k = 1; k <= n; ++k) {
      const double gap = X - xi * disc[k - 1];
      double drift = model.r * X;
      double noise = 0.0;
      for (int i = 0; i < d; ++i) {
        const double sv = std::sqrt(std::max(ens.v(m, i, k - 1), 0.0));
        const double a = -lev(i, k - 1) * sv * gap;
        drift += model.theta[i] * sv * a;
        noise += a * dB[ens.iidx(m, i, k - 1)];
        if (store_alpha) w.alpha[(static_cast<std::size_t>(m) * d + i) * n + (k - 1)] = a;
      }
      X += drift * h + noise;
      row[k] = X;
    }
    sum += X;
  }
  w.terminal_mean = sum / ens.M;
  double ss = 0.0;
  for (int m = 0; m < ens.M; ++m) {
    const double e = w.x(m, n) - w.terminal_mean;
    ss += e * e;
  }
  w.terminal_var = ens.M > 1 ? ss / (ens.M - 1) : 0.0;
  return w;
}

LaplaceExponent laplace_exponent(const MarketModel& model, const std::vector<Stabilizer>& stab,
                                 const Eigen::VectorXd& u, const Grid& grid) {
  model.validate();
  for (int i = 0; i < u.size(); ++i)
    if (!(u(i) <= 0.0)) throw ParameterError("Laplace argument must be componentwise <= 0");
  if (std::fabs(grid.T - model.T) > 1e-12 * model.T) throw ParameterError("grid horizon differs from model.T");
  const RiccatiSystem sys = laplace_system(model, stab, u);
  const RiccatiSolution sol = solve_adams(sys, grid.n, Eigen::VectorXd::Constant(model.d, 1e6));
  LaplaceExponent e;
  e.A = Eigen::VectorXd::Zero(model.d);
  const int n = grid.n;
  const double h = grid.dt();
  for (int k = 0; k <= n; ++k) {
    const double s = grid.time(k);
    const double w = (k == 0 || k == n) ? 0.5 * h : h;
    const Eigen::VectorXd val = sys.rhs(s, sol.psi.col(n - k));  // u + F(s, psi(T - s))
    for (int i = 0; i < model.d; ++i) {
      const double al = model.alpha[i];
      const double drift_part = model.mu0[i] * std::pow(s, al) / std::tgamma(al + 1.0);
      e.A(i) += w * val(i);
      e.B += w * val(i) * drift_part;
    }
  }
  return e;
}

LaplaceReport laplace_affine_check(const MarketModel& model, const std::vector<Stabilizer>& stab,
                                   const Eigen::VectorXd& u, const Grid& grid, int M, std::uint64_t seed,
                                   int chunk) {
  if (M < 2) throw ParameterError("Laplace check needs M >= 2");
  const LaplaceExponent ex = laplace_exponent(model, stab, u, grid);
  std::vector<GaussianBlockFactor> factors;
  for (int i = 0; i < model.d; ++i) factors.push_back(build_gaussian_factor(model.kernel(i), grid));
  SimulationOptions opt;
  opt.store_increments = false;
  const int n = grid.n;
  const double h = grid.dt();
  double sy = 0.0, syy = 0.0, sc = 0.0, sd = 0.0, sdd = 0.0;
  for (int start = 0; start < M; start += chunk) {
    const int cnt = std::min(chunk, M - start);
    opt.path_offset = start;
    const PathEnsemble ens = simulate_variance_paths(model, stab, factors, cnt, seed, opt);
    for (int m = 0; m < cnt; ++m) {
      double expo = 0.0, closed = ex.B;
      for (int i = 0; i < model.d; ++i) {
        double integral = 0.5 * (ens.v(m, i, 0) + ens.v(m, i, n));
        for (int k = 1; k < n; ++k) integral += ens.v(m, i, k);
        expo += u(i) * integral * h;
        closed += ens.v(m, i, 0) * ex.A(i);
      }
      const double y = std::exp(expo);
      const double c = std::exp(closed);
      sy += y;
      syy += y * y;
      sc += c;
      sd += y - c;
      sdd += (y - c) * (y - c);
    }
  }
  LaplaceReport rep;
  rep.mc_estimate = sy / M;
  rep.closed_form = sc / M;
  const double var_y = std::max(0.0, (syy - M * rep.mc_estimate * rep.mc_estimate) / (M - 1));
  const double md = sd / M;
  const double var_d = std::max(0.0, (sdd - M * md * md) / (M - 1));
  rep.mc_se = std::sqrt(var_y / M);
  rep.paired_se = std::sqrt(var_d / M);
  const double diff = std::fabs(rep.mc_estimate - rep.closed_form);
  rep.degenerate = !(rep.mc_se > 0.0);
  if (rep.degenerate) {
    rep.z_score = 0.0;
    rep.pass = diff <= 1e-12 * std::max(1.0, std::fabs(rep.closed_form));
  } else {
    rep.z_score = diff / rep.mc_se;
    rep.pass = rep.z_score <= 3.0;
  }
  return rep;
}

}  // namespace fsv
