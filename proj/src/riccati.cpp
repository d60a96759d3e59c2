#include "fsv/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fsv/errors.hpp"
#include "fsv/kernels.hpp"

namespace fsv {

Eigen::VectorXd RiccatiSystem::rhs(double s, const Eigen::VectorXd& psi) const {
  Eigen::VectorXd out = forcing + D.transpose() * psi;
  for (int i = 0; i < dim(); ++i) {
    const double p = psi(i);
    out(i) += lin[i](s) * p + quad[i](s) * p * p;
  }
  return out;
}

RiccatiSystem RiccatiSystem::component(int i) const {
  RiccatiSystem one;
  one.T = T;
  one.alpha = {alpha[i]};
  one.forcing = Eigen::VectorXd::Constant(1, forcing(i));
  one.D = Eigen::MatrixXd::Constant(1, 1, D(i, i));
  one.lin = {lin[i]};
  one.quad = {quad[i]};
  return one;
}

RiccatiSystem markowitz_system(const MarketModel& model, const std::vector<Stabilizer>& stab) {
  if (static_cast<int>(stab.size()) != model.d) throw ParameterError("one stabilizer per asset required");
  RiccatiSystem sys;
  sys.T = model.T;
  sys.alpha = model.alpha;
  sys.forcing.resize(model.d);
  sys.D = Eigen::MatrixXd::Zero(model.d, model.d);
  for (int i = 0; i < model.d; ++i) {
    const double th = model.theta[i], rh = model.rho[i], nu = model.nu[i];
    sys.forcing(i) = -th * th;
    sys.D(i, i) = -model.lam[i];
    const Stabilizer s = stab[i];
    sys.lin.push_back([=](double t) { return -2.0 * th * rh * nu * s(t); });
    const double q = 0.5 * nu * nu * (1.0 - 2.0 * rh * rh);
    sys.quad.push_back([=](double t) {
      const double v = s(t);
      return q * v * v;
    });
  }
  return sys;
}

RiccatiSystem laplace_system(const MarketModel& model, const std::vector<Stabilizer>& stab,
                             const Eigen::VectorXd& u) {
  if (static_cast<int>(stab.size()) != model.d) throw ParameterError("one stabilizer per asset required");
  if (u.size() != model.d) throw ParameterError("Laplace argument must have d entries");
  RiccatiSystem sys;
  sys.T = model.T;
  sys.alpha = model.alpha;
  sys.forcing = u;
  sys.D = Eigen::MatrixXd::Zero(model.d, model.d);
  for (int i = 0; i < model.d; ++i) {
    sys.D(i, i) = -model.lam[i];
    const Stabilizer s = stab[i];
    const double q = 0.5 * model.nu[i] * model.nu[i];
    sys.lin.push_back([](double) { return 0.0; });
    sys.quad.push_back([=](double t) {
      const double v = s(t);
      return q * v * v;
    });
  }
  return sys;
}

double RiccatiSolution::at(int i, double t) const {
  const double x = std::clamp(t, 0.0, grid.T) / grid.dt();
  const int k = std::min(static_cast<int>(x), grid.n - 1);
  const double w = x - k;
  return (1.0 - w) * psi(i, k) + w * psi(i, k + 1);
}

Eigen::VectorXd riccati_rhs(const MarketModel& model, const std::vector<Stabilizer>& stab, double s,
                            const Eigen::VectorXd& psi) {
  return markowitz_system(model, stab).rhs(s, psi);
}

namespace {

// lin and quad coefficients at the reversed times T - t_j.
struct Coefficients {
  Eigen::MatrixXd lin, quad;
};

Coefficients tabulate(const RiccatiSystem& sys, const Grid& g) {
  const int d = sys.dim();
  Coefficients c{Eigen::MatrixXd(d, g.n + 1), Eigen::MatrixXd(d, g.n + 1)};
  for (int j = 0; j <= g.n; ++j) {
    const double s = std::max(0.0, g.T - g.time(j));
    for (int i = 0; i < d; ++i) {
      c.lin(i, j) = sys.lin[i](s);
      c.quad(i, j) = sys.quad[i](s);
    }
  }
  return c;
}

Eigen::VectorXd eval_rhs(const RiccatiSystem& sys, const Coefficients& c, int j, const Eigen::VectorXd& psi) {
  Eigen::VectorXd out = sys.forcing + sys.D.transpose() * psi;
  out.array() += c.lin.col(j).array() * psi.array() + c.quad.col(j).array() * psi.array().square();
  return out;
}

void check_system(const RiccatiSystem& sys) {
  const int d = sys.dim();
  if (d < 1 || sys.forcing.size() != d || sys.D.rows() != d || sys.D.cols() != d ||
      static_cast<int>(sys.lin.size()) != d || static_cast<int>(sys.quad.size()) != d)
    throw ParameterError("inconsistent Riccati system dimensions");
  for (double a : sys.alpha)
    if (!(a > 0.0 && a <= 1.0)) throw ParameterError("Riccati kernel order must lie in (0, 1]");
}

}  // namespace

RiccatiSolution solve_adams(const RiccatiSystem& sys, int n, const Eigen::VectorXd& cap) {
  check_system(sys);
  if (n < 2) throw ParameterError("Adams solver needs n >= 2");
  const int d = sys.dim();
  const Grid g(sys.T, n);
  const double h = g.dt();
  const Coefficients coef = tabulate(sys, g);

  std::vector<std::vector<double>> bw(d), aw(d), a0(d);
  std::vector<double> alast(d);
  for (int i = 0; i < d; ++i) {
    const double al = sys.alpha[i];
    const double cb = std::pow(h, al) / std::tgamma(al + 1.0);
    const double ca = std::pow(h, al) / std::tgamma(al + 2.0);
    bw[i].resize(n + 1);
    aw[i].resize(n + 1);
    a0[i].resize(n + 1);
    for (int m = 0; m <= n; ++m) {
      bw[i][m] = cb * power_diff1(m, al);
      aw[i][m] = ca * power_diff2(m, al + 1.0);
      a0[i][m] = ca * (al * std::pow(m + 1.0, al) - (m > 0 ? m * power_diff1(m, al) : 0.0));
    }
    alast[i] = ca;
  }

  Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(d, n + 1);
  std::vector<std::vector<double>> f(d, std::vector<double>(n + 1, 0.0));
  Eigen::VectorXd y = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd fy = eval_rhs(sys, coef, 0, y);
  for (int i = 0; i < d; ++i) f[i][0] = fy(i);

  Eigen::VectorXd pred(d), corr(d);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < d; ++i) {
      const double* fi = f[i].data();
      const double* b = bw[i].data();
      const double* a = aw[i].data();
      double sp = 0.0, sc = a0[i][k] * fi[0];
      for (int j = 0; j <= k; ++j) sp += b[k - j] * fi[j];
      for (int j = 1; j <= k; ++j) sc += a[k - j] * fi[j];
      pred(i) = sp;
      corr(i) = sc;
    }
    const Eigen::VectorXd fp = eval_rhs(sys, coef, k + 1, pred);
    for (int i = 0; i < d; ++i) y(i) = corr(i) + alast[i] * fp(i);
    for (int i = 0; i < d; ++i) {
      if (!std::isfinite(y(i)) || std::fabs(y(i)) > cap(i)) {
        std::ostringstream os;
        os << "Riccati solution diverged: |psi_" << i << "(" << g.time(k + 1) << ")| = " << std::fabs(y(i))
           << " exceeds cap " << cap(i);
        throw RiccatiDivergence(os.str());
      }
    }
    psi.col(k + 1) = y;
    fy = eval_rhs(sys, coef, k + 1, y);
    for (int i = 0; i < d; ++i) f[i][k + 1] = fy(i);
  }
  return RiccatiSolution(g, std::move(psi));
}

RiccatiBound riccati_bound(const MarketModel& model, const std::vector<Stabilizer>& stab, double T) {
  if (static_cast<int>(stab.size()) != model.d) throw ParameterError("one stabilizer per asset required");
  RiccatiBound b;
  b.lambda_bar.resize(model.d);
  b.bound.resize(model.d);
  b.applicable.assign(model.d, false);
  for (int i = 0; i < model.d; ++i) {
    const double th = model.theta[i];
    double lb = model.lam[i];
    if (model.rho[i] <= 0.0) lb += 2.0 * model.nu[i] * model.rho[i] * th * stab[i].sup_norm(T);
    b.lambda_bar(i) = lb;
    if (lb > 0.0) {
      b.applicable[i] = true;
      const ResolventSpec rs(KernelSpec::fractional(model.alpha[i]), lb);
      b.bound(i) = th * th / lb * (1.0 - resolvent(rs, T));
    } else {
      b.bound(i) = std::numeric_limits<double>::infinity();
    }
  }
  return b;
}

RiccatiSolution solve_riccati_adams(const MarketModel& model, const std::vector<Stabilizer>& stab, int n) {
  model.validate();
  const RiccatiBound b = riccati_bound(model, stab, model.T);
  Eigen::VectorXd cap(model.d);
  for (int i = 0; i < model.d; ++i) cap(i) = b.applicable[i] ? 10.0 * b.bound(i) : 1e6;
  return solve_adams(markowitz_system(model, stab), n, cap);
}

RiccatiSolution picard_solve(const RiccatiSystem& sys, int n_fine, int sweeps, PicardReport* report) {
  check_system(sys);
  if (n_fine < 2) throw ParameterError("Picard oracle needs n_fine >= 2");
  if (sweeps < 1) throw ParameterError("Picard oracle needs sweeps >= 1");
  const int d = sys.dim();
  const Grid g(sys.T, n_fine);
  const double h = g.dt();
  const Coefficients coef = tabulate(sys, g);

  // Exact kernel mass of cell j as seen from t_k depends on the lag k - 1 - j.
  std::vector<std::vector<double>> w(d, std::vector<double>(n_fine));
  for (int i = 0; i < d; ++i) {
    const double al = sys.alpha[i];
    const double cb = std::pow(h, al) / std::tgamma(al + 1.0);
    for (int m = 0; m < n_fine; ++m) w[i][m] = cb * power_diff1(m, al);
  }

  Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(d, n_fine + 1);
  Eigen::MatrixXd next(d, n_fine + 1);
  std::vector<double> hv(n_fine + 1);
  double change = std::numeric_limits<double>::infinity();
  int done = 0;
  while (done < sweeps) {
    Eigen::MatrixXd fv(d, n_fine + 1);
    for (int j = 0; j <= n_fine; ++j) fv.col(j) = eval_rhs(sys, coef, j, psi.col(j));
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j <= n_fine; ++j) hv[j] = fv(i, j);
      next(i, 0) = 0.0;
      const double* wi = w[i].data();
      for (int k = 1; k <= n_fine; ++k) {
        double acc = 0.0;
        for (int j = 0; j < k; ++j) acc += wi[k - 1 - j] * hv[j];
        next(i, k) = acc;
      }
    }
    if (!next.allFinite()) throw NumericalError("Picard iteration produced non-finite values");
    change = (next - psi).cwiseAbs().maxCoeff();
    psi.swap(next);
    ++done;
    if (change < 1e-10) break;
  }
  if (report) {
    report->sweeps = done;
    report->last_change = change;
  }
  if (!(change < 1e-10)) {
    std::ostringstream os;
    os << "Picard iteration did not converge after " << done << " sweeps (last change " << change << ")";
    throw NumericalError(os.str());
  }
  return RiccatiSolution(g, std::move(psi));
}

RiccatiSolution oracle_volterra_picard(const MarketModel& model, const std::vector<Stabilizer>& stab,
                                       int n_fine, int sweeps) {
  model.validate();
  return picard_solve(markowitz_system(model, stab), n_fine, sweeps);
}

double admissibility_constant(double p, double sigma_norm) {
  return std::max(p * (2.0 + sigma_norm), 2.0 * (8.0 * p * p - 2.0 * p) * (1.0 + sigma_norm * sigma_norm));
}

std::string AdmissibilityReport::str() const {
  std::ostringstream os;
  os << (pass ? "pass" : "fail") << ": sup(theta^2 + nu^2 sigma^2 psi^2) = " << lhs << ", a(p) = " << a_p
     << ", threshold a/a(p) = " << threshold;
  return os.str();
}

AdmissibilityReport check_admissibility(const MarketModel& model, const std::vector<Stabilizer>& stab,
                                        const RiccatiSolution& sol, double p, double a) {
  if (!(p >= 1.0)) throw ParameterError("admissibility requires p >= 1");
  if (!(a > 0.0)) throw ParameterError("admissibility requires a > 0");
  double sig = 0.0;
  for (int i = 0; i < model.d; ++i) sig += model.rho[i] * model.rho[i];
  AdmissibilityReport rep;
  rep.a_p = admissibility_constant(p, sig);
  rep.threshold = a / rep.a_p;
  const Grid& g = sol.grid;
  for (int i = 0; i < model.d; ++i) {
    for (int k = 0; k <= g.n; ++k) {
      const double t = g.time(k);
      const double s = stab[i](t);
      const double ps = sol.psi(i, g.n - k);
      const double v = model.theta[i] * model.theta[i] + model.nu[i] * model.nu[i] * s * s * ps * ps;
      rep.lhs = std::max(rep.lhs, v);
    }
  }
  rep.pass = rep.lhs <= rep.threshold;
  return rep;
}

}  // namespace fsv
