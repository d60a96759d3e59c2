#include "doctest.h"

#include <cmath>
#include <vector>

#include "fsv/errors.hpp"
#include "fsv/kernels.hpp"
#include "fsv/markowitz.hpp"
#include "fsv/model.hpp"
#include "fsv/riccati.hpp"
#include "fsv/simulate.hpp"
#include "oracles.hpp"

using namespace fsv;

namespace {

std::vector<double> stationary_v0(const MarketModel& m) {
  std::vector<double> v;
  for (int i = 0; i < m.d; ++i) v.push_back(m.x_inf(i));
  return v;
}

struct Setup {
  MarketModel model = reference_model();
  std::vector<Stabilizer> stab = build_stabilizers(model);
  RiccatiSolution sol = solve_riccati_adams(model, stab, 600);
  double g0 = gamma0(model, stab, sol, stationary_v0(model));
};

const Setup& setup() {
  static const Setup s;
  return s;
}

}  // namespace

TEST_CASE("Gamma_0 on the reference model") {
  const Setup& s = setup();
  const double e2 = std::exp(2.0 * s.model.r * s.model.T);
  CHECK(s.g0 > 0.0);
  CHECK(s.g0 < e2);
  CHECK(s.g0 == doctest::Approx(0.8760938191).epsilon(1e-8));
  const Gamma0Forms f = gamma0_forms(s.model, s.stab, s.sol, stationary_v0(s.model));
  CHECK(f.relative_difference <= 1e-6);
  CHECK(f.fractional == s.g0);
}

TEST_CASE("Gamma_0 against quadrature of the interpolated Riccati solution") {
  // log Gamma_0 = 2rT + sum_i x_inf_i I^{1-alpha_i} psi_i(T) + mu0_i int_0^T psi_i.
  const Setup& s = setup();
  const double T = s.model.T;
  double expo = 2.0 * s.model.r * T;
  for (int i = 0; i < 2; ++i) {
    const double a = s.model.alpha[i];
    auto psi = [&](double t) { return s.sol.at(i, t); };
    const double ifrac =
        oracle::power_weighted([&](double u) { return psi(T - u); }, 1.0 - a, T, 1e-12) / std::tgamma(1.0 - a);
    const double i1 = oracle::gk(psi, 0.0, T, 1e-13);
    expo += s.model.x_inf(i) * ifrac + s.model.mu0[i] * i1;
  }
  CHECK(std::fabs(std::exp(expo) - s.g0) <= 1e-7);
}

TEST_CASE("Gamma_0 is e^{2rT} without market price of risk") {
  MarketModel m = reference_model();
  m.theta = {0.0, 0.0};
  const std::vector<Stabilizer> st = build_stabilizers(m);
  const RiccatiSolution sol = solve_riccati_adams(m, st, 200);
  CHECK(gamma0(m, st, sol, stationary_v0(m)) == doctest::Approx(std::exp(2.0 * m.r * m.T)).epsilon(1e-15));
}

TEST_CASE("Gamma_0 input validation") {
  const Setup& s = setup();
  CHECK_THROWS_AS(gamma0(s.model, s.stab, s.sol, {1.0}), ParameterError);
  CHECK_THROWS_AS(gamma0(s.model, s.stab, s.sol, {-1.0, 1.0}), ParameterError);
  MarketModel other = s.model;
  other.T = 2.0;
  CHECK_THROWS_AS(gamma0(other, s.stab, s.sol, stationary_v0(other)), ParameterError);
}

TEST_CASE("strategy constants and terminal variance identities") {
  const Setup& s = setup();
  const MarketModel& m = s.model;
  const double m0 = m.m0();
  const double e1 = std::exp(-m.r * m.T);
  const double slope = frontier_slope(s.g0, m);
  CHECK(slope == doctest::Approx(0.4336).epsilon(1e-3));
  for (double target : {m0, 2.1, 2.255, 3.0}) {
    const auto [xi, eta] = xi_eta_star(s.g0, m, target);
    CHECK(std::fabs(xi + eta - target) <= 1e-14 * target);
    // Independent forms: E[Z] = Gamma0 e^{-rT}, E[Z^2] = Gamma0.
    const double v = variance_of_terminal(s.g0, m, target);
    CHECK(v == doctest::Approx(s.g0 * std::pow(m.x0 - target * e1, 2) / (1.0 - s.g0 * e1 * e1)).epsilon(1e-14));
    CHECK(std::fabs(std::sqrt(v) * slope - (target - m0)) <= 1e-10);
  }
  const auto [xi0, eta0] = xi_eta_star(s.g0, m, m0);
  CHECK(xi0 == doctest::Approx(m0).epsilon(1e-14));
  CHECK(std::fabs(eta0) <= 1e-14);
  CHECK(variance_of_terminal(s.g0, m, m0) <= 1e-28);
  CHECK(variance_of_terminal(s.g0, m, 2.255) == doctest::Approx(0.2449).epsilon(1e-3));
  const auto fr = efficient_frontier(s.g0, m, {2.1, 2.5});
  REQUIRE(fr.size() == 2);
  CHECK(fr[1].second == 2.5);
  CHECK(fr[1].first == doctest::Approx(std::sqrt(variance_of_terminal(s.g0, m, 2.5))));

  const MarkowitzSolution ms = solve_markowitz(m, s.stab, s.sol, 2.255, stationary_v0(m));
  CHECK(ms.gamma0 == s.g0);
  CHECK(ms.xi_star + ms.eta_star == doctest::Approx(2.255).epsilon(1e-14));
  CHECK(ms.v_of_m == variance_of_terminal(s.g0, m, 2.255));
}

TEST_CASE("targets below the riskless growth are rejected") {
  const Setup& s = setup();
  CHECK_THROWS_AS(xi_eta_star(s.g0, s.model, s.model.m0() - 0.01), ParameterError);
  CHECK_THROWS_AS(variance_of_terminal(s.g0, s.model, 1.0), ParameterError);
  CHECK_THROWS_AS(xi_eta_star(std::exp(2.0 * s.model.r * s.model.T), s.model, 2.2), ParameterError);
  CHECK_THROWS_AS(xi_eta_star(-0.1, s.model, 2.2), ParameterError);
}

TEST_CASE("optimal control vanishes on the target and without variance") {
  const Setup& s = setup();
  const double xi = xi_eta_star(s.g0, s.model, 2.255).first;
  const Eigen::Vector2d V(10.0, 5.0);
  for (double t : {0.0, 0.3, 1.0}) {
    const double on_target = xi * std::exp(-s.model.r * (s.model.T - t));
    CHECK(optimal_control(s.model, s.sol, s.stab, xi, t, on_target, V).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(optimal_control(s.model, s.sol, s.stab, xi, t, 1.7, Eigen::Vector2d::Zero()).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::VectorXd a = optimal_control(s.model, s.sol, s.stab, xi, t, 1.7, V);
    // Below the target the strategy buys risk.
    CHECK(a.minCoeff() > 0.0);
  }
}

TEST_CASE("wealth paths are homogeneous in (x0, xi) and match the control") {
  const Setup& s = setup();
  const Grid g(1.0, 600);
  const PathEnsemble ens = simulate_variance_paths(s.model, s.stab, g, 30, 3);
  const double xi = xi_eta_star(s.g0, s.model, 2.255).first;
  const WealthEnsemble w = simulate_wealth(s.model, ens, s.sol, s.stab, xi, true);
  MarketModel doubled = s.model;
  doubled.x0 *= 2.0;
  const WealthEnsemble w2 = simulate_wealth(doubled, ens, s.sol, s.stab, 2.0 * xi);
  double worst = 0.0;
  for (int p = 0; p < 30; ++p)
    for (int k = 0; k <= g.n; ++k) worst = std::max(worst, std::fabs(w2.x(p, k) - 2.0 * w.x(p, k)) / std::fabs(w.x(p, k)));
  CHECK(worst <= 1e-12);

  for (int p : {0, 17}) {
    for (int k : {0, 100, 599}) {
      const Eigen::Vector2d V(ens.v(p, 0, k), ens.v(p, 1, k));
      const Eigen::VectorXd a = optimal_control(s.model, s.sol, s.stab, xi, g.time(k), w.x(p, k), V);
      for (int i = 0; i < 2; ++i)
        CHECK(w.alpha[(static_cast<std::size_t>(p) * 2 + i) * g.n + k] == doctest::Approx(a(i)).epsilon(1e-12));
    }
  }

  const std::vector<double> same(30, xi);
  const WealthEnsemble w3 = simulate_wealth(s.model, ens, s.sol, s.stab, 0.0, false, &same);
  CHECK(w3.X == w.X);
  const std::vector<double> wrong(3, xi);
  CHECK_THROWS_AS(simulate_wealth(s.model, ens, s.sol, s.stab, 0.0, false, &wrong), ParameterError);
  const RiccatiSolution coarse = solve_riccati_adams(s.model, s.stab, 300);
  CHECK_THROWS_AS(simulate_wealth(s.model, ens, coarse, s.stab, xi), ParameterError);
}

TEST_CASE("terminal wealth at small M is close to the theory") {
  const Setup& s = setup();
  const Grid g(1.0, 600);
  const int M = 2000;
  const PathEnsemble ens = simulate_variance_paths(s.model, s.stab, g, M, 21);
  const double xi = xi_eta_star(s.g0, s.model, 2.255).first;
  const WealthEnsemble w = simulate_wealth(s.model, ens, s.sol, s.stab, xi);
  const double V = variance_of_terminal(s.g0, s.model, 2.255);
  INFO("mean " << w.terminal_mean << " var " << w.terminal_var << " theory " << V);
  CHECK(std::fabs(w.terminal_mean - 2.255) <= 3.0 * std::sqrt(w.terminal_var / M));
  CHECK(std::fabs(w.terminal_var - V) <= 0.1 * V);
}

TEST_CASE("Laplace closed form without vol of vol") {
  // With nu = 0 the variance is deterministic: V = V0 R + x_inf (1 - R), so
  // log E exp(u int V) = u V0 int R + u x_inf int (1 - R).
  MarketModel m = reference_model();
  m.nu = {0.0, 0.0};
  const std::vector<Stabilizer> st = build_stabilizers(m);
  const Eigen::Vector2d u(-0.05, -0.2);
  const LaplaceExponent e = laplace_exponent(m, st, u, Grid(1.0, 600));
  double B = 0.0;
  for (int i = 0; i < 2; ++i) {
    const ResolventSpec rs(m.kernel(i), m.lam[i]);
    const double intR = oracle::smooth_in_power([&](double t) { return resolvent(rs, t); }, m.alpha[i], 1.0, 1e-13);
    CHECK(e.A(i) == doctest::Approx(u(i) * intR).epsilon(1e-5));
    B += u(i) * m.x_inf(i) * (1.0 - intR);
  }
  CHECK(e.B == doctest::Approx(B).epsilon(1e-4));
}

TEST_CASE("Laplace affine check") {
  const MarketModel m = reference_model();
  const std::vector<Stabilizer> st = build_stabilizers(m);
  const Grid g(1.0, 200);
  const LaplaceReport zero = laplace_affine_check(m, st, Eigen::Vector2d::Zero(), g, 64, 4);
  CHECK(zero.closed_form == 1.0);
  CHECK(zero.mc_estimate == 1.0);
  CHECK(zero.pass);
  const LaplaceReport rep = laplace_affine_check(m, st, Eigen::Vector2d(-0.05, -0.05), g, 3000, 5, 1000);
  INFO("mc " << rep.mc_estimate << " cf " << rep.closed_form << " z " << rep.z_score);
  CHECK(rep.pass);
  CHECK(rep.closed_form == doctest::Approx(0.47237).epsilon(2e-3));
  CHECK(rep.paired_se < rep.mc_se);
  CHECK_THROWS_AS(laplace_affine_check(m, st, Eigen::Vector2d(0.1, 0.0), g, 10, 1), ParameterError);
  CHECK_THROWS_AS(laplace_affine_check(m, st, Eigen::Vector2d::Zero(), g, 1, 1), ParameterError);
}
