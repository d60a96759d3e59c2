#pragma once

// Reference computations used only by the tests. They avoid the code paths of the
// library: extended-precision series, variable substitutions that remove kernel
// singularities before Gauss-Kronrod, and classical ODE solvers.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <functional>

namespace oracle {

using big = boost::multiprecision::cpp_bin_float_100;

// sum_k z^k / Gamma(alpha k + beta) in 100 digits.
inline double ml_series(double alpha, double beta, double z) {
  const big a = alpha, b = beta, x = z;
  big sum = 0, xk = 1;
  for (int k = 0; k < 4000; ++k) {
    const big term = xk / boost::math::tgamma(big(a * k + b));
    sum += term;
    if (k > 10 && abs(term) < big("1e-40") * abs(sum)) break;
    xk *= x;
  }
  return static_cast<double>(sum);
}

inline double mittag_leffler(double alpha, double z) { return ml_series(alpha, 1.0, z); }

// t^{alpha-1} E_{alpha,alpha}(-t^alpha).
inline double ml_density(double alpha, double t) {
  return std::pow(t, alpha - 1.0) * ml_series(alpha, alpha, -std::pow(t, alpha));
}

inline double gk(const std::function<double(double)>& f, double a, double b, double tol = 1e-13, int depth = 10) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, depth, tol);
}

// int_0^L u^{p-1} g(u) du with u = w^{1/p}, which is smooth in w.
inline double power_weighted(const std::function<double(double)>& g, double p, double L, double tol = 1e-11) {
  auto h = [&](double w) { return g(std::pow(w, 1.0 / p)) / p; };
  return gk(h, 0.0, std::pow(L, p), tol);
}

// int_0^L g(s) ds for g that is smooth in s^p (like a resolvent near the origin),
// with s = v^{2/p} so both g and the Jacobian are smooth in v.
inline double smooth_in_power(const std::function<double(double)>& g, double p, double L, double tol = 1e-11) {
  const double q = 2.0 / p;
  auto h = [&](double v) { return v > 0.0 ? g(std::pow(v, q)) * q * std::pow(v, q - 1.0) : 0.0; };
  return gk(h, 0.0, std::pow(L, 1.0 / q), tol);
}

// Classical RK4 for y' = f(t, y) on [0, T] with N steps, returning y at every step.
template <class Vec, class F>
std::vector<Vec> rk4(F&& f, Vec y, double T, int N) {
  std::vector<Vec> out{y};
  const double h = T / N;
  for (int k = 0; k < N; ++k) {
    const double t = k * h;
    const Vec k1 = f(t, y);
    const Vec k2 = f(t + 0.5 * h, Vec(y + 0.5 * h * k1));
    const Vec k3 = f(t + 0.5 * h, Vec(y + 0.5 * h * k2));
    const Vec k4 = f(t + h, Vec(y + h * k3));
    y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.push_back(y);
  }
  return out;
}

}  // namespace oracle
