#include "fsv/kernels.hpp"

#include <algorithm>
#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "fsv/errors.hpp"
#include "fsv/quadrature.hpp"

namespace fsv {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();
constexpr int kSegmentNodes = 32;

void check_alpha(double alpha) {
  if (!(alpha > 0.5 && alpha <= 1.0))
    throw ParameterError("kernel order alpha must lie in (1/2, 1], got " + std::to_string(alpha));
}

// sum_k z^k / Gamma(alpha k + beta) in extended precision. rel_err receives an
// estimate of the relative rounding error caused by cancellation; it is set to
// infinity when the series did not converge within the term budget.
long double ml_series(double alpha, double beta, double z, double* rel_err) {
  const long double zl = z;
  long double sum = 0.0L;
  long double biggest = 0.0L;
  long double zk = 1.0L;
  long double prev = std::numeric_limits<long double>::infinity();
  constexpr int kMaxTerms = 3000;
  for (int k = 0; k < kMaxTerms; ++k) {
    const long double arg = static_cast<long double>(alpha) * k + beta;
    const long double term = zk / std::tgamma(arg);
    sum += term;
    biggest = std::max(biggest, std::fabs(term));
    const long double at = std::fabs(term);
    if (k > 2 && at < prev && at <= 1e-18L * std::fabs(sum)) {
      const long double eps = std::numeric_limits<long double>::epsilon();
      *rel_err = static_cast<double>(biggest * eps * (k + 1) / std::max(std::fabs(sum), 1e-300L));
      return sum;
    }
    if (sum == 0.0L && at == 0.0L && k > 2) break;
    prev = at;
    zk *= zl;
    if (!std::isfinite(static_cast<double>(zk))) break;
  }
  *rel_err = std::numeric_limits<double>::infinity();
  return sum;
}

// int_0^inf r^moment e^{-r tau} K_alpha(r) dr with the spectral density
// K_alpha(r) = sin(alpha pi)/pi * r^{alpha-1} / (r^{2 alpha} + 2 r^alpha cos(alpha pi) + 1).
// moment 0 gives E_alpha(-tau^alpha), moment 1 gives ml_density(alpha, tau).
double ml_laplace_integral(double alpha, double tau, int moment) {
  const double sa = std::sin(alpha * kPi) / kPi;
  const double ca = std::cos(alpha * kPi);
  auto integrand = [=](double r) {
    if (!(r > 0.0) || !std::isfinite(r) || r * tau > 745.0) return 0.0;
    const double ra = std::pow(r, alpha);
    // r^{alpha-1} / (r^{2 alpha} + ...) written to avoid overflow at large r.
    const double v_core = ra > 1.0 ? 1.0 / (r * (ra + 2.0 * ca + 1.0 / ra)) : ra / (r * (ra * ra + 2.0 * ra * ca + 1.0));
    double v = sa * v_core * std::exp(-r * tau);
    if (moment == 1) v *= r;
    return v;
  };
  thread_local boost::math::quadrature::tanh_sinh<double> ts;
  thread_local boost::math::quadrature::exp_sinh<double> es;
  const double tol = 1e-13;
  // Split at r = 1 where the density peaks for alpha close to 1.
  const double head = ts.integrate(integrand, 0.0, 1.0, tol);
  const double tail = es.integrate(integrand, 1.0, std::numeric_limits<double>::infinity(), tol);
  return head + tail;
}

constexpr double kSeriesRelTol = 1e-14;
constexpr double kSeriesRadius = 5.0;

double ml_negative(double alpha, double x) {
  // E_alpha(-x), x > 0.
  if (x <= kSeriesRadius) {
    double err = 0.0;
    const long double s = ml_series(alpha, 1.0, -x, &err);
    if (err < kSeriesRelTol) return static_cast<double>(s);
  }
  return ml_laplace_integral(alpha, std::pow(x, 1.0 / alpha), 0);
}

// Gauss-Legendre on [lo, hi].
template <class F>
double gl_segment(F&& g, double lo, double hi) {
  const QuadratureRule& q = gauss_legendre(kSegmentNodes);
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  double acc = 0.0;
  for (int i = 0; i < kSegmentNodes; ++i) acc += q.weights[i] * g(mid + half * q.nodes[i]);
  return acc * half;
}

// int_a^b g(s) ds where g is smooth on [a, b] but may be singular at b + dist.
// Pieces are graded so each one sits at least its own length from the singularity.
template <class F>
double graded_regular(F&& g, double a, double b, double dist) {
  if (!(dist > 0.0) || dist >= b - a) return gl_segment(g, a, b);
  double acc = 0.0;
  double hi = b;
  double len = dist;
  while (hi > a) {
    const double lo = std::max(a, hi - len);
    acc += gl_segment(g, lo, hi);
    hi = lo;
    len *= 2.0;
  }
  return acc;
}

void check_segment(double a, double b, double t_max) {
  const double slack = 1e-12 * std::max(1.0, std::fabs(t_max));
  if (!(a < b) || b > t_max + slack)
    throw DomainError("segment requires a < b <= t_k");
}

}  // namespace

const char* to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::fractional: return "fractional";
    case KernelFamily::gamma: return "gamma";
    case KernelFamily::exponential: return "exponential";
    case KernelFamily::constant: return "constant";
  }
  return "unknown";
}

KernelSpec::KernelSpec(KernelFamily f, double alpha, double beta)
    : family_(f), alpha_(alpha), beta_(beta), inv_gamma_alpha_(1.0 / std::tgamma(alpha)) {}

KernelSpec KernelSpec::fractional(double alpha) {
  check_alpha(alpha);
  return KernelSpec(KernelFamily::fractional, alpha, 0.0);
}

KernelSpec KernelSpec::gamma(double alpha, double beta) {
  check_alpha(alpha);
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ParameterError("gamma kernel requires beta >= 0");
  return KernelSpec(KernelFamily::gamma, alpha, beta);
}

KernelSpec KernelSpec::exponential(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ParameterError("exponential kernel requires beta > 0");
  return KernelSpec(KernelFamily::exponential, 1.0, beta);
}

KernelSpec KernelSpec::constant() { return KernelSpec(KernelFamily::constant, 1.0, 0.0); }

double KernelSpec::operator()(double t) const {
  switch (family_) {
    case KernelFamily::constant:
      return 1.0;
    case KernelFamily::exponential:
      return std::exp(-beta_ * t);
    case KernelFamily::fractional:
    case KernelFamily::gamma:
      if (alpha_ == 1.0) return std::exp(-beta_ * t);
      if (!(t > 0.0)) throw DomainError("singular kernel evaluated at t <= 0");
      return std::pow(t, alpha_ - 1.0) * std::exp(-beta_ * t) * inv_gamma_alpha_;
  }
  return 0.0;
}

double KernelSpec::regular_part(double t) const {
  switch (family_) {
    case KernelFamily::constant: return 1.0;
    case KernelFamily::exponential: return std::exp(-beta_ * t);
    default: return std::exp(-beta_ * t) * inv_gamma_alpha_;
  }
}

ResolventSpec::ResolventSpec(KernelSpec k, double lam) : kernel(k), lambda(lam) {
  if (!(lam > 0.0) || !std::isfinite(lam)) throw ParameterError("resolvent requires lambda > 0");
}

double eval_kernel(const KernelSpec& spec, double t) { return spec(t); }

double mittag_leffler(double alpha, double z) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("Mittag-Leffler order must lie in (0, 1]");
  if (z == 0.0) return 1.0;
  if (alpha == 1.0) return std::exp(z);
  if (z < 0.0) return ml_negative(alpha, -z);
  double err = 0.0;
  const long double s = ml_series(alpha, 1.0, z, &err);
  if (!std::isfinite(err)) throw NumericalError("Mittag-Leffler series did not converge");
  return static_cast<double>(s);
}

double ml_density(double alpha, double t) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("Mittag-Leffler order must lie in (0, 1]");
  if (!(t > 0.0)) throw DomainError("resolvent density requires t > 0");
  if (alpha == 1.0) return std::exp(-t);
  const double x = std::pow(t, alpha);
  if (x <= kSeriesRadius) {
    double err = 0.0;
    const long double s = ml_series(alpha, alpha, -x, &err);
    if (err < kSeriesRelTol) return std::pow(t, alpha - 1.0) * static_cast<double>(s);
  }
  return ml_laplace_integral(alpha, t, 1);
}

namespace {

double fractional_density(double alpha, double lambda, double t) {
  const double scale = std::pow(lambda, 1.0 / alpha);
  return scale * ml_density(alpha, scale * t);
}

}  // namespace

double resolvent(const ResolventSpec& spec, double t) {
  if (!(t >= 0.0)) throw DomainError("resolvent requires t >= 0");
  if (t == 0.0) return 1.0;
  const KernelSpec& k = spec.kernel;
  const double lam = spec.lambda;
  switch (k.family()) {
    case KernelFamily::constant:
      return std::exp(-lam * t);
    case KernelFamily::fractional:
      return mittag_leffler(k.alpha(), -lam * std::pow(t, k.alpha()));
    case KernelFamily::gamma:
    case KernelFamily::exponential: {
      if (k.beta() == 0.0) return mittag_leffler(k.alpha(), -lam * std::pow(t, k.alpha()));
      // R = 1 - int_0^t f_lambda, with f_lambda the tilted fractional density.
      const double alpha = k.alpha();
      const double beta = k.beta();
      auto f = [=](double s) { return s > 0.0 ? std::exp(-beta * s) * fractional_density(alpha, lam, s) : 0.0; };
      thread_local boost::math::quadrature::tanh_sinh<double> ts;
      return 1.0 - ts.integrate(f, 0.0, t, 1e-13);
    }
  }
  return 0.0;
}

double resolvent_density(const ResolventSpec& spec, double t) {
  if (!(t > 0.0)) throw DomainError("resolvent density requires t > 0");
  const KernelSpec& k = spec.kernel;
  const double lam = spec.lambda;
  switch (k.family()) {
    case KernelFamily::constant:
      return lam * std::exp(-lam * t);
    case KernelFamily::fractional:
      return fractional_density(k.alpha(), lam, t);
    case KernelFamily::gamma:
    case KernelFamily::exponential:
      return std::exp(-k.beta() * t) * fractional_density(k.alpha(), lam, t);
  }
  return 0.0;
}

double power_diff1(double m, double p) {
  if (m == 0.0) return 1.0;
  return std::pow(m, p) * std::expm1(p * std::log1p(1.0 / m));
}

double power_diff2(double m, double p) {
  const double u = m + 1.0;
  if (u < 16.0) return std::pow(m + 2.0, p) - 2.0 * std::pow(u, p) + std::pow(m, p);
  // u^p [(1+h)^p + (1-h)^p - 2] = 2 u^p sum_k C(p, 2k) h^{2k}, h = 1/u.
  const double h2 = 1.0 / (u * u);
  double binom = p * (p - 1.0) / 2.0;
  double hk = h2;
  double sum = 0.0;
  for (int k = 1; k < 60; ++k) {
    const double term = binom * hk;
    sum += term;
    if (std::fabs(term) <= 1e-18 * std::fabs(sum)) break;
    const double j = 2.0 * k;
    binom *= (p - j) * (p - j - 1.0) / ((j + 1.0) * (j + 2.0));
    hk *= h2;
  }
  return 2.0 * std::pow(u, p) * sum;
}

std::vector<double> product_integration_weights(double r, int N, double h) {
  if (!(r > 0.0 && r <= 1.0)) throw ParameterError("fractional order must lie in (0, 1]");
  if (N < 1) throw DomainError("product integration needs at least two grid points");
  const double c = std::pow(h, r) / std::tgamma(r + 2.0);
  std::vector<double> w(N + 1);
  const double m = N - 1;
  // (N-1)^{r+1} - (N-1-r) N^r rearranged as r(m+1)^r - m [(m+1)^r - m^r].
  w[0] = c * (r * std::pow(m + 1.0, r) - (m > 0.0 ? m * power_diff1(m, r) : 0.0));
  for (int j = 1; j < N; ++j) w[j] = c * power_diff2(N - j - 1, r + 1.0);
  w[N] = c;
  return w;
}

double fractional_integral(double r, std::span<const double> f, double T) {
  if (f.size() < 2) throw DomainError("fractional integral needs at least two grid points");
  if (!(T > 0.0)) throw DomainError("fractional integral needs T > 0");
  const int N = static_cast<int>(f.size()) - 1;
  const std::vector<double> w = product_integration_weights(r, N, T / N);
  double acc = 0.0;
  for (int j = 0; j <= N; ++j) acc += w[j] * f[j];
  return acc;
}

double kernel_mean_segment(const KernelSpec& spec, double t_k, double a, double b) {
  check_segment(a, b, t_k);
  const double ua = t_k - a;
  const double ub = std::max(0.0, t_k - b);
  switch (spec.family()) {
    case KernelFamily::constant:
      return b - a;
    case KernelFamily::fractional:
      return (std::pow(ua, spec.alpha()) - std::pow(ub, spec.alpha())) / std::tgamma(spec.alpha() + 1.0);
    case KernelFamily::gamma:
    case KernelFamily::exponential: {
      const double al = spec.alpha();
      const double be = spec.beta();
      if (be == 0.0) return (std::pow(ua, al) - std::pow(ub, al)) / std::tgamma(al + 1.0);
      using boost::math::gamma_p;
      return (gamma_p(al, be * ua) - gamma_p(al, be * ub)) / std::pow(be, al);
    }
  }
  return 0.0;
}

double kernel_cross_segment(const KernelSpec& spec, double t_k, double t_k2, double a, double b) {
  const double t1 = std::min(t_k, t_k2);
  const double t2 = std::max(t_k, t_k2);
  check_segment(a, b, t1);
  if (spec.family() == KernelFamily::constant) return b - a;

  const double al = spec.alpha();
  const double be = spec.beta();
  const double ua1 = t1 - a;
  const double ub1 = std::max(0.0, t1 - b);

  if (t1 == t2) {
    if (be == 0.0) {
      if (al == 1.0) return b - a;
      const double g = std::tgamma(al);
      const double q = 2.0 * al - 1.0;
      return (std::pow(ua1, q) - std::pow(ub1, q)) / (q * g * g);
    }
    using boost::math::gamma_p;
    const double q = 2.0 * al - 1.0;
    const double g = std::tgamma(al);
    const double pref = std::tgamma(q) / (g * g * std::pow(2.0 * be, q));
    return pref * (gamma_p(q, 2.0 * be * ua1) - gamma_p(q, 2.0 * be * ub1));
  }

  if (al == 1.0 && be > 0.0) {
    // Exponential kernel: closed form.
    return std::exp(-be * (t1 + t2)) * (std::exp(2.0 * be * b) - std::exp(2.0 * be * a)) / (2.0 * be);
  }
  if (al == 1.0) return b - a;

  auto regular = [&](double s) { return spec(t1 - s) * spec(t2 - s); };
  const double delta = t2 - t1;
  const double scale_tol = 1e-12 * std::max(1.0, std::fabs(t1));
  if (t1 - b > scale_tol) return graded_regular(regular, a, b, t1 - b);

  // Singular endpoint at s = b = t1: weight (t1 - s)^{alpha-1} handled by Gauss-Jacobi.
  thread_local double cached_alpha = -1.0;
  thread_local QuadratureRule gj;
  if (cached_alpha != al) {
    gj = gauss_jacobi(kSegmentNodes, al - 1.0, 0.0);
    cached_alpha = al;
  }
  auto jacobi_piece = [&](double lo) {
    const double len = b - lo;
    double acc = 0.0;
    for (int i = 0; i < kSegmentNodes; ++i) {
      const double x = gj.nodes[i];
      const double u = 0.5 * len * (1.0 - x);  // t1 - s
      const double s = b - u;
      acc += gj.weights[i] * spec.regular_part(u) * spec(t2 - s);
    }
    return acc * std::pow(0.5 * len, al);
  };
  if (b - a <= delta) return jacobi_piece(a);
  return jacobi_piece(b - delta) + graded_regular(regular, a, b - delta, delta);
}

}  // namespace fsv
