#include "fsv/stabilizer.hpp"

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "fsv/errors.hpp"
#include "fsv/kernels.hpp"

namespace fsv {

namespace {

void check_order(double alpha) {
  if (!(alpha > 0.5 && alpha < 1.0))
    throw ParameterError("stabilizer order alpha must lie in (1/2, 1)");
}

struct SeriesSum {
  long double sum;
  long double biggest;
  long double last;
  long double before_last;
};

SeriesSum alternating_sum(const std::vector<double>& c, double alpha, double u) {
  SeriesSum s{0.0L, 0.0L, 0.0L, 0.0L};
  const long double x = std::pow(static_cast<long double>(u), static_cast<long double>(alpha));
  long double xk = 1.0L;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const long double term = c[k] * xk;
    s.sum += (k % 2 == 0) ? term : -term;
    s.biggest = std::max(s.biggest, std::fabs(term));
    s.before_last = s.last;
    s.last = term;
    xk *= x;
  }
  return s;
}

// The truncated series is trusted at u when its tail has converged at the
// truncation point and alternating cancellation has not eaten the precision.
bool series_trusted(const std::vector<double>& c, double alpha, double u) {
  const SeriesSum s = alternating_sum(c, alpha, u);
  if (!(s.sum > 0.0L)) return false;
  const long double eps = std::numeric_limits<long double>::epsilon();
  const bool tail_small = std::fabs(s.last) <= 1e-17L * s.sum;
  const bool ratio_ok = s.before_last != 0.0L && std::fabs(s.last / s.before_last) < 0.5L;
  const bool cancel_ok = s.biggest * eps * c.size() <= 1e-13L * s.sum;
  return tail_small && ratio_ok && cancel_ok;
}

double find_switch_point(const std::vector<double>& c, double alpha) {
  double lo = 0.0;
  double hi = std::ldexp(1.0, -12);
  while (series_trusted(c, alpha, hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e8) return hi;
  }
  if (lo == 0.0) throw NumericalError("stabilizer series unusable even near the origin");
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (series_trusted(c, alpha, mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace

std::vector<double> stabilizer_coeffs(double alpha, int K) {
  check_order(alpha);
  if (K < 1) throw ParameterError("truncation order must be >= 1");
  // The recurrence cancels about one digit per term for alpha near 1, so it runs
  // in 50-digit arithmetic.
  using mp = boost::multiprecision::cpp_bin_float_50;
  using boost::math::tgamma;
  using boost::math::lgamma;
  const mp al = alpha;
  std::vector<mp> a(K + 1), b(K + 1), ab(K + 1), bb(K + 1);
  for (int k = 0; k <= K; ++k) {
    a[k] = 1 / tgamma(mp(al * k + 1));
    b[k] = 1 / tgamma(mp(al * (k + 1)));
  }
  for (int k = 0; k <= K; ++k) {
    mp s1 = 0, s2 = 0;
    for (int l = 0; l <= k; ++l) {
      s1 += a[l] * b[k - l];
      s2 += b[l] * b[k - l];
    }
    ab[k] = s1;
    bb[k] = s2;
  }
  auto beta_fn = [](const mp& x, const mp& y) { return exp(lgamma(x) + lgamma(y) - lgamma(mp(x + y))); };
  const mp g2 = tgamma(al) * tgamma(al) / tgamma(mp(2 * al - 1));
  std::vector<mp> c(K);
  c[0] = g2 / tgamma(mp(2 - al));
  for (int k = 1; k < K; ++k) {
    mp s = 0;
    for (int l = 1; l <= k; ++l) s += beta_fn(mp(al * (l + 2) - 1), mp(al * (k - l - 1) + 2)) * bb[l] * c[k - l];
    const mp pref = g2 * exp(lgamma(mp(al * (k + 1))) - lgamma(mp(al * k + 2 - al)));
    c[k] = pref * (ab[k] - al * (k + 1) * s);
  }
  std::vector<double> out(K);
  for (int k = 0; k < K; ++k) out[k] = static_cast<double>(c[k]);
  return out;
}

double resolvent_density_l2(double alpha) {
  static std::mutex mu;
  static std::map<double, double> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(alpha);
    if (it != cache.end()) return it->second;
  }
  boost::math::quadrature::tanh_sinh<double> ts;
  // Head: integrable t^{2 alpha - 2} singularity at 0.
  auto head = [alpha](double t) {
    if (!(t > 0.0)) return 0.0;
    const double f = ml_density(alpha, t);
    return f * f;
  };
  // Tail on [1, inf) after t = 1/v: the integrand behaves like v^{2 alpha} at 0.
  auto tail = [alpha](double v) {
    if (!(v > 0.0)) return 0.0;
    const double g = ml_density(alpha, 1.0 / v) / v;
    return g * g;
  };
  const double n2 = ts.integrate(head, 0.0, 1.0, 1e-12) + ts.integrate(tail, 0.0, 1.0, 1e-12);
  const double norm = std::sqrt(n2);
  std::lock_guard<std::mutex> lock(mu);
  cache[alpha] = norm;
  return norm;
}

StabilizerSeries::StabilizerSeries(double alpha, double lambda, double c, int truncation_K)
    : alpha_(alpha), lambda_(lambda), c_(c) {
  check_order(alpha);
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ParameterError("stabilizer requires lambda > 0");
  if (!(c > 0.0) || !std::isfinite(c)) throw ParameterError("stabilizer requires c > 0");
  coeffs_ = stabilizer_coeffs(alpha, truncation_K);
  time_scale_ = std::pow(lambda, 1.0 / alpha);
  u_switch_ = find_switch_point(coeffs_, alpha);
  switch_time_ = u_switch_ / time_scale_;
  density_norm_ = std::sqrt(time_scale_) * resolvent_density_l2(alpha);
  limit_ = std::sqrt(c) * lambda / density_norm_;
}

double StabilizerSeries::normalized_square(double u) const {
  if (u <= 0.0) return 0.0;
  const SeriesSum s = alternating_sum(coeffs_, alpha_, u);
  return 2.0 * std::pow(u, 1.0 - alpha_) * static_cast<double>(s.sum);
}

double StabilizerSeries::operator()(double t) const {
  if (!(t >= 0.0)) throw DomainError("stabilizer requires t >= 0");
  if (t == 0.0) return 0.0;
  const double u = time_scale_ * t;
  if (u > u_switch_) return limit_;
  const double s2 = normalized_square(u);
  if (s2 < -1e-12) throw NumericalError("stabilizer series negative; truncation order too small");
  return std::sqrt(c_ * std::pow(lambda_, 2.0 - 1.0 / alpha_) * std::max(0.0, s2));
}

double stabilizer_eval(const StabilizerSeries& series, double t) { return series(t); }

double stabilizer_residual(const StabilizerSeries& series, double T, int n) {
  const std::vector<double> r = stabilizer_residual_profile(series, T, n);
  return *std::max_element(r.begin(), r.end());
}

std::vector<double> stabilizer_residual_profile(const StabilizerSeries& series, double T, int n) {
  if (!(T > 0.0) || n < 1) throw DomainError("residual grid needs T > 0 and n >= 1");
  const ResolventSpec rs(KernelSpec::fractional(series.alpha()), series.lambda());
  const double norm = series.c() * series.lambda() * series.lambda();
  boost::math::quadrature::tanh_sinh<double> ts;
  std::vector<double> out(n + 1, 0.0);
  for (int k = 1; k <= n; ++k) {
    const double t = T * k / n;
    const double R = resolvent(rs, t);
    const double lhs = norm * (1.0 - R * R);
    // xc is the signed distance to the nearest endpoint; on the right half it
    // gives t - s without cancellation.
    auto integrand = [&](double s, double xc) {
      const double lag = (s > 0.5 * t) ? xc : t - s;
      if (!(lag > 0.0) || !(s > 0.0)) return 0.0;
      const double f = resolvent_density(rs, lag);
      const double sig = series(s);
      return f * f * sig * sig;
    };
    const double rhs = ts.integrate(integrand, 0.0, t, 1e-12);
    out[k] = std::fabs(lhs - rhs) / norm;
  }
  return out;
}

Stabilizer::Stabilizer(StabilizerSeries series)
    : series_(std::make_shared<const StabilizerSeries>(std::move(series))) {
  auto p = series_;
  fn_ = [p](double t) { return (*p)(t); };
}

Stabilizer Stabilizer::constant(double value) {
  if (!(value >= 0.0)) throw ParameterError("stabilizer value must be >= 0");
  Stabilizer s;
  s.fn_ = [value](double) { return value; };
  return s;
}

Stabilizer Stabilizer::function(std::function<double(double)> f) {
  Stabilizer s;
  s.fn_ = std::move(f);
  return s;
}

double Stabilizer::sup_norm(double T) const {
  constexpr int kSamples = 4000;
  double m = 0.0;
  for (int k = 0; k <= kSamples; ++k) m = std::max(m, fn_(T * k / kSamples));
  return m;
}

}  // namespace fsv
