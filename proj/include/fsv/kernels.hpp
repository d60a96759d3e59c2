#pragma once

#include <span>
#include <vector>

namespace fsv {

enum class KernelFamily { fractional, gamma, exponential, constant };

const char* to_string(KernelFamily f);

// Convolution kernel of one variance component. Parameters are validated once
// here so evaluation stays branch-light.
class KernelSpec {
 public:
  static KernelSpec fractional(double alpha);
  static KernelSpec gamma(double alpha, double beta);
  static KernelSpec exponential(double beta);
  static KernelSpec constant();

  KernelFamily family() const { return family_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  bool singular() const { return alpha_ < 1.0; }

  // K(t). Singular families require t > 0.
  double operator()(double t) const;
  // K(t) t^{1-alpha}, bounded near the origin.
  double regular_part(double t) const;

 private:
  KernelSpec(KernelFamily f, double alpha, double beta);
  KernelFamily family_;
  double alpha_;
  double beta_;
  double inv_gamma_alpha_;
};

struct ResolventSpec {
  ResolventSpec(KernelSpec k, double lambda);
  KernelSpec kernel;
  double lambda;
};

double eval_kernel(const KernelSpec& spec, double t);

// E_alpha(z) for alpha in (0, 1].
double mittag_leffler(double alpha, double z);

// Density of the lambda = 1 fractional resolvent, f(t) = t^{alpha-1} E_{alpha,alpha}(-t^alpha).
double ml_density(double alpha, double t);

double resolvent(const ResolventSpec& spec, double t);
double resolvent_density(const ResolventSpec& spec, double t);

// (m+1)^p - m^p and (m+2)^p - 2(m+1)^p + m^p without cancellation for large m.
double power_diff1(double m, double p);
double power_diff2(double m, double p);

// Weights w_0..w_N with I^r f(t_N) = sum_j w_j f(t_j) exactly for piecewise-linear f on
// the uniform grid t_j = j h.
std::vector<double> product_integration_weights(double r, int N, double h);

// I^r f(T) for f sampled on the uniform grid over [0, T].
double fractional_integral(double r, std::span<const double> f, double T);

// int_a^b K(t_k - s) ds.
double kernel_mean_segment(const KernelSpec& spec, double t_k, double a, double b);

// int_a^b K(t_k - s) K(t_k2 - s) ds.
double kernel_cross_segment(const KernelSpec& spec, double t_k, double t_k2, double a, double b);

}  // namespace fsv
