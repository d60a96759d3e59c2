#pragma once

#include <functional>
#include <memory>
#include <vector>

namespace fsv {

// First K coefficients c_0..c_{K-1} of the stabilizer power series.
std::vector<double> stabilizer_coeffs(double alpha, int K);

// ||f_{alpha,1}||_{L^2(0,inf)} of the lambda = 1 fractional resolvent density.
double resolvent_density_l2(double alpha);

class StabilizerSeries {
 public:
  StabilizerSeries(double alpha, double lambda, double c, int truncation_K = 60);

  double alpha() const { return alpha_; }
  double lambda() const { return lambda_; }
  double c() const { return c_; }
  int truncation_K() const { return static_cast<int>(coeffs_.size()); }
  const std::vector<double>& coeffs() const { return coeffs_; }
  // Beyond this time the asymptotic constant is used.
  double switch_time() const { return switch_time_; }
  // lim_{t -> inf} of the stabilizer: sqrt(c) lambda / ||f_{alpha,lambda}||.
  double limit() const { return limit_; }
  double density_norm() const { return density_norm_; }

  // Normalized series sigma_alpha^2(u) before clipping; u <= switch point.
  double normalized_square(double u) const;
  double operator()(double t) const;

 private:
  double alpha_, lambda_, c_;
  std::vector<double> coeffs_;
  double time_scale_;  // lambda^{1/alpha}
  double u_switch_;
  double switch_time_;
  double density_norm_;
  double limit_;
};

double stabilizer_eval(const StabilizerSeries& series, double t);

// max over t_k = kT/n of |c lambda^2 (1 - R^2) - (f^2 * sigma^2)| / (c lambda^2).
double stabilizer_residual(const StabilizerSeries& series, double T, int n);
// Pointwise version at t_0..t_n (entry 0 is the trivial t = 0 residual).
std::vector<double> stabilizer_residual_profile(const StabilizerSeries& series, double T, int n);

// Per-asset diffusion multiplier consumed by the Riccati solver and the simulator.
// Either backed by a stabilizer series or by an arbitrary function.
class Stabilizer {
 public:
  explicit Stabilizer(StabilizerSeries series);
  static Stabilizer constant(double value);
  static Stabilizer function(std::function<double(double)> f);

  double operator()(double t) const { return fn_(t); }
  // sup over [0, T], sampled on a fine grid.
  double sup_norm(double T) const;
  const StabilizerSeries* series() const { return series_.get(); }

 private:
  Stabilizer() = default;
  std::shared_ptr<const StabilizerSeries> series_;
  std::function<double(double)> fn_;
};

}  // namespace fsv
