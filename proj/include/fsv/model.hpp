#pragma once

#include <vector>

#include "fsv/kernels.hpp"
#include "fsv/stabilizer.hpp"

namespace fsv {

struct Grid {
  Grid(double T, int n);
  double T;
  int n;
  double dt() const { return T / n; }
  double time(int k) const { return T * k / n; }
};

struct MarketModel {
  int d = 0;
  std::vector<double> alpha;
  std::vector<double> lam;
  std::vector<double> nu;
  std::vector<double> rho;
  std::vector<double> theta;
  std::vector<double> mu0;
  std::vector<double> c;
  double r = 0.0;
  double x0 = 0.0;
  double T = 1.0;

  // Throws ParameterError naming the offending field.
  void validate() const;
  double x_inf(int i) const { return mu0[i] / lam[i]; }
  double v0(int i) const { return c[i] * nu[i] * nu[i] * x_inf(i); }
  KernelSpec kernel(int i) const { return KernelSpec::fractional(alpha[i]); }
  double m0() const;
};

// Two-asset parameter set of the numerical section.
MarketModel reference_model();

std::vector<Stabilizer> build_stabilizers(const MarketModel& model, int truncation_K = 60);

}  // namespace fsv
