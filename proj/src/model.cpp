#include "fsv/model.hpp"

#include <cmath>
#include <string>

#include "fsv/errors.hpp"

namespace fsv {

Grid::Grid(double T_, int n_) : T(T_), n(n_) {
  if (!(T_ > 0.0) || !std::isfinite(T_)) throw ParameterError("grid.T must be > 0");
  if (n_ < 1) throw ParameterError("grid.n must be >= 1");
}

namespace {

void check_size(const std::vector<double>& v, int d, const char* name) {
  if (static_cast<int>(v.size()) != d)
    throw ParameterError(std::string("model.") + name + " must have d = " + std::to_string(d) + " entries");
  for (double x : v)
    if (!std::isfinite(x)) throw ParameterError(std::string("model.") + name + " has a non-finite entry");
}

}  // namespace

void MarketModel::validate() const {
  if (d < 1) throw ParameterError("model.d must be >= 1");
  check_size(alpha, d, "alpha");
  check_size(lam, d, "lambda");
  check_size(nu, d, "nu");
  check_size(rho, d, "rho");
  check_size(theta, d, "theta");
  check_size(mu0, d, "mu0");
  check_size(c, d, "c");
  for (int i = 0; i < d; ++i) {
    const std::string idx = "[" + std::to_string(i) + "]";
    if (!(alpha[i] > 0.5 && alpha[i] <= 1.0)) throw ParameterError("model.alpha" + idx + " must lie in (1/2, 1]");
    if (!(lam[i] > 0.0)) throw ParameterError("model.lambda" + idx + " must be > 0");
    if (!(nu[i] >= 0.0)) throw ParameterError("model.nu" + idx + " must be >= 0");
    if (!(rho[i] >= -1.0 && rho[i] <= 1.0)) throw ParameterError("model.rho" + idx + " must lie in [-1, 1]");
    if (!(theta[i] >= 0.0)) throw ParameterError("model.theta" + idx + " must be >= 0");
    if (!(mu0[i] > 0.0)) throw ParameterError("model.mu0" + idx + " must be > 0");
    if (!(c[i] > 0.0)) throw ParameterError("model.c" + idx + " must be > 0");
  }
  if (!std::isfinite(r)) throw ParameterError("model.r must be finite");
  if (!std::isfinite(x0)) throw ParameterError("model.x0 must be finite");
  if (!(T > 0.0) || !std::isfinite(T)) throw ParameterError("model.T must be > 0");
}

double MarketModel::m0() const { return x0 * std::exp(r * T); }

MarketModel reference_model() {
  MarketModel m;
  m.d = 2;
  m.alpha = {0.6, 0.9};
  m.lam = {0.2, 0.2};
  m.nu = {0.40, 0.32};
  m.rho = {-0.7, -0.55};
  m.theta = {0.1, 0.12};
  m.mu0 = {2.0, 1.0};
  m.c = {0.01, 0.03};
  m.r = 0.02;
  m.x0 = 2.0;
  m.T = 1.0;
  return m;
}

std::vector<Stabilizer> build_stabilizers(const MarketModel& model, int truncation_K) {
  std::vector<Stabilizer> out;
  out.reserve(model.d);
  for (int i = 0; i < model.d; ++i)
    out.emplace_back(StabilizerSeries(model.alpha[i], model.lam[i], model.c[i], truncation_K));
  return out;
}

}  // namespace fsv
