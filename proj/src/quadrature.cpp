#include "fsv/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>

#include "fsv/errors.hpp"

namespace fsv {

namespace {

QuadratureRule golub_welsch(int n, double a, double b) {
  if (n < 1) throw ParameterError("quadrature order must be >= 1");
  if (a <= -1.0 || b <= -1.0) throw ParameterError("Jacobi exponents must exceed -1");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  const double ab = a + b;
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + ab;
    if (k == 0)
      J(0, 0) = (b - a) / (ab + 2.0);
    else
      J(k, k) = (b * b - a * a) / (s * (s + 2.0));
    if (k >= 1) {
      const double kk = k;
      const double num = 4.0 * kk * (kk + a) * (kk + b) * (kk + ab);
      const double den = s * s * (s + 1.0) * (s - 1.0);
      J(k, k - 1) = J(k - 1, k) = std::sqrt(num / den);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) +
                              std::lgamma(b + 1.0) - std::lgamma(ab + 2.0));
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    rule.nodes[k] = es.eigenvalues()(k);
    const double v = es.eigenvectors()(0, k);
    rule.weights[k] = mu0 * v * v;
  }
  return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, golub_welsch(n, 0.0, 0.0)).first;
  return it->second;
}

QuadratureRule gauss_jacobi(int n, double a, double b) { return golub_welsch(n, a, b); }

}  // namespace fsv
