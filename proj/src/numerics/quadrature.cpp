#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "sewma/errors.hpp"
#include "sewma/numerics.hpp"

namespace sewma::numerics {
namespace {

QuadratureRule compute_unit_rule(int n) {
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Asymptotic initial guess for the i-th largest root of P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    {
      // Re-evaluate the derivative at the converged root for the weight.
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[n - 1 - i] = x;
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

std::shared_ptr<const QuadratureRule> gauss_legendre_unit(int n) {
  if (n < 1) throw DomainError("gauss_legendre: need at least one node");
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const QuadratureRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const QuadratureRule>(compute_unit_rule(n));
  return slot;
}

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (!(a < b)) throw DomainError("gauss_legendre: require a < b");
  const auto unit = gauss_legendre_unit(n);
  QuadratureRule rule;
  rule.a = a;
  rule.b = b;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = mid + half * unit->nodes[i];
    rule.weights[i] = half * unit->weights[i];
  }
  return rule;
}

double chebyshev_T_shifted(int s, double z, double c_lo, double c_hi) {
  if (s < 1) throw DomainError("chebyshev_T_shifted: index starts at 1");
  if (!(c_lo < c_hi)) throw DomainError("chebyshev_T_shifted: empty interval");
  const double slack = 1e-12 * (c_hi - c_lo);
  if (z < c_lo - slack || z > c_hi + slack) throw DomainError("chebyshev_T_shifted: z outside interval");
  const double x = std::clamp((2.0 * z - (c_hi + c_lo)) / (c_hi - c_lo), -1.0, 1.0);
  return std::cos((s - 1) * std::acos(x));
}

std::vector<double> chebyshev_nodes(int n, double c_lo, double c_hi) {
  if (n < 1) throw DomainError("chebyshev_nodes: need at least one node");
  if (!(c_lo < c_hi)) throw DomainError("chebyshev_nodes: empty interval");
  std::vector<double> z(n);
  const double mid = 0.5 * (c_hi + c_lo);
  const double half = 0.5 * (c_hi - c_lo);
  for (int r = 1; r <= n; ++r) z[r - 1] = mid + half * std::cos((2.0 * r - 1.0) * std::numbers::pi / (2.0 * n));
  return z;
}

}  // namespace sewma::numerics
