#pragma once

// Special functions and quadrature/polynomial primitives.

#include <memory>
#include <vector>

namespace sewma::numerics {

struct QuadratureRule {
  std::vector<double> nodes;    // strictly increasing, inside (a, b)
  std::vector<double> weights;  // positive, sum to b - a
  double a = -1.0;
  double b = 1.0;
};

// Chi-square distribution. All throw DomainError for df <= 0.
double chi2_pdf(double x, double df);
double chi2_cdf(double x, double df);
/// Upper tail 1 - chi2_cdf(x, df), computed without cancellation.
double chi2_sf(double x, double df);
double chi2_quantile(double p, double df);

/// Regularized incomplete gamma functions P(a, x) and Q(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

/// Standard normal quantile (Acklam's rational approximation, ~1e-9 relative).
double normal_quantile_approx(double p);

/// Gauss-Legendre rule with `n` nodes on [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

/// Cached rule on [-1, 1]; immutable and shared.
std::shared_ptr<const QuadratureRule> gauss_legendre_unit(int n);

/// T_{s-1} evaluated at z after mapping [c_lo, c_hi] onto [-1, 1].
double chebyshev_T_shifted(int s, double z, double c_lo, double c_hi);

/// Roots of T_N mapped to [c_lo, c_hi], r = 1..N (descending).
std::vector<double> chebyshev_nodes(int n, double c_lo, double c_hi);

}  // namespace sewma::numerics
