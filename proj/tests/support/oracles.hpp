#pragma once

// Reference implementations that share no code with the library: chi-square
// functions from std::lgamma and adaptive Simpson integration, bisection for
// inverses.

#include <algorithm>
#include <cmath>
#include <functional>

namespace oracle {

inline double chi2_pdf(double x, double df) {
  if (x < 0.0) return 0.0;
  if (x == 0.0) return df == 2.0 ? 0.5 : (df < 2.0 ? INFINITY : 0.0);
  const double k = 0.5 * df;
  return std::exp((k - 1.0) * std::log(x) - 0.5 * x - k * std::log(2.0) - std::lgamma(k));
}

namespace detail {

inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                           double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f on [a, b] to absolute tolerance `tol`.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, 30);
}

/// P(chi2_df <= x) as the integral of the density; x = t^2 removes the
/// singularity at the origin for 1 <= df < 2.
inline double chi2_cdf(double x, double df) {
  if (x <= 0.0) return 0.0;
  const double t = std::sqrt(x);
  const auto g = [df](double u) {
    if (u == 0.0) return df == 1.0 ? std::sqrt(2.0 / M_PI) : 0.0;
    return 2.0 * u * chi2_pdf(u * u, df);
  };
  // Split at the mode region so the adaptive rule sees the peak.
  const double mid = std::min(t, std::sqrt(std::max(df, 1.0)));
  return integrate(g, 0.0, mid, 1e-14) + (t > mid ? integrate(g, mid, t, 1e-14) : 0.0);
}

/// Upper tail by direct integration of the density beyond x, scaled by the
/// density at x so the tolerance is relative.
inline double chi2_sf(double x, double df) {
  const double scale = chi2_pdf(x, df);
  const auto g = [&](double u) { return chi2_pdf(u, df) / scale; };
  double total = 0.0;
  for (double a = x; a < x + 40.0 + 4.0 * df; a += 5.0) total += integrate(g, a, a + 5.0, 1e-13);
  return total * scale;
}

/// Root of an increasing function on [lo, hi] by bisection.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-14) {
  for (int i = 0; i < 400 && hi - lo > tol * (1.0 + std::fabs(lo)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double chi2_quantile(double p, double df) {
  return bisect([&](double x) { return chi2_cdf(x, df) - p; }, 0.0, 10.0 * df + 200.0);
}

}  // namespace oracle
