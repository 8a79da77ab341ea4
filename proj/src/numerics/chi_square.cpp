#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sewma/errors.hpp"
#include "sewma/numerics.hpp"

namespace sewma::numerics {
namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 2'000'000;

double log_gamma(double a) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(a, &sign);
#else
  return std::lgamma(a);
#endif
}

void check_df(double df) {
  if (!(df > 0.0) || !std::isfinite(df)) throw DomainError("chi-square: degrees of freedom must be positive");
}

// log(x^a e^-x / Gamma(a))
double log_prefactor(double a, double x) { return a * std::log(x) - x - log_gamma(a); }

double p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxIter; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(log_prefactor(a, x));
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
double q_continued_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return std::exp(log_prefactor(a, x)) * h;
}

}  // namespace

double gamma_p(double a, double x) {
  if (!(a > 0.0)) throw DomainError("gamma_p: shape must be positive");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return std::min(1.0, p_series(a, x));
  return std::clamp(1.0 - q_continued_fraction(a, x), 0.0, 1.0);
}

double gamma_q(double a, double x) {
  if (!(a > 0.0)) throw DomainError("gamma_q: shape must be positive");
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return std::clamp(1.0 - p_series(a, x), 0.0, 1.0);
  return std::min(1.0, q_continued_fraction(a, x));
}

double chi2_pdf(double x, double df) {
  check_df(df);
  if (x < 0.0) return 0.0;
  const double k = 0.5 * df;
  if (x == 0.0) {
    if (df < 2.0) return std::numeric_limits<double>::infinity();
    return df == 2.0 ? 0.5 : 0.0;
  }
  if (std::isinf(x)) return 0.0;
  return std::exp((k - 1.0) * std::log(x) - 0.5 * x - k * std::numbers::ln2 - log_gamma(k));
}

double chi2_cdf(double x, double df) {
  check_df(df);
  return gamma_p(0.5 * df, 0.5 * x);
}

double chi2_sf(double x, double df) {
  check_df(df);
  return gamma_q(0.5 * df, 0.5 * x);
}

double normal_quantile_approx(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile: p must lie in (0, 1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double chi2_quantile(double p, double df) {
  check_df(df);
  if (!(p > 0.0 && p < 1.0)) throw DomainError("chi2_quantile: p must lie in (0, 1)");

  // Newton on the log of whichever tail is small, inside a maintained bracket.
  const bool upper = p > 0.5;
  const double target = upper ? std::log1p(-p) : std::log(p);
  auto residual = [&](double x) {
    const double tail = upper ? chi2_sf(x, df) : chi2_cdf(x, df);
    return std::log(tail) - target;  // decreasing in x for upper, increasing for lower
  };

  const double z = normal_quantile_approx(p);
  const double h = 2.0 / (9.0 * df);
  double x = df * std::pow(std::max(1.0 - h + z * std::sqrt(h), 0.0), 3.0);
  if (!(x > 0.0)) {
    // Leading term of the lower tail: F(x) ~ (x/2)^{k} / Gamma(k + 1).
    const double k = 0.5 * df;
    x = 2.0 * std::exp((std::log(p) + log_gamma(k + 1.0)) / k);
  }

  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  // Sign convention: s(x) > 0 means x is too small.
  auto too_small = [&](double r) { return upper ? r > 0.0 : r < 0.0; };

  for (int it = 0; it < 500; ++it) {
    const double r = residual(x);
    if (!std::isfinite(r)) {
      // Tail underflow: x is far out on the side where the tail vanishes.
      if (upper) hi = x; else lo = x;
    } else if (too_small(r)) {
      lo = std::max(lo, x);
    } else {
      hi = std::min(hi, x);
    }
    if (std::isfinite(r) && std::fabs(r) < 1e-15) return x;

    double next = std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(r)) {
      const double tail = upper ? chi2_sf(x, df) : chi2_cdf(x, df);
      const double slope = (upper ? -1.0 : 1.0) * chi2_pdf(x, df) / tail;
      if (slope != 0.0 && std::isfinite(slope)) next = x - r / slope;
    }
    if (!(next > lo && next < hi)) {
      next = std::isinf(hi) ? std::max(2.0 * x, x + 1.0) : 0.5 * (lo + hi);
    }
    if (std::fabs(next - x) <= 1e-15 * std::max(1.0, x)) return next;
    x = next;
  }
  throw NumericalError("chi2_quantile: iteration did not converge");
}

}  // namespace sewma::numerics
