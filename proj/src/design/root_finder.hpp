#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "sewma/errors.hpp"

namespace sewma::detail {

struct RootOptions {
  double residual_tolerance = 1e-10;
  double limit_tolerance = 1e-8;
  int max_iterations = 200;
  /// Treat a flat residual during the bracket search as an unreachable
  /// target. Off for bounded residuals, which are flat far from the root.
  bool plateau_is_infeasible = false;
};

/// A doubled bracket step that moves the residual by less than this
/// (relative) means the target lies beyond a plateau.
inline constexpr double kSaturation = 1e-3;
/// Rounding-level wiggle tolerated before a residual counts as non-monotone.
inline constexpr double kMonotoneSlack = 1e-12;

/// Root of a nondecreasing residual on the half-open range (lo, hi]. The
/// bracket is found by stepping away from x0 with doubling steps and then
/// closed by regula falsi with the Illinois modification. The residual may
/// return -inf / +inf where it cannot be evaluated on that side of the root.
template <class F>
double solve_increasing(F&& f, double x0, double step, double lo, double hi, const RootOptions& opt,
                        const std::string& what) {
  if (!(x0 > lo && x0 <= hi)) x0 = 0.5 * (lo + hi);
  double fx0 = f(x0);
  if (std::isnan(fx0)) throw NumericalError(what + ": residual is NaN at the starting value");
  if (std::fabs(fx0) <= opt.residual_tolerance) return x0;

  // Bracket [a, b] with f(a) < 0 < f(b).
  double a = x0, fa = fx0, b = x0, fb = fx0;
  const auto saturated = [&](double f1, double f2) {
    return opt.plateau_is_infeasible && std::isfinite(f1) && std::isfinite(f2) && std::fabs(f2 - f1) <= kSaturation * (1.0 + std::fabs(f1));
  };
  const auto not_monotone = [&](double x1, double f1, double x2, double f2) {
    throw NumericalError(what + ": residual is not monotone along the bracket search (f(" + std::to_string(x1) +
                         ") = " + std::to_string(f1) + ", f(" + std::to_string(x2) + ") = " + std::to_string(f2) +
                         ")");
  };
  int guard = 0;
  if (fx0 < 0.0) {
    double x = x0;
    double fx = fx0;
    while (true) {
      if (x >= hi || ++guard > opt.max_iterations) {
        throw InfeasibleTarget(what + ": target not reached within the admissible range");
      }
      const double next = std::min(hi, x + step);
      const double fnext = f(next);
      if (std::isnan(fnext)) throw NumericalError(what + ": residual is NaN");
      if (saturated(fx, fnext)) {
        throw InfeasibleTarget(what + ": residual saturates below the target");
      }
      if (fnext < fx - kMonotoneSlack * (1.0 + std::fabs(fx))) not_monotone(x, fx, next, fnext);
      step *= 2.0;
      if (fnext >= 0.0) {
        a = x, fa = fx, b = next, fb = fnext;
        break;
      }
      x = next, fx = fnext;
    }
  } else {
    double x = x0;
    double fx = fx0;
    while (true) {
      if (++guard > opt.max_iterations) {
        throw InfeasibleTarget(what + ": target not reached within the admissible range");
      }
      const double next = x - step > lo ? x - step : lo + 0.5 * (x - lo);
      if (next - lo <= opt.limit_tolerance * (1.0 + std::fabs(lo))) {
        throw InfeasibleTarget(what + ": target not reached within the admissible range");
      }
      const double fnext = f(next);
      if (std::isnan(fnext)) throw NumericalError(what + ": residual is NaN");
      if (saturated(fx, fnext)) {
        throw InfeasibleTarget(what + ": residual saturates above the target");
      }
      if (fnext > fx + kMonotoneSlack * (1.0 + std::fabs(fx))) not_monotone(next, fnext, x, fx);
      step *= 2.0;
      if (fnext <= 0.0) {
        a = next, fa = fnext, b = x, fb = fx;
        break;
      }
      x = next, fx = fnext;
    }
  }
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;

  int side = 0;  // which end moved last: -1 = a, +1 = b
  double fa_used = fa, fb_used = fb;
  for (int it = 0; it < opt.max_iterations; ++it) {
    if (b - a <= opt.limit_tolerance) break;
    double x = 0.5 * (a + b);
    if (std::isfinite(fa_used) && std::isfinite(fb_used)) {
      const double secant = b - fb_used * (b - a) / (fb_used - fa_used);
      const double margin = 1e-3 * (b - a);
      if (secant > a + margin && secant < b - margin) x = secant;
    }
    const double fx = f(x);
    if (std::isnan(fx)) throw NumericalError(what + ": residual is NaN");
    if (std::fabs(fx) <= opt.residual_tolerance) return x;
    if (fx < 0.0) {
      a = x, fa = fx, fa_used = fx;
      if (side == -1 && std::isfinite(fb_used)) fb_used *= 0.5;
      side = -1;
    } else {
      b = x, fb = fx, fb_used = fx;
      if (side == 1 && std::isfinite(fa_used)) fa_used *= 0.5;
      side = 1;
    }
  }
  if (b - a > opt.limit_tolerance * 1e3) throw NumericalError(what + ": root finder did not converge");
  if (std::isfinite(fa) && std::isfinite(fb)) return a - fa * (b - a) / (fb - fa);
  return std::fabs(fa) < std::fabs(fb) ? a : b;
}

}  // namespace sewma::detail
