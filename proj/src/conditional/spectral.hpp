#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sewma/chart.hpp"

namespace sewma::detail {

/// Direct LU answers above this are handed to the deflated solve.
inline constexpr double kDirectArlLimit = 1e8;

/// Perron data of a kernel K (row-major n x n). The decay 1 - rho is taken
/// from the exact one-step exit probabilities, phi' e / phi' 1, instead of
/// from I - K, which cancels catastrophically once rho is within a few ulps
/// of one.
struct Perron {
  double rho = 0.0;
  double decay = 1.0;  // 1 - rho
  double noise = 0.0;  // rounding level of `decay`
  /// decay is trusted only well above its rounding level.
  bool resolved() const noexcept { return decay > 16.0 * noise; }
};

Perron perron(std::span<const double> kernel, std::size_t n, std::span<const double> exit);

/// Solution of (I - K) a = 1 by direct LU; `ok` is false when the result is
/// not a plausible ARL vector.
double arl_direct(std::span<const double> kernel, std::size_t n, std::span<const double> start_row, bool& ok);

/// 1 + k0' (I - K)^{-1} 1 with the Perron direction handled through the
/// exit-based decay and the complement solved on a deflated system.
/// Throws DivergenceError when the decay is below its rounding level.
double arl_deflated(std::span<const double> kernel, std::size_t n, std::span<const double> start_row,
                    std::span<const double> exit);

struct Interval {
  double lo;
  double hi;
};

/// Collocation kernel rebuilt in extended precision, for variance ratios
/// whose Perron decay is below double resolution.
struct ExtendedResult {
  double arl;
  Perron perron;
};
ExtendedResult collocation_extended(const ChartConfig& config, double sigma2, const Limits& limits,
                                    const std::vector<Interval>& pieces, int basis_size, int quad_factor);

}  // namespace sewma::detail
