#pragma once

#include <optional>
#include <string>

namespace sewma {

enum class Sided { Upper, TwoSided };

const char* to_string(Sided sided) noexcept;
Sided parse_sided(const std::string& text);

/// EWMA S^2 chart: Z_i = (1 - lambda) Z_{i-1} + lambda S_i^2, Z_0 = z0.
/// lambda = 1 is the Shewhart S^2 chart.
struct ChartConfig {
  double lambda = 0.1;
  int n = 5;  // subgroup size
  Sided sided = Sided::Upper;
  double z0 = 1.0;

  int df() const noexcept { return n - 1; }
  void validate() const;
};

/// Control limits. `lower` is absent for upper charts.
struct Limits {
  std::optional<double> lower;
  double upper = 0.0;

  static Limits upper_only(double c_u) { return Limits{std::nullopt, c_u}; }
  static Limits two_sided(double c_l, double c_u) { return Limits{c_l, c_u}; }

  double lower_or_zero() const noexcept { return lower.value_or(0.0); }
  /// Structural check: 0 <= c_l < c_u and a lower limit exactly when two-sided.
  /// Limits that do not bracket z0 are accepted; they are legitimate solver probes.
  void validate(Sided sided) const;
};

/// Phase I: m subgroups of size n pooled into one variance estimate with
/// m (n - 1) degrees of freedom; the estimate is sigma0^2 chi2_K / K.
struct PhaseIConfig {
  long m = 50;
  long df_total = 200;

  static PhaseIConfig make(long m, int n);
  void validate() const;
};

}  // namespace sewma
