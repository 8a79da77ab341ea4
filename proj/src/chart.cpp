#include "sewma/chart.hpp"

#include <cmath>

#include "sewma/errors.hpp"

namespace sewma {

const char* to_string(Sided sided) noexcept { return sided == Sided::Upper ? "upper" : "two"; }

Sided parse_sided(const std::string& text) {
  if (text == "upper") return Sided::Upper;
  if (text == "two" || text == "two-sided" || text == "two.sided") return Sided::TwoSided;
  throw DomainError("unknown sidedness '" + text + "' (expected upper or two)");
}

void ChartConfig::validate() const {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw DomainError("lambda must lie in (0, 1]");
  if (n < 2) throw DomainError("subgroup size n must be at least 2");
  if (!(z0 > 0.0) || !std::isfinite(z0)) throw DomainError("head start z0 must be positive");
}

void Limits::validate(Sided sided) const {
  if (!(upper > 0.0) || !std::isfinite(upper)) throw DomainError("upper limit must be positive");
  if (sided == Sided::Upper) {
    if (lower) throw DomainError("upper chart takes no lower limit");
    return;
  }
  if (!lower) throw DomainError("two-sided chart needs a lower limit");
  if (!(*lower >= 0.0) || !(*lower < upper)) throw DomainError("require 0 <= c_l < c_u");
}

PhaseIConfig PhaseIConfig::make(long m, int n) {
  if (m < 1) throw DomainError("phase I size m must be positive");
  if (n < 2) throw DomainError("subgroup size n must be at least 2");
  return PhaseIConfig{m, m * (n - 1)};
}

void PhaseIConfig::validate() const {
  if (m < 1 || df_total < 1 || df_total % m != 0) throw DomainError("phase I degrees of freedom must equal m (n - 1)");
}

}  // namespace sewma
