#pragma once

// Inverse problems: control limits that meet an in-control target, either
// for a known sigma0^2 or mixed over the phase I estimate.

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sewma/chart.hpp"
#include "sewma/unconditional.hpp"

namespace sewma {

/// P(L <= l_bar) = alpha at the in-control level.
struct QuantileRule {
  std::size_t l_bar = 1000;
  double alpha = 0.25;
};

/// E(L) = arl0 at the in-control level.
struct ArlRule {
  double arl0 = 500.0;
};

struct DesignTarget {
  std::variant<QuantileRule, ArlRule> rule = QuantileRule{};
  /// Mix over the phase I estimate; the solvers then need a PhaseIConfig.
  bool unconditional = false;

  void validate() const;
};

enum class TwoSidedVariant { Symmetric, Unbiased, QuasiUnbiased };

const char* to_string(TwoSidedVariant variant) noexcept;
TwoSidedVariant parse_variant(const std::string& text);

struct TwoSidedDesign {
  TwoSidedVariant variant = TwoSidedVariant::Symmetric;
  std::optional<double> xi;             // quasi-unbiased inflation factor
  std::optional<Limits> base_limits;    // known-case limits the factor is applied to
  bool boundary = false;                // stationarity unreachable with c_l >= 0
};

struct DesignOptions {
  UnconditionalOptions evaluation;
  /// Stop once |target residual| falls below this (probability, or log ARL).
  double residual_tolerance = 1e-10;
  double limit_tolerance = 1e-8;
  /// Half step of the central difference used for (ARL-)unbiasedness.
  double epsilon = 1e-4;
  int max_iterations = 200;
  /// Relative inflation of the known-case limits used as starting value.
  double start_inflation = 0.02;
  /// Upper end of the admissible range, in units of z0.
  double max_limit = 50.0;
};

struct TwoSidedSolution {
  Limits limits;
  TwoSidedDesign design;
};

/// Upper limit meeting the target. With target.unconditional the search
/// starts from the known-case limit inflated by start_inflation.
Limits solve_upper(const ChartConfig& config, const DesignTarget& target,
                   const std::optional<PhaseIConfig>& phase1 = std::nullopt, const DesignOptions& options = {});

/// (z0 - c, z0 + c) with c_l floored at 0.
Limits solve_two_sided_symmetric(const ChartConfig& config, const DesignTarget& target,
                                 const std::optional<PhaseIConfig>& phase1 = std::nullopt,
                                 const DesignOptions& options = {});

/// Target met at sigma = 1 and P_{1-eps}(L <= l_bar) = P_{1+eps}(L <= l_bar)
/// (ARL rule: E_{1-eps}(L) = E_{1+eps}(L)). design.boundary is set when even
/// c_l = 0 cannot balance the two sides.
TwoSidedSolution solve_two_sided_unbiased(const ChartConfig& config, const DesignTarget& target,
                                          const std::optional<PhaseIConfig>& phase1 = std::nullopt,
                                          const DesignOptions& options = {});

/// Known-case unbiased limits widened to (c_l / xi, c_u xi), xi in [1, 3],
/// so that the unconditional in-control target holds.
TwoSidedSolution solve_two_sided_quasi(const ChartConfig& config, const DesignTarget& target,
                                       const PhaseIConfig& phase1, const DesignOptions& options = {});

/// Known-sigma0 ARL-unbiased design: E_1(L) = arl0 and the ARL profile is
/// stationary at sigma = 1.
Limits solve_two_sided_arl_unbiased(const ChartConfig& config, double arl0, const DesignOptions& options = {});

struct ProfileRow {
  long m = 0;
  Limits limits;
  std::optional<double> xi;
};

/// Solved limits for each phase I size (ascending); upper charts use
/// solve_upper, two-sided charts the given variant.
std::vector<ProfileRow> limit_vs_m_profile(const ChartConfig& config, const DesignTarget& target,
                                           const std::vector<long>& m_list,
                                           TwoSidedVariant variant = TwoSidedVariant::Unbiased,
                                           const DesignOptions& options = {}, bool parallel = false);

}  // namespace sewma
