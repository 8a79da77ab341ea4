#pragma once

// Run-length quantities mixed over the sampling distribution of the pooled
// phase I variance estimate, sigma0_hat^2 ~ chi2_K / K with K = m (n - 1).
// Phase II data are standardized by the estimate, so a node s^2 of the
// mixing measure sees the variance ratio sigma^2 / s^2.

#include <cstddef>
#include <vector>

#include "sewma/chart.hpp"
#include "sewma/conditional.hpp"

namespace sewma {

struct MixingRule {
  std::vector<double> s2_nodes;
  std::vector<double> s2_weights;  // quadrature weight times the density of chi2_K / K
  double lower_cut = 0.0;
  double upper_cut = 0.0;
};

/// Gauss-Legendre rule between the `tail` and 1 - `tail` quantiles of chi2_K / K.
MixingRule build_mixing_rule(const PhaseIConfig& phase1, int n_nodes = 60, double tail = 1e-10);

struct UnconditionalOptions {
  ConditionalOptions conditional;
  int mixing_nodes = 60;
  /// Probability mass cut from each tail of the mixing distribution.
  double mixing_tail = 1e-10;
  /// Evaluate nodes on worker threads; the weighted sum is always taken in
  /// node order, so results do not depend on this flag.
  bool parallel = false;
  /// Hard cap for run-length quantile searches.
  std::size_t quantile_cap = 10'000'000;
};

/// Unconditional survival function p_1..p_{l_max} at actual standard
/// deviation `sigma` (in units of sigma0).
std::vector<double> sf_unconditional(std::size_t l_max, const ChartConfig& config, const PhaseIConfig& phase1,
                                     double sigma, const Limits& limits, const UnconditionalOptions& options = {});

/// P(L <= l), unconditional.
double cdf_unconditional(std::size_t l, const ChartConfig& config, const PhaseIConfig& phase1, double sigma,
                         const Limits& limits, const UnconditionalOptions& options = {});

/// Node-wise mixture of conditional ARLs. A node whose ARL is not finite to
/// double resolution raises DivergenceError carrying that node's variance
/// ratio and a lower bound built from the resolvable nodes.
double arl_unconditional(const ChartConfig& config, const PhaseIConfig& phase1, double sigma, const Limits& limits,
                         const UnconditionalOptions& options = {});

/// Smallest l with P(L <= l) >= alpha. SaturationError past the cap.
std::size_t quantile_unconditional(double alpha, const ChartConfig& config, const PhaseIConfig& phase1,
                                   double sigma, const Limits& limits, const UnconditionalOptions& options = {});

/// Weighted average of conditional RL alpha-quantiles over the mixing
/// measure. A diagnostic, not a design criterion.
double percentile_marginal(double alpha, const ChartConfig& config, const PhaseIConfig& phase1, double sigma,
                           const Limits& limits, const UnconditionalOptions& options = {});

/// Survival function traces of every mixing node, in node order.
struct NodeTraces {
  MixingRule rule;
  std::vector<SfTrace> traces;

  double sf(std::size_t l) const;
};

NodeTraces trace_nodes(std::size_t l_stop, const ChartConfig& config, const PhaseIConfig& phase1, double sigma,
                       const Limits& limits, const UnconditionalOptions& options = {});

}  // namespace sewma
