#pragma once

// Monte Carlo oracle: phase I estimation followed by phase II monitoring,
// simulated directly from the chart definition.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "sewma/chart.hpp"

namespace sewma::mc {

using Rng = std::mt19937_64;

/// Stream for replication `index`: seed_seq over the 32-bit halves of
/// (seed, index), so results do not depend on scheduling.
Rng replication_rng(std::uint64_t seed, std::uint64_t index);

enum class PhaseIMode {
  ChiSquare,   // sigma0_hat^2 drawn as chi2_K / K
  RawNormals,  // m n standard normals, subgroup variances pooled
};

/// One draw of the pooled phase I variance estimate (true sigma0 = 1).
double simulate_phase1_estimate(const PhaseIConfig& phase1, int n, Rng& rng, PhaseIMode mode = PhaseIMode::ChiSquare);

/// First i >= 1 with Z_i outside the limits, or nullopt past l_cap.
/// Subgroup variances are sigma2_effective chi2_{n-1} / (n - 1).
std::optional<std::uint64_t> simulate_run_length(const ChartConfig& config, double sigma2_effective,
                                                 const Limits& limits, std::uint64_t l_cap, Rng& rng);

struct SimulationSpec {
  ChartConfig config;
  std::optional<PhaseIConfig> phase1;  // absent: sigma0^2 known exactly
  PhaseIMode phase1_mode = PhaseIMode::ChiSquare;
  double sigma = 1.0;                  // phase II standard deviation in units of sigma0
  Limits limits = Limits::upper_only(1.0);
  std::uint64_t replications = 100'000;
  std::uint64_t l_cap = 1'000'000;
  std::uint64_t seed = 1;
  bool parallel = false;

  void validate() const;
};

struct ArlEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  /// With censoring the mean counts censored runs as l_cap and is only a
  /// lower bound.
  bool lower_bound_only = false;
};

struct EmpiricalRL {
  std::vector<std::uint64_t> run_lengths;  // uncensored, ascending
  std::uint64_t censored_count = 0;
  std::uint64_t replications = 0;
  std::uint64_t l_cap = 0;

  double censored_fraction() const noexcept;
  /// Empirical P(L > l) and its binomial standard error (l <= l_cap).
  double sf(std::uint64_t l) const;
  double sf_standard_error(std::uint64_t l) const;
  double cdf(std::uint64_t l) const { return 1.0 - sf(l); }
  /// sf(1..l_max) with standard errors.
  std::vector<double> sf_estimate(std::uint64_t l_max) const;
  std::vector<double> sf_standard_errors(std::uint64_t l_max) const;
  ArlEstimate arl() const;
};

/// Per replication: a fresh phase I estimate (unless known), then one run
/// length at variance ratio sigma^2 / sigma0_hat^2.
EmpiricalRL estimate_unconditional(const SimulationSpec& spec);

}  // namespace sewma::mc
