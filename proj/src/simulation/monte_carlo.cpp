#include <algorithm>
#include <cmath>

#include "parallel.hpp"
#include "sewma/errors.hpp"
#include "sewma/simulation.hpp"

namespace sewma::mc {

Rng replication_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

double simulate_phase1_estimate(const PhaseIConfig& phase1, int n, Rng& rng, PhaseIMode mode) {
  phase1.validate();
  const double k = static_cast<double>(phase1.df_total);
  if (mode == PhaseIMode::ChiSquare) {
    std::gamma_distribution<double> chi2(0.5 * k, 2.0);
    return chi2(rng) / k;
  }
  if (n < 2 || phase1.df_total != phase1.m * (n - 1)) throw DomainError("phase I size does not match n");
  std::normal_distribution<double> normal;
  double pooled = 0.0;
  for (long i = 0; i < phase1.m; ++i) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int j = 0; j < n; ++j) {
      const double x = normal(rng);
      sum += x;
      sum_sq += x * x;
    }
    pooled += sum_sq - sum * sum / n;  // (n - 1) S_i^2
  }
  return pooled / k;
}

std::optional<std::uint64_t> simulate_run_length(const ChartConfig& config, double sigma2_effective,
                                                 const Limits& limits, std::uint64_t l_cap, Rng& rng) {
  const double df = config.df();
  std::gamma_distribution<double> chi2(0.5 * df, 2.0);
  const double scale = config.lambda * sigma2_effective / df;
  const double keep = 1.0 - config.lambda;
  const double lower = limits.lower_or_zero();
  const bool two_sided = limits.lower.has_value();
  double z = config.z0;
  for (std::uint64_t i = 1; i <= l_cap; ++i) {
    z = keep * z + scale * chi2(rng);
    if (z > limits.upper || (two_sided && z < lower)) return i;
  }
  return std::nullopt;
}

void SimulationSpec::validate() const {
  config.validate();
  limits.validate(config.sided);
  if (phase1) phase1->validate();
  if (phase1 && phase1->df_total != phase1->m * config.df()) throw DomainError("phase I size does not match n");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be positive");
  if (replications < 1) throw DomainError("need at least one replication");
  if (l_cap < 1) throw DomainError("l_cap must be positive");
}

double EmpiricalRL::censored_fraction() const noexcept {
  return replications ? static_cast<double>(censored_count) / static_cast<double>(replications) : 0.0;
}

double EmpiricalRL::sf(std::uint64_t l) const {
  if (l > l_cap) throw DomainError("survival function is only observed up to l_cap");
  const auto stopped = std::upper_bound(run_lengths.begin(), run_lengths.end(), l) - run_lengths.begin();
  return 1.0 - static_cast<double>(stopped) / static_cast<double>(replications);
}

double EmpiricalRL::sf_standard_error(std::uint64_t l) const {
  const double p = sf(l);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(replications));
}

std::vector<double> EmpiricalRL::sf_estimate(std::uint64_t l_max) const {
  std::vector<double> out(l_max);
  for (std::uint64_t l = 1; l <= l_max; ++l) out[l - 1] = sf(l);
  return out;
}

std::vector<double> EmpiricalRL::sf_standard_errors(std::uint64_t l_max) const {
  std::vector<double> out(l_max);
  for (std::uint64_t l = 1; l <= l_max; ++l) out[l - 1] = sf_standard_error(l);
  return out;
}

ArlEstimate EmpiricalRL::arl() const {
  const double count = static_cast<double>(replications);
  double sum = static_cast<double>(censored_count) * static_cast<double>(l_cap);
  double sum_sq = sum * static_cast<double>(l_cap);
  for (auto l : run_lengths) {
    const double x = static_cast<double>(l);
    sum += x;
    sum_sq += x * x;
  }
  ArlEstimate out;
  out.mean = sum / count;
  const double var = count > 1 ? std::max(0.0, (sum_sq - sum * out.mean) / (count - 1.0)) : 0.0;
  out.standard_error = std::sqrt(var / count);
  out.lower_bound_only = censored_count > 0;
  return out;
}

EmpiricalRL estimate_unconditional(const SimulationSpec& spec) {
  spec.validate();
  std::vector<std::uint64_t> lengths(spec.replications, 0);  // 0 marks censoring
  detail::for_each_index(spec.replications, spec.parallel, [&](std::size_t r) {
    auto rng = replication_rng(spec.seed, r);
    const double estimate =
        spec.phase1 ? simulate_phase1_estimate(*spec.phase1, spec.config.n, rng, spec.phase1_mode) : 1.0;
    const auto l =
        simulate_run_length(spec.config, spec.sigma * spec.sigma / estimate, spec.limits, spec.l_cap, rng);
    lengths[r] = l.value_or(0);
  });
  EmpiricalRL out;
  out.replications = spec.replications;
  out.l_cap = spec.l_cap;
  out.run_lengths.reserve(lengths.size());
  for (auto l : lengths) {
    if (l == 0) {
      ++out.censored_count;
    } else {
      out.run_lengths.push_back(l);
    }
  }
  std::sort(out.run_lengths.begin(), out.run_lengths.end());
  return out;
}

}  // namespace sewma::mc
