#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "sewma/conditional.hpp"
#include "sewma/errors.hpp"
#include "sewma/numerics.hpp"

namespace sewma {
namespace {

constexpr double kNearUnitRatio = 1e-6;
constexpr std::size_t kShortExtrapolation = 10'000'000;

double extrapolate(const std::vector<double>& prefix, double ratio, std::size_t l) {
  if (l == 0) return 1.0;
  if (prefix.empty()) return 0.0;
  if (l <= prefix.size()) return prefix[l - 1];
  if (ratio <= 0.0) return 0.0;
  return prefix.back() * std::pow(ratio, static_cast<double>(l - prefix.size()));
}

}  // namespace

double RLCurve::at(std::size_t l) const { return extrapolate(sf, tail_ratio, l); }

double SfTrace::at(std::size_t l) const { return extrapolate(prefix, tail_ratio, l); }

std::size_t SfTrace::first_at_or_below(double level) const {
  const auto it = std::find_if(prefix.begin(), prefix.end(), [level](double p) { return p <= level; });
  if (it != prefix.end()) return static_cast<std::size_t>(it - prefix.begin()) + 1;
  const double last = prefix.empty() ? 1.0 : prefix.back();
  if (last <= 0.0 || tail_ratio <= 0.0) return prefix.size() + 1;
  if (tail_ratio >= 1.0) throw DivergenceError("survival function does not decay: quantile is infinite", 0.0);
  const double steps = std::log(level / last) / std::log1p(tail_ratio - 1.0);
  if (!(steps < 1e15)) throw DivergenceError("run-length quantile beyond double resolution", 0.0);
  auto l = prefix.size() + static_cast<std::size_t>(std::max(1.0, std::ceil(steps)));
  while (l > prefix.size() + 1 && at(l - 1) <= level) --l;
  while (at(l) > level) ++l;
  return l;
}

SfTrace trace_sf(const RunLengthModel& model, std::size_t l_stop, const TailOptions& tail, double stop_level) {
  SfTrace trace;
  if (l_stop == 0) return trace;
  if (model.absorbed()) {
    trace.prefix = {0.0};
    trace.tail_start = 1;
    trace.tail_converged = true;
    return trace;
  }

  const std::size_t n = model.size();
  const auto p1 = model.nodal_p1();
  std::vector<double> current(p1.begin(), p1.end());
  std::vector<double> next(n);
  const std::size_t limit = std::min(l_stop, tail.max_iterations);

  double previous_raw = model.start_p1();
  double reported = std::clamp(previous_raw, 0.0, 1.0);
  trace.prefix.reserve(std::min<std::size_t>(limit, 1u << 16));
  trace.prefix.push_back(reported);
  std::deque<double> ratios;
  double ratio = previous_raw > 0.0 ? 1.0 : 0.0;

  for (std::size_t l = 2; l <= limit && reported > stop_level; ++l) {
    const double raw = model.at_start(current);
    if (!(previous_raw > 0.0) || !(raw > 1e-300)) {
      // Survival mass exhausted: the remaining values are zero to double precision.
      trace.prefix.push_back(0.0);
      trace.tail_start = trace.prefix.size();
      trace.tail_ratio = 0.0;
      trace.tail_converged = true;
      return trace;
    }
    ratio = raw / previous_raw;
    reported = std::min(reported, std::clamp(raw, 0.0, 1.0));
    trace.prefix.push_back(reported);
    previous_raw = raw;

    ratios.push_back(ratio);
    if (ratios.size() > static_cast<std::size_t>(tail.window)) ratios.pop_front();
    if (l >= tail.min_index && ratios.size() == static_cast<std::size_t>(tail.window)) {
      const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
      const double threshold =
          std::max(tail.noise_floor, std::min(tail.tolerance, tail.relative * std::fabs(1.0 - ratio)));
      if (*hi - *lo <= threshold) {
        trace.tail_start = l;
        trace.tail_ratio = std::min(ratio, 1.0);
        if (1.0 - ratio < kNearUnitRatio && l_stop - l > kShortExtrapolation) {
          // Successive ratios carry absolute rounding of ~1e-16, harmless over
          // short extrapolations; far out the exit-based decay is used.
          try {
            trace.tail_ratio = 1.0 - model.tail_decay();
          } catch (const DivergenceError&) {
          }
        }
        trace.tail_converged = trace.tail_ratio < 1.0;
        return trace;
      }
    }
    if (l < limit) {
      model.step(current, next);
      current.swap(next);
    }
  }
  trace.tail_start = trace.prefix.size();
  trace.tail_ratio = std::clamp(ratio, 0.0, 1.0);
  trace.tail_converged = false;
  return trace;
}

double transition_density(double z0, double z, const ChartConfig& config, double sigma2) {
  config.validate();
  if (!(sigma2 > 0.0)) throw DomainError("variance must be positive");
  const double gap = z - (1.0 - config.lambda) * z0;
  if (gap < 0.0) return 0.0;
  const double scale = config.df() / (sigma2 * config.lambda);
  return numerics::chi2_pdf(scale * gap, config.df()) * scale;
}

double sf_first_step(double z, const ChartConfig& config, double sigma2, const Limits& limits) {
  const double edge = (1.0 - config.lambda) * z;
  const double scale = config.df() / (sigma2 * config.lambda);
  if (limits.upper <= edge) return 0.0;
  const double upper = numerics::chi2_cdf(scale * (limits.upper - edge), config.df());
  const double lower_gap = limits.lower_or_zero() - edge;
  const double lower = lower_gap > 0.0 ? numerics::chi2_cdf(scale * lower_gap, config.df()) : 0.0;
  return std::max(0.0, upper - lower);
}

double exit_first_step(double z, const ChartConfig& config, double sigma2, const Limits& limits) {
  const double edge = (1.0 - config.lambda) * z;
  const double scale = config.df() / (sigma2 * config.lambda);
  if (limits.upper <= edge) return 1.0;
  const double above = numerics::chi2_sf(scale * (limits.upper - edge), config.df());
  const double lower_gap = limits.lower_or_zero() - edge;
  const double below = lower_gap > 0.0 ? numerics::chi2_cdf(scale * lower_gap, config.df()) : 0.0;
  return std::min(1.0, above + below);
}

std::shared_ptr<const RunLengthModel> make_model(const ChartConfig& config, double sigma2, const Limits& limits,
                                                 const ConditionalOptions& options) {
  if (options.method == SfMethod::MarkovChain) {
    return std::make_shared<const MarkovChainModel>(config, sigma2, limits, options.markov_states);
  }
  return CollocationBasis::cached(config, sigma2, limits, options.basis_size, options.quad_factor);
}

namespace {

RLCurve materialize(const SfTrace& trace, std::size_t l_max) {
  RLCurve curve;
  curve.sf.resize(l_max);
  for (std::size_t l = 1; l <= l_max; ++l) curve.sf[l - 1] = trace.at(l);
  curve.tail_start = std::min(trace.tail_start, l_max);
  curve.tail_ratio = trace.tail_ratio;
  curve.tail_converged = trace.tail_converged;
  return curve;
}

}  // namespace

RLCurve sf_conditional(const ChartConfig& config, double sigma2, const Limits& limits, std::size_t l_max,
                       int basis_size, const TailOptions& tail) {
  if (l_max < 1) throw DomainError("l_max must be positive");
  const auto basis = CollocationBasis::cached(config, sigma2, limits, basis_size);
  return materialize(trace_sf(*basis, l_max, tail), l_max);
}

RLCurve sf_markov_chain(const ChartConfig& config, double sigma2, const Limits& limits, std::size_t l_max,
                        int states, const TailOptions& tail) {
  if (l_max < 1) throw DomainError("l_max must be positive");
  const MarkovChainModel chain(config, sigma2, limits, states);
  return materialize(trace_sf(chain, l_max, tail), l_max);
}

double arl_conditional(const ChartConfig& config, double sigma2, const Limits& limits,
                       const ConditionalOptions& options, ArlMethod method) {
  const auto model = make_model(config, sigma2, limits, options);
  if (method == ArlMethod::LinearSystem) return model->arl_linear_system();

  const auto trace = trace_sf(*model, std::numeric_limits<std::size_t>::max(), options.tail);
  double partial = 1.0;
  for (double p : trace.prefix) partial += p;
  if (!trace.tail_converged) {
    throw DivergenceError("geometric tail did not converge; ARL not finite to double resolution", sigma2,
                          partial);
  }
  const double rho = trace.tail_ratio;
  if (rho >= 1.0) throw DivergenceError("tail ratio >= 1: ARL diverges", sigma2, partial);
  const double last = trace.prefix.back();
  return partial + last * rho / (1.0 - rho);
}

std::size_t rl_quantile_conditional(const ChartConfig& config, double sigma2, const Limits& limits, double alpha,
                                    const ConditionalOptions& options) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  const auto model = make_model(config, sigma2, limits, options);
  const double level = 1.0 - alpha;
  const auto trace = trace_sf(*model, std::numeric_limits<std::size_t>::max(), options.tail, level);
  try {
    return trace.first_at_or_below(level);
  } catch (const DivergenceError& e) {
    throw DivergenceError(e.what(), sigma2);
  }
}

}  // namespace sewma
