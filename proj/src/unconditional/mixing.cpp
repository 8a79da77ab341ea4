#include <cmath>
#include <limits>
#include <sstream>

#include "parallel.hpp"
#include "sewma/errors.hpp"
#include "sewma/numerics.hpp"
#include "sewma/unconditional.hpp"

namespace sewma {
namespace {

std::vector<double> node_variances(const MixingRule& rule, double sigma) {
  std::vector<double> v(rule.s2_nodes.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = sigma * sigma / rule.s2_nodes[i];
  return v;
}

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be positive");
}

}  // namespace

MixingRule build_mixing_rule(const PhaseIConfig& phase1, int n_nodes, double tail) {
  phase1.validate();
  if (n_nodes < 2) throw DomainError("mixing rule needs at least two nodes");
  if (!(tail > 0.0 && tail < 0.5)) throw DomainError("mixing tail cut must lie in (0, 0.5)");
  const double k = static_cast<double>(phase1.df_total);
  MixingRule rule;
  rule.lower_cut = numerics::chi2_quantile(tail, k) / k;
  rule.upper_cut = numerics::chi2_quantile(1.0 - tail, k) / k;
  const auto gl = numerics::gauss_legendre(n_nodes, rule.lower_cut, rule.upper_cut);
  rule.s2_nodes = gl.nodes;
  rule.s2_weights.resize(gl.nodes.size());
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    rule.s2_weights[i] = gl.weights[i] * k * numerics::chi2_pdf(k * gl.nodes[i], k);
  }
  return rule;
}

double NodeTraces::sf(std::size_t l) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < traces.size(); ++i) sum += rule.s2_weights[i] * traces[i].at(l);
  return sum;
}

NodeTraces trace_nodes(std::size_t l_stop, const ChartConfig& config, const PhaseIConfig& phase1, double sigma,
                       const Limits& limits, const UnconditionalOptions& options) {
  check_sigma(sigma);
  config.validate();
  limits.validate(config.sided);
  NodeTraces result;
  result.rule = build_mixing_rule(phase1, options.mixing_nodes, options.mixing_tail);
  const auto variances = node_variances(result.rule, sigma);
  result.traces.resize(variances.size());
  detail::for_each_index(variances.size(), options.parallel, [&](std::size_t i) {
    const auto model = make_model(config, variances[i], limits, options.conditional);
    result.traces[i] = trace_sf(*model, l_stop, options.conditional.tail);
  });
  return result;
}

std::vector<double> sf_unconditional(std::size_t l_max, const ChartConfig& config, const PhaseIConfig& phase1,
                                     double sigma, const Limits& limits, const UnconditionalOptions& options) {
  const auto nodes = trace_nodes(l_max, config, phase1, sigma, limits, options);
  std::vector<double> sf(l_max);
  for (std::size_t l = 1; l <= l_max; ++l) sf[l - 1] = nodes.sf(l);
  return sf;
}

double cdf_unconditional(std::size_t l, const ChartConfig& config, const PhaseIConfig& phase1, double sigma,
                         const Limits& limits, const UnconditionalOptions& options) {
  if (l == 0) return 0.0;
  const auto nodes = trace_nodes(l, config, phase1, sigma, limits, options);
  return std::clamp(1.0 - nodes.sf(l), 0.0, 1.0);
}

double arl_unconditional(const ChartConfig& config, const PhaseIConfig& phase1, double sigma, const Limits& limits,
                         const UnconditionalOptions& options) {
  check_sigma(sigma);
  config.validate();
  limits.validate(config.sided);
  const auto rule = build_mixing_rule(phase1, options.mixing_nodes, options.mixing_tail);
  const auto variances = node_variances(rule, sigma);
  std::vector<double> arls(variances.size(), std::numeric_limits<double>::quiet_NaN());
  detail::for_each_index(variances.size(), options.parallel, [&](std::size_t i) {
    const auto model = make_model(config, variances[i], limits, options.conditional);
    try {
      arls[i] = model->arl_linear_system();
    } catch (const DivergenceError&) {
      // left as NaN; reported below
    }
  });

  double sum = 0.0;
  double bound = 0.0;
  std::size_t offending = arls.size();
  for (std::size_t i = 0; i < arls.size(); ++i) {
    if (std::isnan(arls[i])) {
      if (offending == arls.size()) offending = i;
      bound += rule.s2_weights[i];  // every run length is at least 1
    } else {
      sum += rule.s2_weights[i] * arls[i];
      bound += rule.s2_weights[i] * arls[i];
    }
  }
  if (offending != arls.size()) {
    std::ostringstream msg;
    msg << "unconditional ARL diverges: conditional ARL at mixing node s^2 = " << rule.s2_nodes[offending]
        << " (variance ratio " << variances[offending] << ") is beyond numerical resolution";
    throw DivergenceError(msg.str(), variances[offending], bound);
  }
  return sum;
}

std::size_t quantile_unconditional(double alpha, const ChartConfig& config, const PhaseIConfig& phase1,
                                   double sigma, const Limits& limits, const UnconditionalOptions& options) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  const auto nodes = trace_nodes(options.quantile_cap, config, phase1, sigma, limits, options);
  const double level = 1.0 - alpha;
  if (nodes.sf(options.quantile_cap) > level) {
    throw SaturationError("unconditional CDF does not reach alpha within the quantile cap");
  }
  std::size_t lo = 0;  // sf(lo) > level
  std::size_t hi = options.quantile_cap;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (nodes.sf(mid) <= level) hi = mid; else lo = mid;
  }
  return hi;
}

double percentile_marginal(double alpha, const ChartConfig& config, const PhaseIConfig& phase1, double sigma,
                           const Limits& limits, const UnconditionalOptions& options) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  check_sigma(sigma);
  const auto rule = build_mixing_rule(phase1, options.mixing_nodes, options.mixing_tail);
  const auto variances = node_variances(rule, sigma);
  std::vector<double> quantiles(variances.size());
  detail::for_each_index(variances.size(), options.parallel, [&](std::size_t i) {
    try {
      quantiles[i] = static_cast<double>(
          rl_quantile_conditional(config, variances[i], limits, alpha, options.conditional));
    } catch (const DivergenceError&) {
      std::ostringstream msg;
      msg << "conditional quantile at mixing node s^2 = " << rule.s2_nodes[i] << " is beyond numerical resolution";
      throw SaturationError(msg.str());
    }
  });
  double sum = 0.0;
  for (std::size_t i = 0; i < quantiles.size(); ++i) sum += rule.s2_weights[i] * quantiles[i];
  return sum;
}

}  // namespace sewma
