#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "design/root_finder.hpp"
#include "parallel.hpp"
#include "sewma/conditional.hpp"
#include "sewma/design.hpp"
#include "sewma/errors.hpp"

namespace sewma {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// In-control target and sensitivity evaluations for one design problem.
class Evaluator {
 public:
  Evaluator(const ChartConfig& config, const DesignTarget& target, const std::optional<PhaseIConfig>& phase1,
            const DesignOptions& options)
      : config_(config), target_(target), phase1_(phase1), options_(options) {
    config.validate();
    target.validate();
    if (target.unconditional && !phase1) throw DomainError("unconditional design target needs a phase I size");
    if (phase1) phase1->validate();
  }

  // P_sigma(L <= l_bar).
  double probability(const Limits& limits, double sigma) const {
    const auto l_bar = std::get<QuantileRule>(target_.rule).l_bar;
    if (target_.unconditional) {
      return cdf_unconditional(l_bar, config_, *phase1_, sigma, limits, options_.evaluation);
    }
    const auto model = make_model(config_, sigma * sigma, limits, options_.evaluation.conditional);
    const auto trace = trace_sf(*model, l_bar, options_.evaluation.conditional.tail);
    return std::clamp(1.0 - trace.at(l_bar), 0.0, 1.0);
  }

  // E_sigma(L); +inf when it is beyond numerical resolution.
  double arl(const Limits& limits, double sigma) const {
    try {
      if (target_.unconditional) return arl_unconditional(config_, *phase1_, sigma, limits, options_.evaluation);
      return arl_conditional(config_, sigma * sigma, limits, options_.evaluation.conditional);
    } catch (const DivergenceError&) {
      return kInf;
    }
  }

  // Increasing in the width of the continuation region; zero on target.
  double residual(const Limits& limits) const {
    if (const auto* q = std::get_if<QuantileRule>(&target_.rule)) return q->alpha - probability(limits, 1.0);
    const double a = arl(limits, 1.0);
    return std::isinf(a) ? kInf : std::log(a / std::get<ArlRule>(target_.rule).arl0);
  }

  // Increasing in c_l; zero when the two sides of sigma = 1 are balanced.
  double asymmetry(const Limits& limits) const {
    const double eps = options_.epsilon;
    if (std::holds_alternative<QuantileRule>(target_.rule)) {
      return probability(limits, 1.0 - eps) - probability(limits, 1.0 + eps);
    }
    const double down = arl(limits, 1.0 - eps);
    const double up = arl(limits, 1.0 + eps);
    if (std::isinf(down)) return -kInf;
    if (std::isinf(up)) return kInf;
    return std::log(up / down);
  }

  const ChartConfig& config() const noexcept { return config_; }
  const DesignOptions& options() const noexcept { return options_; }

  detail::RootOptions root_options() const {
    return {options_.residual_tolerance, options_.limit_tolerance, options_.max_iterations,
            std::holds_alternative<ArlRule>(target_.rule)};
  }

 private:
  ChartConfig config_;
  DesignTarget target_;
  std::optional<PhaseIConfig> phase1_;
  DesignOptions options_;
};

// Rough in-control spread of Z, used only for starting values.
double asymptotic_sd(const ChartConfig& config) {
  return config.z0 * std::sqrt(2.0 / config.df() * config.lambda / (2.0 - config.lambda));
}

DesignTarget known_case(DesignTarget target) {
  target.unconditional = false;
  return target;
}

ChartConfig with_sided(ChartConfig config, Sided sided) {
  config.sided = sided;
  return config;
}

double solve_upper_from(const Evaluator& eval, double start) {
  const auto& config = eval.config();
  const double lo = (1.0 - config.lambda) * config.z0;
  const double hi = eval.options().max_limit * config.z0;
  return detail::solve_increasing([&](double c) { return eval.residual(Limits::upper_only(c)); }, start,
                                  std::max(1e-3, eval.options().start_inflation * start), lo, hi,
                                  eval.root_options(), "upper limit");
}

Limits symmetric_limits(double z0, double half_width) {
  return Limits::two_sided(std::max(0.0, z0 - half_width), z0 + half_width);
}

double solve_symmetric_from(const Evaluator& eval, double start) {
  const auto& config = eval.config();
  return detail::solve_increasing(
      [&](double c) { return eval.residual(symmetric_limits(config.z0, c)); }, start,
      std::max(1e-3, eval.options().start_inflation * start), 0.0, eval.options().max_limit * config.z0,
      eval.root_options(), "symmetric half width");
}

// Nested solve: c_u meets the target for every trial c_l, c_l balances the sides.
TwoSidedSolution solve_unbiased_from(const Evaluator& eval, double cl_start, double cu_start) {
  const auto& config = eval.config();
  const double z0 = config.z0;
  const double hi = eval.options().max_limit * z0;
  double cu_warm = cu_start;

  const auto inner = [&](double c_l) {
    const double lo = std::max(c_l, (1.0 - config.lambda) * z0);
    const double start = std::max(cu_warm, lo + 1e-3 * z0);
    const auto residual = [&](double c) { return eval.residual(Limits::two_sided(c_l, c)); };
    if (residual(hi) < 0.0) throw InfeasibleTarget("upper limit: lower limit alone exceeds the target");
    const double c_u = detail::solve_increasing(residual, start,
        std::max(1e-3, eval.options().start_inflation * start), lo, hi, eval.root_options(), "upper limit");
    cu_warm = c_u;
    return c_u;
  };
  const auto outer = [&](double c_l) {
    try {
      return eval.asymmetry(Limits::two_sided(c_l, inner(c_l)));
    } catch (const InfeasibleTarget&) {
      // The lower side alone already signals too often.
      return kInf;
    }
  };

  TwoSidedSolution out;
  const double at_zero = outer(0.0);
  if (at_zero >= 0.0) {
    out.limits = Limits::two_sided(0.0, inner(0.0));
    out.design.boundary = at_zero > eval.options().residual_tolerance;
    return out;
  }
  auto opt = eval.root_options();
  opt.residual_tolerance = std::max(opt.residual_tolerance, 1e-9);
  opt.limit_tolerance = std::max(opt.limit_tolerance, 1e-7);
  const double c_l = detail::solve_increasing(outer, std::clamp(cl_start, 1e-6 * z0, z0 * (1.0 - 1e-9)),
                                              std::max(1e-3, eval.options().start_inflation * cl_start), 0.0,
                                              z0 * (1.0 - 1e-9), opt, "lower limit");
  out.limits = Limits::two_sided(c_l, inner(c_l));
  return out;
}

}  // namespace

void DesignTarget::validate() const {
  if (const auto* q = std::get_if<QuantileRule>(&rule)) {
    if (q->l_bar < 1) throw DomainError("quantile rule needs l_bar >= 1");
    if (!(q->alpha > 0.0 && q->alpha < 1.0)) throw DomainError("quantile rule needs 0 < alpha < 1");
  } else {
    const double arl0 = std::get<ArlRule>(rule).arl0;
    if (!(arl0 > 1.0) || !std::isfinite(arl0)) throw DomainError("ARL rule needs arl0 > 1");
  }
}

const char* to_string(TwoSidedVariant variant) noexcept {
  switch (variant) {
    case TwoSidedVariant::Symmetric: return "symmetric";
    case TwoSidedVariant::Unbiased: return "unbiased";
    case TwoSidedVariant::QuasiUnbiased: return "quasi";
  }
  return "?";
}

TwoSidedVariant parse_variant(const std::string& text) {
  if (text == "symmetric" || text == "sym") return TwoSidedVariant::Symmetric;
  if (text == "unbiased") return TwoSidedVariant::Unbiased;
  if (text == "quasi" || text == "quasi-unbiased") return TwoSidedVariant::QuasiUnbiased;
  throw DomainError("unknown two-sided variant '" + text + "' (expected symmetric, unbiased or quasi)");
}

Limits solve_upper(const ChartConfig& config_in, const DesignTarget& target, const std::optional<PhaseIConfig>& phase1,
                   const DesignOptions& options) {
  const auto config = with_sided(config_in, Sided::Upper);
  const Evaluator known(config, known_case(target), std::nullopt, options);
  const double c_known = solve_upper_from(known, config.z0 + 3.0 * asymptotic_sd(config));
  if (!target.unconditional) return Limits::upper_only(c_known);
  const Evaluator eval(config, target, phase1, options);
  return Limits::upper_only(solve_upper_from(eval, c_known * (1.0 + options.start_inflation)));
}

Limits solve_two_sided_symmetric(const ChartConfig& config_in, const DesignTarget& target,
                                 const std::optional<PhaseIConfig>& phase1, const DesignOptions& options) {
  const auto config = with_sided(config_in, Sided::TwoSided);
  const Evaluator known(config, known_case(target), std::nullopt, options);
  const double c_known = solve_symmetric_from(known, 3.0 * asymptotic_sd(config));
  if (!target.unconditional) return symmetric_limits(config.z0, c_known);
  const Evaluator eval(config, target, phase1, options);
  return symmetric_limits(config.z0, solve_symmetric_from(eval, c_known * (1.0 + options.start_inflation)));
}

TwoSidedSolution solve_two_sided_unbiased(const ChartConfig& config_in, const DesignTarget& target,
                                          const std::optional<PhaseIConfig>& phase1, const DesignOptions& options) {
  const auto config = with_sided(config_in, Sided::TwoSided);
  const Evaluator known(config, known_case(target), std::nullopt, options);
  const double half = solve_symmetric_from(known, 3.0 * asymptotic_sd(config));
  auto solution = solve_unbiased_from(known, config.z0 - 0.6 * half, config.z0 + half);
  if (target.unconditional) {
    const Evaluator eval(config, target, phase1, options);
    const double inflate = 1.0 + options.start_inflation;
    solution = solve_unbiased_from(eval, *solution.limits.lower / inflate, solution.limits.upper * inflate);
  }
  solution.design.variant = TwoSidedVariant::Unbiased;
  return solution;
}

TwoSidedSolution solve_two_sided_quasi(const ChartConfig& config_in, const DesignTarget& target,
                                       const PhaseIConfig& phase1, const DesignOptions& options) {
  const auto config = with_sided(config_in, Sided::TwoSided);
  const auto base = solve_two_sided_unbiased(config, known_case(target), std::nullopt, options).limits;
  auto unconditional = target;
  unconditional.unconditional = true;
  const Evaluator eval(config, unconditional, phase1, options);
  const auto widened = [&](double xi) { return Limits::two_sided(*base.lower / xi, base.upper * xi); };
  const auto residual = [&](double xi) { return eval.residual(widened(xi)); };

  constexpr double xi_max = 3.0;
  double xi = 1.0;
  const double at_one = residual(1.0);
  if (at_one > options.residual_tolerance) {
    throw InfeasibleTarget("quasi-unbiased design: known-case limits already exceed the target; no xi > 1");
  }
  if (at_one < -options.residual_tolerance) {
    xi = detail::solve_increasing(residual, 1.0 + options.start_inflation, options.start_inflation, 1.0, xi_max,
                                  eval.root_options(), "inflation factor xi");
  }
  TwoSidedSolution out;
  out.limits = widened(xi);
  out.design.variant = TwoSidedVariant::QuasiUnbiased;
  out.design.xi = xi;
  out.design.base_limits = base;
  return out;
}

Limits solve_two_sided_arl_unbiased(const ChartConfig& config, double arl0, const DesignOptions& options) {
  DesignTarget target;
  target.rule = ArlRule{arl0};
  return solve_two_sided_unbiased(config, target, std::nullopt, options).limits;
}

std::vector<ProfileRow> limit_vs_m_profile(const ChartConfig& config, const DesignTarget& target,
                                           const std::vector<long>& m_list, TwoSidedVariant variant,
                                           const DesignOptions& options, bool parallel) {
  if (m_list.empty()) throw DomainError("profile needs at least one phase I size");
  if (!std::is_sorted(m_list.begin(), m_list.end()) ||
      std::adjacent_find(m_list.begin(), m_list.end()) != m_list.end()) {
    throw DomainError("phase I sizes must be strictly ascending");
  }
  auto unconditional = target;
  unconditional.unconditional = true;
  std::vector<ProfileRow> rows(m_list.size());
  detail::for_each_index(m_list.size(), parallel, [&](std::size_t i) {
    const long m = m_list[i];
    const auto phase1 = PhaseIConfig::make(m, config.n);
    const auto annotate = [m](const std::exception& e) { return "m = " + std::to_string(m) + ": " + e.what(); };
    try {
      ProfileRow row;
      row.m = m;
      if (config.sided == Sided::Upper) {
        row.limits = solve_upper(config, unconditional, phase1, options);
      } else if (variant == TwoSidedVariant::Symmetric) {
        row.limits = solve_two_sided_symmetric(config, unconditional, phase1, options);
      } else if (variant == TwoSidedVariant::Unbiased) {
        row.limits = solve_two_sided_unbiased(config, unconditional, phase1, options).limits;
      } else {
        const auto solution = solve_two_sided_quasi(config, unconditional, phase1, options);
        row.limits = solution.limits;
        row.xi = solution.design.xi;
      }
      rows[i] = row;
    } catch (const InfeasibleTarget& e) {
      throw InfeasibleTarget(annotate(e));
    } catch (const DomainError& e) {
      throw DomainError(annotate(e));
    } catch (const NumericalError& e) {
      throw NumericalError(annotate(e));
    }
  });
  return rows;
}

}  // namespace sewma
