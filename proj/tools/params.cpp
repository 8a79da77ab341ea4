#include "params.hpp"

#include <cmath>
#include <sstream>

namespace sewma::cli {

ChartConfig Params::chart() const {
  ChartConfig config{lambda, n, parse_sided(sided), hs};
  config.validate();
  return config;
}

std::optional<PhaseIConfig> Params::phase1() const {
  if (!m) return std::nullopt;
  return PhaseIConfig::make(*m, n);
}

Limits Params::limits() const {
  if (!cu) throw UsageError("--cu is required");
  const Sided s = parse_sided(sided);
  if (s == Sided::Upper) {
    if (cl && *cl != 0.0) throw UsageError("--cl is only meaningful with --sided two");
    return Limits::upper_only(*cu);
  }
  if (!cl) throw UsageError("--sided two needs --cl");
  Limits limits = Limits::two_sided(*cl, *cu);
  limits.validate(s);
  return limits;
}

DesignTarget Params::target() const {
  DesignTarget target;
  if (arl0) {
    target.rule = ArlRule{*arl0};
  } else {
    target.rule = QuantileRule{lbar, alpha};
  }
  target.unconditional = m.has_value();
  target.validate();
  return target;
}

TwoSidedVariant Params::two_sided_variant() const { return parse_variant(variant); }

ConditionalOptions Params::conditional_options() const {
  ConditionalOptions options;
  if (method == "collocation") {
    options.method = SfMethod::Collocation;
  } else if (method == "markov") {
    options.method = SfMethod::MarkovChain;
  } else {
    throw UsageError("--method must be collocation or markov");
  }
  options.basis_size = basis;
  options.markov_states = states;
  return options;
}

UnconditionalOptions Params::unconditional_options() const {
  UnconditionalOptions options;
  options.conditional = conditional_options();
  options.mixing_nodes = nodes;
  if (!(truncate > 0.0 && truncate < 1.0)) throw UsageError("--truncate must lie in (0, 1)");
  options.mixing_tail = 0.5 * truncate;
  options.parallel = parallel;
  return options;
}

DesignOptions Params::design_options() const {
  DesignOptions options;
  options.evaluation = unconditional_options();
  return options;
}

nlohmann::ordered_json Params::echo() const {
  nlohmann::ordered_json out;
  out["command"] = command;
  out["lambda"] = lambda;
  out["n"] = n;
  out["df"] = n - 1;
  out["sided"] = sided;
  out["hs"] = hs;
  out["cl"] = cl ? nlohmann::ordered_json(*cl) : nlohmann::ordered_json();
  out["cu"] = cu ? nlohmann::ordered_json(*cu) : nlohmann::ordered_json();
  out["sigma"] = sigma;
  out["m"] = m ? nlohmann::ordered_json(*m) : nlohmann::ordered_json();
  out["phase1_df"] = m ? nlohmann::ordered_json(*m * (n - 1)) : nlohmann::ordered_json();
  out["lmax"] = lmax;
  if (arl0) {
    out["arl0"] = *arl0;
  } else {
    out["lbar"] = lbar;
    out["alpha"] = alpha;
  }
  out["variant"] = variant;
  if (!over.empty()) {
    out["over"] = over;
    out["values"] = values;
  }
  if (!quantity.empty()) out["quantity"] = quantity;
  if (l) out["l"] = *l;

  const DesignOptions design = design_options();
  const auto& cond = design.evaluation.conditional;
  nlohmann::ordered_json numerics;
  numerics["method"] = method;
  if (method == "collocation") {
    numerics["basis_size"] = cond.basis_size;
    numerics["quadrature_nodes"] = cond.quad_factor * cond.basis_size;
  } else {
    numerics["markov_states"] = cond.markov_states;
  }
  numerics["mixing_nodes"] = m ? nlohmann::ordered_json(nodes) : nlohmann::ordered_json();
  numerics["mixing_truncate"] = m ? nlohmann::ordered_json(truncate) : nlohmann::ordered_json();
  numerics["tail_tolerance"] = cond.tail.tolerance;
  numerics["tail_window"] = cond.tail.window;
  numerics["design_residual_tolerance"] = design.residual_tolerance;
  numerics["design_limit_tolerance"] = design.limit_tolerance;
  numerics["unbiased_epsilon"] = design.epsilon;
  out["numerics"] = numerics;
  if (command == "validate") {
    out["reps"] = reps;
    out["seed"] = seed;
    out["lcap"] = lcap;
  }
  out["format"] = format;
  out["digits"] = digits ? nlohmann::ordered_json(*digits) : nlohmann::ordered_json();
  return out;
}

void add_flags(CLI::App& app, Params& p) {
  app.add_option("--lambda", p.lambda, "EWMA smoothing constant in (0, 1]")->capture_default_str();
  app.add_option("--n", p.n, "subgroup size")->capture_default_str();
  app.add_option("--sided", p.sided, "upper or two")->capture_default_str();
  app.add_option("--cl", p.cl, "lower control limit");
  app.add_option("--cu", p.cu, "upper control limit");
  app.add_option("--sigma", p.sigma, "actual standard deviation(s), in units of sigma0")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--lmax", p.lmax, "largest run length of the survival curve")->capture_default_str();
  app.add_option("--m", p.m, "phase I size; absent means sigma0 is known");
  app.add_option("--hs", p.hs, "head start z0")->capture_default_str();
  app.add_option("--lbar", p.lbar, "horizon of the quantile rule")->capture_default_str();
  app.add_option("--alpha", p.alpha, "false alarm probability within lbar")->capture_default_str();
  app.add_option("--arl0", p.arl0, "design for an in-control ARL instead of the quantile rule");
  app.add_option("--variant", p.variant, "two-sided design: symmetric, unbiased or quasi")->capture_default_str();
  app.add_option("--truncate", p.truncate, "mass cut from the phase I mixing integral, half from each tail")
      ->capture_default_str();
  app.add_option("--method", p.method, "collocation or markov")->capture_default_str();
  app.add_option("--N", p.basis, "Chebyshev polynomials per collocation piece")->capture_default_str();
  app.add_option("--states", p.states, "Markov chain states")->capture_default_str();
  app.add_option("--nodes", p.nodes, "quadrature nodes over the phase I estimate")->capture_default_str();
  app.add_option("--over", p.over, "sweep axis: m, lambda or sigma");
  app.add_option("--values", p.values, "sweep grid, e.g. 15:1200 or 0.05,0.1,0.2");
  app.add_option("--quantity", p.quantity, "sweep/validate quantity: crit, arl, cdf or sf");
  app.add_option("--l", p.l, "run length for cdf/sf quantities (default lbar)");
  app.add_option("--reps", p.reps, "Monte Carlo replications")->capture_default_str();
  app.add_option("--seed", p.seed, "Monte Carlo seed")->capture_default_str();
  app.add_option("--lcap", p.lcap, "Monte Carlo truncation horizon")->capture_default_str();
  app.add_option("--format", p.format, "json, csv, tsv or text")
      ->check(CLI::IsMember({"json", "csv", "tsv", "text"}))
      ->capture_default_str();
  app.add_option("--digits", p.digits, "significant digits (text: decimals for limits)");
  app.add_flag("--parallel", p.parallel, "use all hardware threads");
  app.set_config("--config", "", "key=value file; command-line flags take precedence");
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream items(text);
  std::string item;
  while (std::getline(items, item, ',')) {
    if (item.empty()) continue;
    std::vector<double> parts;
    std::stringstream fields(item);
    std::string field;
    while (std::getline(fields, field, ':')) {
      try {
        std::size_t used = 0;
        parts.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw UsageError("bad grid entry '" + item + "'");
      }
    }
    if (parts.size() == 1) {
      out.push_back(parts[0]);
    } else if (parts.size() == 2 || parts.size() == 3) {
      const double step = parts.size() == 3 ? parts[2] : 1.0;
      if (!(step > 0.0) || parts[1] < parts[0]) throw UsageError("bad grid range '" + item + "'");
      const auto count = static_cast<long>(std::floor((parts[1] - parts[0]) / step + 1e-9));
      for (long k = 0; k <= count; ++k) out.push_back(parts[0] + static_cast<double>(k) * step);
    } else {
      throw UsageError("bad grid entry '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError("empty grid");
  return out;
}

}  // namespace sewma::cli
