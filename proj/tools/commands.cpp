#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "parallel.hpp"
#include "sewma/errors.hpp"
#include "sewma/simulation.hpp"
#include "sewma/unconditional.hpp"

namespace sewma::cli {
namespace {

int digits_or(const Params& p, int fallback) { return p.digits.value_or(fallback); }

// Survival curve p_1..p_lmax at one sigma.
std::vector<double> survival(const Params& p, double sigma, std::size_t lmax) {
  const auto config = p.chart();
  const auto limits = p.limits();
  if (const auto phase1 = p.phase1()) {
    return sf_unconditional(lmax, config, *phase1, sigma, limits, p.unconditional_options());
  }
  const auto opts = p.conditional_options();
  const RLCurve curve = opts.method == SfMethod::Collocation
                            ? sf_conditional(config, sigma * sigma, limits, lmax, opts.basis_size, opts.tail)
                            : sf_markov_chain(config, sigma * sigma, limits, lmax, opts.markov_states, opts.tail);
  std::vector<double> out(lmax);
  for (std::size_t l = 1; l <= lmax; ++l) out[l - 1] = curve.at(l);
  return out;
}

double cdf_at(const Params& p, double sigma, std::size_t l) {
  if (const auto phase1 = p.phase1()) {
    return cdf_unconditional(l, p.chart(), *phase1, sigma, p.limits(), p.unconditional_options());
  }
  return 1.0 - survival(p, sigma, l).back();
}

struct ArlValue {
  double value = 0.0;
  bool lower_bound = false;  // value is only a lower bound
};

ArlValue arl_at(const Params& p, double sigma) {
  try {
    if (const auto phase1 = p.phase1()) {
      return {arl_unconditional(p.chart(), *phase1, sigma, p.limits(), p.unconditional_options()), false};
    }
    return {arl_conditional(p.chart(), sigma * sigma, p.limits(), p.conditional_options()), false};
  } catch (const DivergenceError& e) {
    if (e.lower_bound() > 0.0) return {e.lower_bound(), true};
    throw;
  }
}

struct Crit {
  Limits limits;
  std::optional<double> xi;
  bool boundary = false;
};

Crit solve_crit(const Params& p) {
  const auto config = p.chart();
  const auto target = p.target();
  const auto phase1 = p.phase1();
  const auto options = p.design_options();
  if (config.sided == Sided::Upper) return {solve_upper(config, target, phase1, options), std::nullopt, false};
  switch (p.two_sided_variant()) {
    case TwoSidedVariant::Symmetric:
      return {solve_two_sided_symmetric(config, target, phase1, options), std::nullopt, false};
    case TwoSidedVariant::Unbiased: {
      const auto s = solve_two_sided_unbiased(config, target, phase1, options);
      return {s.limits, std::nullopt, s.design.boundary};
    }
    case TwoSidedVariant::QuasiUnbiased: {
      if (!phase1) throw UsageError("--variant quasi needs --m");
      const auto s = solve_two_sided_quasi(config, target, *phase1, options);
      return {s.limits, s.design.xi, s.design.boundary};
    }
  }
  throw UsageError("unknown variant");
}

std::string fixed(double x, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
  return buf;
}

std::string pad_left(const std::string& text, std::size_t width) {
  return text.size() >= width ? text : std::string(width - text.size(), ' ') + text;
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const InfeasibleTarget*>(&e)) return std::string("infeasible: ") + e.what();
  if (dynamic_cast<const NumericalError*>(&e)) return std::string("numerical: ") + e.what();
  return std::string("error: ") + e.what();
}

}  // namespace

Report cmd_sf(const Params& p) {
  const int d = digits_or(p, 6);
  Report r{p.echo(), {"sigma", "l", "sf", "cdf"}, {}, {}};
  for (double sigma : p.sigma) {
    const auto sf = survival(p, sigma, p.lmax);
    for (std::size_t l = 1; l <= sf.size(); ++l) {
      r.rows.push_back({number(sigma, d), l, number(sf[l - 1], d), number(1.0 - sf[l - 1], d)});
    }
  }
  return r;
}

Report cmd_arl(const Params& p) {
  const int d = digits_or(p, 6);
  Report r{p.echo(), {"sigma", "arl", "lower_bound_only"}, {}, {}};
  std::vector<ArlValue> values;
  for (double sigma : p.sigma) {
    values.push_back(arl_at(p, sigma));
    r.rows.push_back({number(sigma, d), number(values.back().value, d), values.back().lower_bound});
  }
  // R-style data frame: one column per sigma, 3 significant digits.
  const int shown = digits_or(p, 3);
  r.text = [values, sigmas = p.sigma, shown](std::ostream& out) {
    std::vector<std::string> heads, cells;
    for (std::size_t i = 0; i < values.size(); ++i) {
      heads.push_back("s=" + r_format(sigmas[i], 6));
      cells.push_back((values[i].lower_bound ? ">" : "") + r_format(values[i].value, shown));
    }
    std::string head = "   ", body = "arl";
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::size_t w = std::max(heads[i].size(), cells[i].size());
      head += ' ' + pad_left(heads[i], w);
      body += ' ' + pad_left(cells[i], w);
    }
    out << head << '\n' << body << '\n';
  };
  return r;
}

Report cmd_crit(const Params& p) {
  const int d = digits_or(p, 6);
  const Crit c = solve_crit(p);
  Report r{p.echo(), {"cl", "cu", "xi", "boundary"}, {}, {}};
  r.rows.push_back({number(c.limits.lower_or_zero(), d), number(c.limits.upper, d),
                    c.xi ? number(*c.xi, d) : Json(), c.boundary});
  const int decimals = digits_or(p, 4);
  r.text = [c, decimals](std::ostream& out) {
    std::vector<std::pair<std::string, std::string>> cols{{"cl", fixed(c.limits.lower_or_zero(), decimals)},
                                                          {"cu", fixed(c.limits.upper, decimals)}};
    if (c.xi) cols.emplace_back("xi", fixed(*c.xi, decimals));
    std::string head, body;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const std::size_t w = std::max(cols[i].first.size(), cols[i].second.size());
      head += (i ? " " : "") + pad_left(cols[i].first, w);
      body += (i ? " " : "") + pad_left(cols[i].second, w);
    }
    out << head << '\n' << body << '\n';
    if (c.boundary) out << "# lower limit at the boundary c_l = 0\n";
  };
  return r;
}

Report cmd_sweep(const Params& p) {
  if (p.over != "m" && p.over != "lambda" && p.over != "sigma") throw UsageError("--over must be m, lambda or sigma");
  const auto grid = parse_grid(p.values);
  const std::string quantity = p.quantity.empty() ? (p.over == "sigma" ? "cdf" : "crit") : p.quantity;
  if (quantity != "crit" && quantity != "arl" && quantity != "cdf") {
    throw UsageError("sweep --quantity must be crit, arl or cdf");
  }
  if (quantity == "crit" && p.over == "sigma") throw UsageError("limits do not depend on sigma");
  const int d = digits_or(p, 6);
  const std::size_t l = p.l.value_or(p.lbar);

  Report r{p.echo(), {}, std::vector<std::vector<Json>>(grid.size()), {}};
  r.params["quantity"] = quantity;
  if (quantity == "crit") {
    r.columns = {p.over, "cl", "cu", "xi", "error"};
  } else if (quantity == "arl") {
    r.columns = {p.over, "arl", "lower_bound_only", "error"};
  } else {
    r.columns = {p.over, "cdf", "error"};
  }
  const std::size_t width = r.columns.size();

  detail::for_each_index(grid.size(), p.parallel, [&](std::size_t i) {
    Params q = p;
    q.parallel = false;
    double sigma = 1.0;
    Json axis;
    if (p.over == "m") {
      q.m = std::lround(grid[i]);
      axis = *q.m;
    } else if (p.over == "lambda") {
      q.lambda = grid[i];
      axis = number(grid[i], d);
    } else {
      sigma = grid[i];
      axis = number(grid[i], d);
    }
    std::vector<Json> row(width);
    row[0] = axis;
    try {
      if (quantity == "crit") {
        const Crit c = solve_crit(q);
        row[1] = number(c.limits.lower_or_zero(), d);
        row[2] = number(c.limits.upper, d);
        row[3] = c.xi ? number(*c.xi, d) : Json();
      } else if (quantity == "arl") {
        const ArlValue a = arl_at(q, sigma);
        row[1] = number(a.value, d);
        row[2] = a.lower_bound;
      } else {
        row[1] = number(cdf_at(q, sigma, l), d);
      }
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception& e) {
      row[width - 1] = error_kind(e);
    }
    r.rows[i] = std::move(row);
  });
  return r;
}

Report cmd_validate(const Params& p, bool& failed) {
  const std::string quantity = p.quantity.empty() ? "cdf" : p.quantity;
  if (quantity != "cdf" && quantity != "sf" && quantity != "arl") {
    throw UsageError("validate --quantity must be cdf, sf or arl");
  }
  const std::size_t l = p.l.value_or(p.lbar);
  if (quantity != "arl" && l > p.lcap) throw UsageError("--l must not exceed --lcap");
  const int d = digits_or(p, 6);
  Report r{p.echo(), {"sigma", "quantity", "numeric", "monte_carlo", "standard_error", "z", "lcap", "censored_fraction", "note"},
           {}, {}};
  r.params["quantity"] = quantity;
  failed = false;
  for (double sigma : p.sigma) {
    mc::SimulationSpec spec;
    spec.config = p.chart();
    spec.phase1 = p.phase1();
    spec.sigma = sigma;
    spec.limits = p.limits();
    spec.replications = p.reps;
    // P(L > l) only needs each run up to l.
    spec.l_cap = quantity == "arl" ? p.lcap : std::min<std::uint64_t>(p.lcap, l);
    spec.seed = p.seed;
    spec.parallel = p.parallel;
    const mc::EmpiricalRL sim = mc::estimate_unconditional(spec);

    double numeric = 0.0, estimate = 0.0, se = 0.0;
    std::string note;
    bool judged = true;
    if (quantity == "arl") {
      const ArlValue a = arl_at(p, sigma);
      const mc::ArlEstimate e = sim.arl();
      numeric = a.value;
      estimate = e.mean;
      se = e.standard_error;
      if (a.lower_bound) note = "numeric value is a lower bound; ";
      if (e.lower_bound_only) {
        note += "censored runs counted as lcap, Monte Carlo mean is a lower bound";
        judged = false;
      }
    } else {
      const double cdf = cdf_at(p, sigma, l);
      numeric = quantity == "cdf" ? cdf : 1.0 - cdf;
      estimate = quantity == "cdf" ? sim.cdf(l) : sim.sf(l);
      se = sim.sf_standard_error(l);
    }
    double z = 0.0;
    if (se > 0.0) {
      z = (estimate - numeric) / se;
    } else if (estimate != numeric) {
      z = std::copysign(INFINITY, estimate - numeric);
    }
    if (judged && std::fabs(z) > 3.0) failed = true;
    r.rows.push_back({number(sigma, d), quantity == "arl" ? Json("arl") : Json(quantity + "@" + std::to_string(l)),
                      number(numeric, d), number(estimate, d), number(se, d),
                      judged ? number(z, 4) : Json(), sim.l_cap, number(sim.censored_fraction(), d),
                      note.empty() ? Json() : Json(note)});
  }
  return r;
}

}  // namespace sewma::cli
