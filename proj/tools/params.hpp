#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sewma/design.hpp"

namespace sewma::cli {

/// Invalid flag combination; reported with exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Params {
  std::string command;

  double lambda = 0.1;
  int n = 5;
  std::string sided = "upper";
  std::optional<double> cl;
  std::optional<double> cu;
  std::vector<double> sigma{1.0};
  std::size_t lmax = 1000;
  std::optional<long> m;
  double hs = 1.0;

  std::size_t lbar = 1000;
  double alpha = 0.25;
  std::optional<double> arl0;
  std::string variant = "unbiased";

  std::string method = "collocation";
  int basis = 50;
  int states = 500;
  int nodes = 60;
  double truncate = 1e-10;

  std::string over;
  std::string values;
  std::string quantity;
  std::optional<std::size_t> l;

  std::uint64_t reps = 100'000;
  std::uint64_t seed = 1;
  std::uint64_t lcap = 1'000'000;

  std::string format = "json";
  std::optional<int> digits;
  bool parallel = false;

  ChartConfig chart() const;
  std::optional<PhaseIConfig> phase1() const;
  /// Limits from --cl/--cu; UsageError when they do not fit --sided.
  Limits limits() const;
  DesignTarget target() const;
  TwoSidedVariant two_sided_variant() const;
  ConditionalOptions conditional_options() const;
  UnconditionalOptions unconditional_options() const;
  DesignOptions design_options() const;

  /// Resolved parameters plus the numerical settings behind every value.
  nlohmann::ordered_json echo() const;
};

/// Registers all flags on `app` (shared by every subcommand).
void add_flags(CLI::App& app, Params& params);

/// "0.05,0.1" or "15:20" or "15:100:5", mixed freely.
std::vector<double> parse_grid(const std::string& text);

}  // namespace sewma::cli
