// sewma: run-length distributions and control limits of the EWMA S^2 chart
// with an estimated in-control variance.
//
//   sewma crit --lambda 0.2 --m 50 --format text
//   sewma arl  --lambda 0.2 --m 50 --cu 2.1538 --sigma 1,1.5 --format text
//   sewma sweep --over m --values 15,20,30,50 --format csv

#include <iostream>

#include "commands.hpp"
#include "sewma/errors.hpp"

namespace {

constexpr int kUsage = 2;
constexpr int kNumerical = 3;
constexpr int kInfeasible = 4;

}  // namespace

int main(int argc, char** argv) {
  using namespace sewma;
  using namespace sewma::cli;

  CLI::App app{"Run-length distributions and control limits of the EWMA S^2 chart"};
  app.fallthrough();
  app.require_subcommand(1);
  Params p;
  add_flags(app, p);
  auto* sf = app.add_subcommand("sf", "survival function P(L > l), l = 1..lmax");
  auto* arl = app.add_subcommand("arl", "average run length");
  auto* crit = app.add_subcommand("crit", "control limits meeting the design target");
  crit->alias("q-crit");
  auto* sweep = app.add_subcommand("sweep", "one quantity over a grid of m, lambda or sigma");
  auto* validate = app.add_subcommand("validate", "numeric value against the Monte Carlo oracle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    bool failed = false;
    Report report;
    if (sf->parsed()) {
      p.command = "sf";
      report = cmd_sf(p);
    } else if (arl->parsed()) {
      p.command = "arl";
      report = cmd_arl(p);
    } else if (crit->parsed()) {
      p.command = "crit";
      report = cmd_crit(p);
    } else if (sweep->parsed()) {
      p.command = "sweep";
      report = cmd_sweep(p);
    } else if (validate->parsed()) {
      p.command = "validate";
      report = cmd_validate(p, failed);
    }
    render(report, p.format, std::cout);
    return failed ? kValidationFailed : 0;
  } catch (const UsageError& e) {
    std::cerr << "sewma: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "sewma: invalid parameters: " << e.what() << '\n';
    return kUsage;
  } catch (const InfeasibleTarget& e) {
    std::cerr << "sewma: infeasible target: " << e.what() << '\n';
    return kInfeasible;
  } catch (const NumericalError& e) {
    std::cerr << "sewma: numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
}
