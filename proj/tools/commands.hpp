#pragma once

#include "params.hpp"
#include "report.hpp"

namespace sewma::cli {

/// Exit status for a validate run whose numeric and Monte Carlo values disagree.
inline constexpr int kValidationFailed = 1;

Report cmd_sf(const Params& p);
Report cmd_arl(const Params& p);
Report cmd_crit(const Params& p);
Report cmd_sweep(const Params& p);
/// Sets `failed` when some |z| exceeds 3.
Report cmd_validate(const Params& p, bool& failed);

}  // namespace sewma::cli
