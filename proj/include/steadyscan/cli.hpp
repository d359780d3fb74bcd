#pragma once

#include <iosfwd>

namespace steadyscan {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitParse = 2,
  kExitInconsistent = 3,
  kExitBudget = 4,
  kExitViolated = 5,  // `check` on a trace that violates the formula
};

/// Command-line front end: contract, pave, explain, sample, simulate, check
/// and pipeline. Settings resolve as flag, then STEADYSCAN_<NAME>, then the
/// model's `option <name>`, then the built-in default.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace steadyscan
