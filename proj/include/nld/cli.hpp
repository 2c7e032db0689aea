#ifndef NLD_CLI_HPP
#define NLD_CLI_HPP

#include "nld/config.hpp"

#include <iosfwd>

namespace nld {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitNonConvergence = 3,
  kExitOrderViolation = 4,
  kExitAuditFailure = 5,
};

/// Environment variable that overrides the output directory (the --out flag still wins).
inline constexpr const char* kOutputDirEnv = "NLD_OUTPUT_DIR";

int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_converge(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_diagnose(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Entry point: `nld <solve|converge|diagnose> --config <path> [--out dir] [--seed n] [--threads k] [--assert-orders]`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nld

#endif
