#pragma once

#include "vmsns/config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace vmsns {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitConfig = 2, kExitSolver = 3, kExitInvariant = 4 };

/// Run specification for one mesh level of a scenario (n overrides mesh.n when > 0).
RunSpec make_run_spec(const ScenarioConfig& config, int n = 0);

/// Thread cap from VMSNS_THREADS (default: hardware concurrency, at least 1).
int thread_limit();

/// Entry point of the `vmsns` tool; args exclude the program name.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_dispatch(int argc, char** argv);

}  // namespace vmsns
