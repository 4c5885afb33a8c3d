#pragma once

#include <ostream>
#include <span>
#include <string>

namespace netdiff {

/// Dispatches one of gen-graph, graph-stats, simulate, estimate or mc.
/// `args` excludes the program name. Returns 0 on success, 2 on usage or
/// validation errors and 1 on runtime failures.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace netdiff
