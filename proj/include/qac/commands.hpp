#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qac {

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_numerical = 3, exit_verify = 4 };

/// Entry point of the `qac` tool. `args` excludes the program name. Records
/// go to `out` (or --out), diagnostics to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qac
