#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace docplan::cli {

/// Exit codes of the `docplan` tool.
enum ExitCode : int { kOk = 0, kConfigError = 2, kModuleError = 3 };

/// Runs one subcommand (forge, index, eval, sweep, replay, dsl). Errors are
/// written to `err` as a single JSON object.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace docplan::cli
