#ifndef PRIVGUARD_CLI_HPP
#define PRIVGUARD_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace privguard::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kDataError = 2,
    kRuntimeError = 3,
};

struct CommandOutcome {
    int exit_code = kOk;
    std::string report;  // human-readable summary (also written to `out`)
};

/// Runs one `privguard` invocation. `argv` excludes the program name.
/// Prompts (the `label` subcommand) read from `in`.
CommandOutcome run_command(const std::vector<std::string>& argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace privguard::cli

#endif  // PRIVGUARD_CLI_HPP
