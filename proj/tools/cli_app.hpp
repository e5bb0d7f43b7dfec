#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vrap::cli {

/// Exit statuses of the `vrap` binary.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitInternalError = 2;

/// Runs one invocation. `args` excludes the program name. Data goes to
/// `out` unless --output names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Subcommand paths ("parse", "cache build", ...) and the long flags each
/// one accepts; used by the help coverage test.
struct CommandFlags {
  std::string command;
  std::vector<std::string> flags;
};
std::vector<CommandFlags> command_flags();

}  // namespace vrap::cli
