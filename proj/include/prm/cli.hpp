#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace prm::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kOk = 0,
  /// Invalid arguments, inputs, or an estimation/metric failure.
  kInvalid = 1,
  /// A file could not be read or written.
  kIoError = 2,
};

/// Runs the `prmeval` command line. args[0] is the program name. Reports go
/// to `out` (unless --out is given), diagnostics and warnings to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace prm::cli
