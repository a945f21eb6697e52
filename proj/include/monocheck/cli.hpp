#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace monocheck::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

/// Runs the command-line frontend. Reports go to `out` (or the --output
/// file), diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace monocheck::cli
