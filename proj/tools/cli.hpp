#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace subsel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitValidation = 2;

/// Runs one command line (args excludes the program name). Results go to
/// out or to the requested files; diagnostics go to err as a single line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace subsel::cli
