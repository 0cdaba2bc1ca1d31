#pragma once

// Command-line entry point. Exit codes: 0 success, 1 runtime failure,
// 2 config error, 3 hypothesis violation.

#include <iosfwd>
#include <string>
#include <vector>

namespace levyclock {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitHypothesis = 3;

/// args excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace levyclock
