#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bcmc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitOutOfMemory = 3;

/// Runs the `bcmc` command line; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace bcmc::cli
