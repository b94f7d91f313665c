#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nilconj::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDiscrepancy = 1;
inline constexpr int kExitInputError = 2;

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nilconj::cli
