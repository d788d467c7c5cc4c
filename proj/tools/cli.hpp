#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sceval::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitBadInput = 2;

/// Runs the command line `args` (without the program name). Standard-stream
/// paths ("-") use std::cin / `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sceval::cli
