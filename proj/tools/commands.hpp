#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bsmx::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitSolver = 3;

/// Runs `bsmx <subcommand> ...`; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bsmx::cli
