#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fuzzytomo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitUsage = 64;

/// Runs one subcommand (args excludes the program name). Output files go to
/// --out-dir, falling back to $FUZZYTOMO_OUT_DIR and then the working dir.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fuzzytomo::cli
