#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace socialwell::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand (isa, swbi, leadlag, cca, regress, synth) with the
/// given arguments, excluding the program name. Returns the exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace socialwell::cli
