#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace quantilab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumeric = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command line `args` (program name excluded). Results go to `out`
/// unless --output names a file; diagnostics and usage text go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace quantilab::cli
