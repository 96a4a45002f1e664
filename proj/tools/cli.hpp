#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace seqcal::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kUsage = 2,
    kSearchExhausted = 3,
    kDomain = 4,
};

// Default seed when --seed is not given.
inline constexpr unsigned long long kDefaultSeed = 20240601ULL;

// Runs one command line (args[0] is the program name). Reports and curves go
// to files when paths are given, otherwise to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace seqcal::cli
