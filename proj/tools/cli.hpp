#pragma once

#include <ostream>

namespace finsler::cli {

enum ExitCode : int {
    kOk = 0,
    kInvalidInput = 1, // bad flags/config, domain errors
    kAmbiguous = 2,    // a rank verdict with gap_ratio below 10
    kNumerical = 3,    // budget, accuracy or other numerical failure
};

// Subcommands curvature | rank | scan | transport. The report goes to --out
// (or `out` when no path is given), the one-line summary always to `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace finsler::cli
