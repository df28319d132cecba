#pragma once

#include <ostream>

namespace dispref {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,  // unexpected internal error
    kExitInput = 2,    // missing or unreadable input, write failures
    kExitConfig = 3,   // bad configuration, checkpoint mismatch, contract violations
    kExitDivergence = 4,
};

/// Entry point of the `dispref` tool. Messages go to err, reports to out.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dispref
