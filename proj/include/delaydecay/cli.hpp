#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace delaydecay::cli {

// Dispatches one command line (without the program name) and writes results
// to `out` and diagnostics to `err`. Returns the process exit status:
// 0 success, 1 failed verify checks, 2 usage or spec-syntax error, 3 domain
// or parameter error, 4 bracket/search failure.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

} // namespace delaydecay::cli
