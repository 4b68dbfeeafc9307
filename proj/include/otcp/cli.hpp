#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace otcp::cli {

// Entry point shared by the binary and the tests.  args excludes the program
// name.  Exit codes: 0 success, 2 file or format problems, 3 configuration,
// 4 convergence or sampling failures.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace otcp::cli
