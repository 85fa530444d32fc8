#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mphd {

/// Runs one command line (args[0] is the program name). Failures print a one-line JSON error
/// record to `err`. Returns 0 on success, 1 for user errors, 2 for internal errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mphd
