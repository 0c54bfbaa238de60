#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace nonauto::cli {

enum ExitCode { kOk = 0, kIo = 1, kValidation = 2, kCheckFailed = 3 };

/// Runs one command line; reports go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nonauto::cli
