#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace tacnode::cli {

/// Runs one invocation; `args` excludes the program name.
/// Exit codes: 0 success, 1 numeric or envelope failure, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tacnode::cli
