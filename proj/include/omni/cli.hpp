#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace omni::cli {

// Parses argv-style arguments and runs the matching subcommand.
// Exit codes: 0 success, 1 module error, 2 usage error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace omni::cli
