#pragma once

#include <string>
#include <vector>

namespace spinspec {

// Entry point behind the command-line tool. Returns the process exit code:
// 0 on success, 2 on usage errors, 3 on numerical failure.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, const char* const* argv);

}  // namespace spinspec
