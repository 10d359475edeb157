#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace idapbc {

/// Runs one CLI command. args excludes the program name. Returns the process
/// exit code: 0 success, 1 configuration or input errors, 2 numeric failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace idapbc
