#pragma once

#include <string>
#include <vector>

namespace cdmca::cli {

/// Runs the CLI with argv-style arguments (args[0] is the program name).
/// Returns the process exit code; errors go to stderr.
int run(const std::vector<std::string>& args);

}  // namespace cdmca::cli
