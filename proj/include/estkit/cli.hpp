#pragma once

#include <string>
#include <vector>

namespace estkit {

/// Command-line front end. Exit codes: 0 success, 1 I/O failure, 2 bad
/// arguments or config, 3 filter divergence (run) or failed selftest.
int run_cli(const std::vector<std::string>& args);

}  // namespace estkit
