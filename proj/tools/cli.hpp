#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ritual::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kData = 2,
    kIo = 3,
};

/// Runs one subcommand (`index`, `search`, `session`, `eval`, `gen`,
/// `serve`). `args` excludes the program name.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

} // namespace ritual::cli
