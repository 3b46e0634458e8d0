#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace steinkit::cli {

enum ExitCode : int {
    ok = 0,
    parse_error = 1,
    numerical_failure = 2,
    no_kernel = 3,
    degenerate = 4,
};

/// Runs one verb. `args` excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace steinkit::cli
