#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace navkit::cli {

/// Exit statuses: 0 success, 1 usage, 2 input or parse error, 3 numerical or degenerate input.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace navkit::cli
