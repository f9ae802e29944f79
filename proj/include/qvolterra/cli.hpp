#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qvolterra {

/// Entry point of the qvnet command-line tool, callable in-process for tests.
/// `args` excludes the program name.  Returns the process exit status:
/// 0 success, 1 usage/input error, 2 numerical failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qvolterra
