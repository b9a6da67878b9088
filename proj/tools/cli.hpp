#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace iit::cli {

/// Parses and executes one command line (without the program name).
/// Returns the process exit code: 0 ok, 1 usage/config, 2 numerical/validation, 3 inversion range.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace iit::cli
