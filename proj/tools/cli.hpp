#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pml::cli {

/// Bad flags or flag values; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "a:b" -> inclusive integer range; a bare integer is the range a:a.
std::pair<int, int> parse_int_range(const std::string& text);

/// "v" -> {v}; "a:b:step" -> a, a+step, ... up to b (inclusive within 1e-9 step).
std::vector<double> parse_real_grid(const std::string& text);

/// Runs one subcommand. `args` excludes the program name.
/// Exit codes: 0 success, 1 runtime failure, 2 usage or ordering-bound error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pml::cli
