#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace floq::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kInvalidProblem = 2,
  kSpectrumQuery = 3,
};

/// Runs the floq command line with argv[0] as program name. Results go to
/// `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload for tests: args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// printf("%.17g") of a double.
std::string format_double(double v);

}  // namespace floq::cli
