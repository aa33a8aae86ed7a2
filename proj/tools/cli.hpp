#pragma once

#include <iosfwd>

namespace noisecal::cli {

/// Process exit statuses; stable for scripting.
enum ExitStatus : int {
  kSuccess = 0,
  kPartial = 1,  // finished, but some inputs or cells were skipped
  kUsage = 2,
  kIoError = 3,
};

/// Runs the noisecal command line. Regular output goes to `out`,
/// `level:code:message` diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace noisecal::cli
