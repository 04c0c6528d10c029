#pragma once

#include <iosfwd>

namespace sphreg::cli {

/// Entry point shared by the executable and the tests. Returns the process
/// exit code; output goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sphreg::cli
