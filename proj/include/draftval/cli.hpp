#pragma once

#include <iosfwd>

namespace draftval {

/// Runs one `draftval` invocation. Returns the process exit code:
/// 0 ok, 2 usage, 3 ingestion or empty corpus, 4 numerical, 5 I/O.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace draftval
