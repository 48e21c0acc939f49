#pragma once

#include <iosfwd>

namespace alvq {

/// Entry point of the `alvq` tool. Returns the process exit status:
/// 0 ok, 2 usage, 3 data, 4 numeric.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace alvq
