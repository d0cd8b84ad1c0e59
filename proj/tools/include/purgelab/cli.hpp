#pragma once

#include <iosfwd>

namespace purgelab {

// Exit codes: 0 success, 1 usage, 2 data, 3 internal.
int run_cli(int argc, const char* const* argv);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace purgelab
