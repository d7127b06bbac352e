#pragma once

#include <iosfwd>

namespace ddmr {

/// Entry point of the `ddmr` tool. Returns 0 on success, 1 on runtime
/// failure and 2 on invalid configuration or arguments.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace ddmr
