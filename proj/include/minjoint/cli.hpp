#pragma once

#include <ostream>

namespace minjoint {

/// Command-line entry point. Exit codes: 0 decision reached, 1 usage or
/// input error, 2 numerical or cap failure, 3 consistency error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace minjoint
