#pragma once

#include <iosfwd>

namespace ecmtk::cli {

/// Entry point of the `ecmtk` tool. Exit codes: 0 success, 1 numerical or
/// convergence failure, 2 usage, configuration or missing-file error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ecmtk::cli
