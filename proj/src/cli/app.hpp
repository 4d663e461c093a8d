#pragma once

#include <iosfwd>

namespace iqp::cli {

/// Parses argv and runs one command. Returns the process exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace iqp::cli
