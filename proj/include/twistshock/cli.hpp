// Command-line driver: subcommands kernels, profile, estimate, sweep,
// simulate, characteristics and verify, each writing CSV/JSON artifacts plus
// resolved_config.json into --output-dir.
#pragma once

#include <iosfwd>

namespace twistshock::cli {

enum ExitCode : int {
  kOk = 0,
  kChecksFailed = 1,  // verify ran but at least one criterion is red
  kInvalidConfig = 2,
  kNumericalFailure = 3,
};

/// Parses argv (argv[0] is the program name) and runs one subcommand.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace twistshock::cli
