#ifndef SPINLET_CLI_HPP
#define SPINLET_CLI_HPP

namespace spinlet::cli {

// Full command dispatcher: parses argv, runs one subcommand, prints a JSON
// summary to stdout.  Returns the process exit code: 0 on success, 2 on bad
// configuration or input, 3 on a numeric-contract violation.
int run(int argc, char** argv);

} // namespace spinlet::cli

#endif
