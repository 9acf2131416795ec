#pragma once

namespace dlma::harness {

// Entry point behind the `dlma` binary: run / sweep / oracle / plot
// subcommands. Returns a process exit code; errors go to stderr.
int cli_main(int argc, const char* const* argv);

}  // namespace dlma::harness
