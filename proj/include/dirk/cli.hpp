#pragma once

// Batch command-line front end: guessing-probability curves, single-point
// bounds, sum-of-squares certificate checks, attaining strategies,
// no-signalling bounds, the secret-sharing attack demo, and the n-party
// conjecture tables, emitted as CSV or JSON.

namespace dirk {

// argv-style entry point used by the `dirk` binary and the CLI tests.
// Returns the process exit code: 0 success, 1 verification failure,
// 2 configuration error, 3 solver failure.
int run_cli(int argc, const char* const* argv);

}  // namespace dirk
