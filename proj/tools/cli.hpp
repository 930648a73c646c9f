#pragma once

namespace sgm {

/// Routes argv to the subcommands (sample, solve, train, eval, oracle,
/// gradcheck, curves). Returns the process exit status: 0 on success, 1 on
/// runtime/I-O errors, 2 on usage errors.
int cli_dispatch(int argc, const char* const* argv);

}  // namespace sgm
