#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hence::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Runs one subcommand (gen-synth, train, eval, predict, dump-attention).
/// Machine-readable results go to `out`, usage and errors to `err`; logs go
/// to standard error. Returns 0 on success, 1 on usage or validation
/// failures and 2 on runtime failures.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv);

}  // namespace hence::cli
