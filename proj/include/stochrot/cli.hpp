#pragma once

// Command-line front end.
//
//   stochrot check|simulate|ensemble|convergence
//            [--config FILE] [--preset NAME] [--seed N] [--paths N]
//            [--out DIR] [--decimate K] [--threads N] [--backend B]
//
// Each flag can also come from the environment as STOCHROT_<FLAG>
// (STOCHROT_CONFIG, STOCHROT_PRESET, STOCHROT_SEED, ...); flags win.
//
// Exit status: 0 success, 1 inadmissible deformation law, 2 configuration
// or I/O error, 3 integration aborted.

#include <iosfwd>
#include <string>
#include <vector>

namespace stochrot::cli {

enum ExitCode : int { kOk = 0, kInadmissible = 1, kConfigError = 2, kAborted = 3 };

int run(int argc, char** argv);
/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stochrot::cli
