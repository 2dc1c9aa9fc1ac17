#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fmlab::cli {

/// Parsed command-line configuration shared by every subcommand.
struct RunConfig {
    std::string command;
    std::string input_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    /// Report acceptance threshold override; each command documents its
    /// default (module constants).
    std::optional<double> tol;
    /// Evaluation / snapshot times; empty means the command default.
    std::vector<double> times;
    int particles = 10000;
    int steps = 100;
};

/// Exit codes: 0 success, 2 validation failure, 3 Gaussian-inverse failure,
/// 4 ill-posed 1D inverse, 5 internal numerical failure.
int run_main(int argc, const char* const* argv);

/// Same as run_main, args without the program name.
int run(const std::vector<std::string>& args);

}  // namespace fmlab::cli
