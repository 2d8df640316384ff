#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace rbrw::cli {

// Exit codes of the config runner.
enum ExitCode : int {
    kOk = 0,
    kRuntimeError = 1,
    kParseError = 2,
    kValidationError = 3,
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<std::string> output_dir;
    std::optional<std::string> command;  // subcommand given on the CLI, checked against the config
};

// Loads a JSON experiment config, validates it, runs the requested command
// and writes its CSV/JSONL outputs plus a manifest into the output
// directory. Error text goes to stderr.
int run_config(const std::string& path, const Overrides& overrides = {});

}  // namespace rbrw::cli
