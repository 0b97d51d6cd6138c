#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

namespace riskcal::cli {

inline constexpr const char* kToolVersion = "1.0.0";

// Exit codes are part of the tool's interface.
enum ExitCode : int { kOk = 0, kIoError = 1, kValidation = 2, kAbstained = 3 };

// Expands `--config FILE` (a JSON object of flag names to values, or a run
// manifest carrying one under "config") into ordinary flags. Flags given on
// the command line win over the file.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

// Effective value of every long option of `app`, keyed by flag name.
nlohmann::json options_echo(const CLI::App& app);

std::string sha256_file(const std::filesystem::path& path);

struct Manifest {
    std::string command;
    nlohmann::json config;
    std::vector<std::filesystem::path> inputs;
    std::vector<std::filesystem::path> outputs;
    std::map<std::string, std::uint64_t> seeds;
};

// Writes <first output>.manifest.json next to the outputs.
void write_manifest(const Manifest& manifest);

}  // namespace riskcal::cli
