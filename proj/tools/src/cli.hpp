#pragma once

#include "hyperwalk/groups.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hyperwalk::cli {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

struct RunConfig {
    json document;  // the config as given
    GroupSpec group;
    json measure = "uniform";
    std::string command;
    json params = json::object();
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::string output = "out";
};

// Throws InvalidInput on schema violations.
GroupSpec parse_group(const json& j);
RunConfig parse_config(const json& doc);

// Schema, admissibility and transience checks without computation.
std::vector<std::string> validate(const RunConfig& config);
std::vector<std::string> validate(const json& doc);

// FNV-1a over the canonical dump, ignoring threads and output.
std::string config_hash(const RunConfig& config);

struct RunResult {
    int exit_code = 0;
    json report;
    std::vector<std::filesystem::path> files;
};

// Writes report.json (plus tables) into out_dir. Exit codes: 0 ok, 2 invalid
// input, 3 budget or incomplete ball, 1 other failures.
RunResult run(const RunConfig& config, const std::filesystem::path& out_dir);

// Report without its timestamp, for byte comparisons.
json strip_timestamp(json report);

} // namespace hyperwalk::cli
