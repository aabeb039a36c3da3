// suites.hpp — batch experiment runner: configuration schema, suite execution,
// deterministic result records, and report merging

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cqms/serialize.hpp"

namespace cqms::suites {

inline constexpr const char* library_version = "0.1.0";

// exit-code contract: 0 success, 1 configuration error, 2 validation failure,
// 3 numerical failure
enum ExitCode : int {
    exit_ok = 0,
    exit_config = 1,
    exit_validation = 2,
    exit_numerical = 3,
};

struct RunResult {
    int exit_code = exit_ok;
    io::json record; // written to result.json
    std::vector<std::filesystem::path> outputs;
};

// FNV-1a over the canonical (sorted-key, compact) dump.
std::uint64_t config_hash(const io::json& config);

// Executes one suite; writes result.json plus any CSV tables into out_dir.
// Configuration errors throw input_error before any output is written.
RunResult run(const io::json& config, const std::filesystem::path& out_dir);

// Merges result records into a human-readable summary and a plots-data CSV;
// certified (exact/upper/lower) and heuristic values land in separate columns.
io::json report(const std::vector<io::json>& records, const std::filesystem::path& out_dir);

} // namespace cqms::suites
