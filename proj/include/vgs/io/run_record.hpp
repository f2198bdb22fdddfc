#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace vgs::io {

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

struct RunRecord {
    std::string command;
    std::string config_hash;
    long long rng_seed = 0;
    std::chrono::system_clock::time_point start, end;
    std::string version;
    std::vector<std::string> manifest;  ///< paths relative to the output directory
    bool failed = false;
    int exit_code = 0;
    std::vector<std::string> messages;
};

std::string to_json(const RunRecord& record);

/// Writes <dir>/run_record.json via temp file and rename.
std::filesystem::path write_run_record(const std::filesystem::path& dir, const RunRecord& record);

/// Version string baked in at build time.
const char* version_string();

}  // namespace vgs::io
