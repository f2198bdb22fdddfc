#include "vgs/io/run_record.hpp"

#include <ctime>

#include <json.hpp>

#include "vgs/io/csv.hpp"

#ifndef VGS_VERSION
#define VGS_VERSION "unknown"
#endif

namespace vgs::io {

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

std::string iso8601(std::chrono::system_clock::time_point tp) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

std::string to_json(const RunRecord& r) {
    nlohmann::json j;
    j["command"] = r.command;
    j["config_hash"] = r.config_hash;
    j["rng_seed"] = r.rng_seed;
    j["start_time"] = iso8601(r.start);
    j["end_time"] = iso8601(r.end);
    j["wall_seconds"] = std::chrono::duration<double>(r.end - r.start).count();
    j["version"] = r.version;
    j["manifest"] = r.manifest;
    j["failed"] = r.failed;
    j["exit_code"] = r.exit_code;
    j["messages"] = r.messages;
    return j.dump(2) + "\n";
}

std::filesystem::path write_run_record(const std::filesystem::path& dir, const RunRecord& record) {
    const auto path = dir / "run_record.json";
    write_file_atomic(path, to_json(record));
    return path;
}

const char* version_string() { return VGS_VERSION; }

}  // namespace vgs::io
