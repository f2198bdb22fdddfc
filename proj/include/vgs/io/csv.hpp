#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vgs/analysis.hpp"
#include "vgs/grid.hpp"
#include "vgs/integrator.hpp"
#include "vgs/model.hpp"
#include "vgs/steady.hpp"

namespace vgs::io {

/// Malformed or unreadable data file.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parsed CSV file: header names and numeric rows.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    /// Column index by name, or -1.
    int column(const std::string& name) const;
    std::vector<double> column_values(const std::string& name) const;
};

Table read_csv(const std::filesystem::path& path);

/// Numbers are written with 17 significant digits, LF line endings.
std::string format_number(double x);

void write_snapshot(const std::filesystem::path& path, const State& state, const Grid& grid);
void write_trajectory(const std::filesystem::path& path, const std::vector<Record>& records);
void write_profile(const std::filesystem::path& path, const ProfileSteadyState& profile, const Grid& grid);
void write_scan(const std::filesystem::path& path, const ScanCurve& curve);

struct SweepRow {
    double eps;
    double t_persist;
    bool censored;
};
void write_sweep(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

/// Library directory: profile_<id>.csv per entry plus index.csv. Returns written paths.
std::vector<std::filesystem::path> write_library(const std::filesystem::path& dir, const PatternLibrary& lib,
                                                 const Grid& grid);

/// Loads (u, v) from a profile or snapshot CSV. p and y are taken from the file
/// when it has those columns and from the given constants otherwise.
State read_state(const std::filesystem::path& path, const Grid& grid, double p0, double y0);

/// Loads entry `id` of a library directory written by write_library.
State read_library_entry(const std::filesystem::path& dir, int id, const Grid& grid, double p0, double y0);

/// Write to a sibling temp file then rename over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace vgs::io
