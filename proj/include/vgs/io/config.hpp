#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vgs/integrator.hpp"
#include "vgs/model.hpp"
#include "vgs/steady.hpp"

namespace vgs::io {

/// Bad configuration input; `line` is 0 when the problem is not tied to one line.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

enum class InitialKind { uniform, bumps, profile_file, library_entry };

const char* to_string(InitialKind k);

struct ModelSection {
    double eps = 1e-2;
    double f = 0.04;
    double k = 0.065;
    double du = 5e-4;
    double dv = 2.5e-4;
    bool operator==(const ModelSection&) const = default;
};

struct GridSection {
    int n_cells = 201;
    double length = 1.0;
    bool operator==(const GridSection&) const = default;
};

struct TimeSection {
    double dt = 0.05;
    double theta = 0.5;
    double horizon = 1000;
    double record_every = 1.0;
    double floor = 1e-14;
    std::vector<double> snapshot_times;
    bool operator==(const TimeSection&) const = default;
};

struct InitialSection {
    InitialKind kind = InitialKind::uniform;
    double u0 = 1.0;
    double v0 = 0.0;
    double p0 = 1.0;
    std::optional<double> y0;  ///< defaults to model.f
    std::vector<double> centers{0.5};
    std::vector<double> widths{0.01};
    double a = 0.5;
    double b = 0.25;
    std::string file;     ///< profile-file
    std::string library;  ///< library-entry directory
    int entry = 0;        ///< library-entry id
    bool operator==(const InitialSection&) const = default;
};

struct AnalysisSection {
    double a_threshold = 0.05;
    double probe_x = 0.5;
    std::vector<double> sweep_eps{3e-3, 1e-3, 3e-4, 1e-4};
    double sweep_horizon_scale = 30;  ///< sweep horizon = max(time.horizon, scale / eps)
    std::vector<double> limit_eps{1e-2, 1e-3, 1e-4};
    double limit_horizon = 10;
    std::string base = "both";  ///< landscape base: boundary | interior | both
    std::vector<std::string> directions{"s1", "s2", "s3"};
    double delta_min = -1.0;
    double delta_max = 1.0;
    int n_samples = 201;
    bool operator==(const AnalysisSection&) const = default;
};

struct LibrarySection {
    int seed_count = 64;
    long long rng_seed = 1;
    double march_time = 2000;
    int max_bumps = 2;
    int probe_trials = 4;
    double probe_horizon = 500;
    double probe_amplitude = 1e-3;
    double newton_tol = 1e-10;
    bool operator==(const LibrarySection&) const = default;
};

struct OutputSection {
    std::string directory = "out";
    std::vector<std::string> formats{"csv", "svg"};
    bool operator==(const OutputSection&) const = default;

    bool wants(const std::string& fmt) const;
};

struct ScenarioConfig {
    ModelSection model;
    GridSection grid;
    TimeSection time;
    InitialSection ic;
    AnalysisSection analysis;
    LibrarySection library;
    OutputSection output;

    /// Verbatim text the config was parsed from (not part of equality).
    std::string source_text;
    /// Directory relative file paths are resolved against (not part of equality).
    std::filesystem::path base_dir;

    bool operator==(const ScenarioConfig& o) const {
        return model == o.model && grid == o.grid && time == o.time && ic == o.ic && analysis == o.analysis &&
               library == o.library && output == o.output;
    }

    Params params() const;
    Params params(double eps) const;
    Grid make_grid() const;
    StepperConfig stepper() const;
    LibraryOptions library_options(std::size_t jobs) const;
    double y0() const { return ic.y0.value_or(model.f); }
    std::filesystem::path resolve(const std::string& path) const;
};

/// Parse `section.key = value` lines. `#` starts a comment. model.eps is required.
ScenarioConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = {},
                                 bool check_files = true);
ScenarioConfig parse_config(const std::filesystem::path& path);

/// Canonical text form; parse_config_text(serialize(c)) == c.
std::string serialize(const ScenarioConfig& config);

/// Range checks shared by the parser and programmatic callers.
void validate(const ScenarioConfig& config, bool check_files = true);

}  // namespace vgs::io
