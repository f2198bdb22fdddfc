#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vgs/analysis.hpp"
#include "vgs/io/config.hpp"
#include "vgs/steady.hpp"

namespace vgs::harness {

/// Process exit statuses shared by every command.
enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_numerical = 2, exit_partial = 3 };

struct CommandOptions {
    std::optional<std::filesystem::path> out;  ///< overrides output.directory
    std::optional<long long> seed;             ///< overrides library.rng_seed
    std::size_t jobs = 1;
    std::vector<double> eps;                   ///< overrides the sweep / limit eps list
    std::optional<std::string> base;           ///< overrides analysis.base
    std::vector<std::string> directions;       ///< overrides analysis.directions
    std::ostream* log = nullptr;               ///< defaults to std::cout
    std::ostream* err = nullptr;               ///< defaults to std::cerr
};

/// Variational initial state described by the ic section.
State build_initial_state(const io::ScenarioConfig& config, const Grid& grid);

// ---------------------------------------------------------------------------
// Persistence sweep
// ---------------------------------------------------------------------------

/// Produces the trajectory of one sweep scenario. The default marches the
/// variational model and stops once the amplitude drops to the threshold.
using SweepRunner = std::function<Trajectory(const io::ScenarioConfig& config, double eps)>;

Trajectory run_persistence(const io::ScenarioConfig& config, double eps);

struct SweepPoint {
    double eps = 0;
    PersistenceResult persistence;
    bool failed = false;
    std::string failure;
    std::vector<Record> records;
};

struct SweepResult {
    std::vector<SweepPoint> points;  ///< ordered by descending eps
    std::optional<ScalingFit> fit;
    std::string fit_error;
};

SweepResult run_sweep(const io::ScenarioConfig& config, std::vector<double> eps_list, std::size_t jobs,
                      const SweepRunner& runner = {});

// ---------------------------------------------------------------------------
// Limit check
// ---------------------------------------------------------------------------

struct LimitPoint {
    double eps = 0;
    double diff_u = 0, diff_v = 0;  ///< sup-norm differences at the final time
    double p_simulated = 0;         ///< p at the probe at the final time
    double p_closed_form = 0;       ///< quadrature of the linear p equation over the recorded v
    double p_rel_error = 0;
    bool failed = false;
    double diff() const { return std::max(diff_u, diff_v); }
};

struct LimitResult {
    std::vector<LimitPoint> points;  ///< ordered by descending eps
    std::vector<double> orders;      ///< observed order between successive eps
    bool strictly_decreasing = false;
    double min_order = 0;
    double max_p_rel_error = 0;
};

LimitResult run_limit_check(const io::ScenarioConfig& config, std::vector<double> eps_list, std::size_t jobs);

/// p(t) = e^{-eps t} (p0 + (k + f) int_0^t v(s) e^{eps s} ds) by the trapezoid rule.
double closed_form_p(const std::vector<double>& times, const std::vector<double>& v, double p0, double eps,
                     double kf);

// ---------------------------------------------------------------------------
// Landscape
// ---------------------------------------------------------------------------

struct LandscapeCurve {
    UniformSteadyState base;
    ScanCurve curve;
    DirectionalDerivatives at_zero;
    std::size_t infeasible = 0;
};

Direction direction_by_name(const std::string& name, const Params& params);

std::vector<LandscapeCurve> run_landscape(const io::ScenarioConfig& config, const std::string& base,
                                          const std::vector<std::string>& directions);

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_simulate(const io::ScenarioConfig& config, const CommandOptions& opt);
int cmd_sweep_persistence(const io::ScenarioConfig& config, const CommandOptions& opt,
                          const SweepRunner& runner = {});
int cmd_landscape(const io::ScenarioConfig& config, const CommandOptions& opt);
int cmd_limit_check(const io::ScenarioConfig& config, const CommandOptions& opt);
int cmd_make_library(const io::ScenarioConfig& config, const CommandOptions& opt);
int cmd_steady(const io::ScenarioConfig& config, const CommandOptions& opt);

}  // namespace vgs::harness
