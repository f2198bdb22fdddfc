// Command-line front end for the variational Gray-Scott laboratory.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vgs/harness.hpp"
#include "vgs/io/config.hpp"
#include "vgs/io/run_record.hpp"
#include "vgs/parallel.hpp"

namespace {

struct Common {
    std::string config;
    std::string out;
    long long seed = -1;
    std::size_t jobs = vgs::default_jobs();
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "scenario config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, "output directory (overrides output.directory)");
    sub->add_option("--seed", c.seed, "rng seed (overrides library.rng_seed)")->check(CLI::NonNegativeNumber);
    sub->add_option("--jobs", c.jobs, "concurrent workers")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variational Gray-Scott model in 1D: simulation and analysis"};
    app.set_version_flag("--version", std::string(vgs::io::version_string()));
    app.require_subcommand(1);

    Common common;
    std::vector<double> eps;
    std::string base;
    std::vector<std::string> directions;

    auto* simulate = app.add_subcommand("simulate", "run one scenario and write its trajectory");
    add_common(simulate, common);

    auto* sweep = app.add_subcommand("sweep-persistence", "persistence time across eps and its log-log fit");
    add_common(sweep, common);
    sweep->add_option("--eps", eps, "eps values (overrides analysis.sweep_eps)")->delimiter(',');

    auto* landscape = app.add_subcommand("landscape", "energy along perturbation directions of uniform states");
    add_common(landscape, common);
    landscape->add_option("--base", base, "boundary | interior | both")
        ->check(CLI::IsMember({"boundary", "interior", "both"}));
    landscape->add_option("--direction", directions, "s1 | s2 | s3 | mixed (repeatable)")
        ->check(CLI::IsMember({"s1", "s2", "s3", "mixed"}))
        ->delimiter(',');

    auto* limit = app.add_subcommand("limit-check", "variational vs classical model as eps -> 0");
    add_common(limit, common);
    limit->add_option("--eps", eps, "eps values (overrides analysis.limit_eps)")->delimiter(',');

    auto* library = app.add_subcommand("make-library", "regenerate a library of classical steady patterns");
    add_common(library, common);

    auto* steady = app.add_subcommand("steady", "print the uniform steady states for a config");
    add_common(steady, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : vgs::harness::exit_usage;
    }

    vgs::io::ScenarioConfig config;
    try {
        config = vgs::io::parse_config(common.config);
    } catch (const std::exception& e) {
        std::cerr << common.config << ": " << e.what() << '\n';
        return vgs::harness::exit_usage;
    }

    vgs::harness::CommandOptions opt;
    if (!common.out.empty()) opt.out = common.out;
    if (common.seed >= 0) opt.seed = common.seed;
    opt.jobs = common.jobs;
    opt.eps = eps;
    if (!base.empty()) opt.base = base;
    opt.directions = directions;

    using namespace vgs::harness;
    if (simulate->parsed()) return cmd_simulate(config, opt);
    if (sweep->parsed()) return cmd_sweep_persistence(config, opt);
    if (landscape->parsed()) return cmd_landscape(config, opt);
    if (limit->parsed()) return cmd_limit_check(config, opt);
    if (library->parsed()) return cmd_make_library(config, opt);
    if (steady->parsed()) return cmd_steady(config, opt);
    return exit_usage;
}
