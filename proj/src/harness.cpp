#include "vgs/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "vgs/io/csv.hpp"
#include "vgs/io/run_record.hpp"
#include "vgs/io/svg.hpp"
#include "vgs/parallel.hpp"

namespace vgs::harness {

namespace fs = std::filesystem;
using io::ScenarioConfig;

State build_initial_state(const ScenarioConfig& c, const Grid& grid) {
    const double p0 = c.ic.p0, y0 = c.y0();
    switch (c.ic.kind) {
        case io::InitialKind::uniform: return State::uniform(grid, c.ic.u0, c.ic.v0, p0, y0);
        case io::InitialKind::bumps: {
            SeedSpec seed;
            seed.centers = c.ic.centers;
            seed.widths = c.ic.widths.size() == 1 ? std::vector<double>(c.ic.centers.size(), c.ic.widths[0])
                                                  : c.ic.widths;
            seed.a = c.ic.a;
            seed.b = c.ic.b;
            auto [u, v] = seed_fields(seed, grid);
            return State(std::move(u), std::move(v), Field::Constant(grid.n_cells(), p0),
                         Field::Constant(grid.n_cells(), y0));
        }
        case io::InitialKind::profile_file: return io::read_state(c.resolve(c.ic.file), grid, p0, y0);
        case io::InitialKind::library_entry:
            return io::read_library_entry(c.resolve(c.ic.library), c.ic.entry, grid, p0, y0);
    }
    throw ContractViolation("build_initial_state: unknown ic.kind");
}

namespace {

std::string fmt(const char* format, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, x);
    return buf;
}

std::vector<double> sorted_descending(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end(), std::greater<>());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

/// Output directory, echoed config and run record for one command invocation.
class Session {
public:
    Session(std::string command, const ScenarioConfig& config, const CommandOptions& opt)
        : log(opt.log ? *opt.log : std::cout), err(opt.err ? *opt.err : std::cerr) {
        dir = opt.out ? *opt.out : fs::path(config.output.directory);
        fs::create_directories(dir);
        const std::string echoed = config.source_text.empty() ? io::serialize(config) : config.source_text;
        io::write_file_atomic(dir / "config.txt", echoed);
        record.command = std::move(command);
        record.config_hash = io::fnv1a_hex(echoed);
        record.rng_seed = opt.seed.value_or(config.library.rng_seed);
        record.version = io::version_string();
        record.start = std::chrono::system_clock::now();
        record.manifest.push_back("config.txt");
    }

    void add(const fs::path& p) { record.manifest.push_back(fs::relative(p, dir).generic_string()); }

    void note(const std::string& msg) {
        record.messages.push_back(msg);
        err << msg << '\n';
    }

    int finish(int code) {
        record.exit_code = code;
        record.failed = code == exit_numerical || code == exit_usage;
        record.end = std::chrono::system_clock::now();
        try {
            io::write_run_record(dir, record);
        } catch (const std::exception& e) {
            err << "error: cannot write run record: " << e.what() << '\n';
            return code == exit_ok ? exit_numerical : code;
        }
        return code;
    }

    fs::path dir;
    std::ostream& log;
    std::ostream& err;
    io::RunRecord record;
};

/// Runs `body` and maps exceptions onto exit codes; the run record is always written.
template <typename Body>
int guarded(Session& s, Body body) {
    int code = exit_ok;
    try {
        code = body();
    } catch (const io::ConfigError& e) {
        s.note(std::string("config error: ") + e.what());
        code = exit_usage;
    } catch (const io::DataError& e) {
        s.note(std::string("data error: ") + e.what());
        code = exit_usage;
    } catch (const ContractViolation& e) {
        s.note(std::string("invalid input: ") + e.what());
        code = exit_usage;
    } catch (const InsufficientData& e) {
        s.note(std::string("insufficient data: ") + e.what());
        code = exit_partial;
    } catch (const std::exception& e) {
        s.note(std::string("numerical failure: ") + e.what());
        code = exit_numerical;
    }
    return s.finish(code);
}

template <typename Fn>
int with_session(const char* command, const ScenarioConfig& config, const CommandOptions& opt, Fn fn) {
    std::ostream& err = opt.err ? *opt.err : std::cerr;
    try {
        io::validate(config);
        Session s(command, config, opt);
        return guarded(s, [&] { return fn(s); });
    } catch (const io::ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
}

io::Series series(std::string label, const std::vector<Record>& recs, double Record::*field) {
    io::Series s;
    s.label = std::move(label);
    for (const auto& r : recs) {
        s.x.push_back(r.t);
        s.y.push_back(r.*field);
    }
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------

Trajectory run_persistence(const ScenarioConfig& config, double eps) {
    const Params params = config.params(eps);
    const Grid grid = config.make_grid();
    StepperConfig scfg = config.stepper();
    scfg.snapshot_times.clear();
    const double horizon = std::max(config.time.horizon, config.analysis.sweep_horizon_scale / eps);
    const double a = config.analysis.a_threshold;
    const auto stop = [a](const Record& r) { return pattern_amplitude(r) <= a; };
    return simulate(build_initial_state(config, grid), params, grid, scfg, horizon, stop);
}

SweepResult run_sweep(const ScenarioConfig& config, std::vector<double> eps_list, std::size_t jobs,
                      const SweepRunner& runner) {
    eps_list = sorted_descending(std::move(eps_list));
    SweepResult res;
    res.points.resize(eps_list.size());
    const SweepRunner run = runner ? runner : SweepRunner(run_persistence);
    parallel_for(eps_list.size(), jobs, [&](std::size_t i) {
        SweepPoint& pt = res.points[i];
        pt.eps = eps_list[i];
        Trajectory traj = run(config, pt.eps);
        pt.failed = traj.failed;
        pt.failure = traj.failure;
        pt.persistence = persistence_time(traj, config.analysis.a_threshold);
        pt.records = std::move(traj.records);
    });
    std::vector<ScalingPoint> pts;
    for (const auto& p : res.points)
        pts.push_back({p.eps, p.persistence.t_persist, p.persistence.censored || p.failed});
    try {
        res.fit = fit_scaling(pts);
    } catch (const InsufficientData& e) {
        res.fit_error = e.what();
    }
    return res;
}

double closed_form_p(const std::vector<double>& t, const std::vector<double>& v, double p0, double eps, double kf) {
    if (t.size() != v.size() || t.empty()) throw ContractViolation("closed_form_p: need matching non-empty series");
    double integral = 0;
    for (std::size_t i = 1; i < t.size(); ++i)
        integral += 0.5 * (t[i] - t[i - 1]) * (v[i] * std::exp(eps * t[i]) + v[i - 1] * std::exp(eps * t[i - 1]));
    return std::exp(-eps * t.back()) * (p0 + kf * integral);
}

LimitResult run_limit_check(const ScenarioConfig& config, std::vector<double> eps_list, std::size_t jobs) {
    eps_list = sorted_descending(std::move(eps_list));
    const Grid grid = config.make_grid();
    StepperConfig scfg = config.stepper();
    scfg.snapshot_times.clear();
    scfg.record_every = scfg.dt;
    const double horizon = config.analysis.limit_horizon;
    const State initial = build_initial_state(config, grid);

    // Index 0 is the classical run, the rest are variational runs per eps.
    std::vector<Trajectory> runs(eps_list.size() + 1);
    parallel_for(runs.size(), jobs, [&](std::size_t i) {
        if (i == 0)
            runs[0] = simulate_classical(initial.u, initial.v, config.params(), grid, scfg, horizon);
        else
            runs[i] = simulate(initial, config.params(eps_list[i - 1]), grid, scfg, horizon);
    });
    if (runs[0].failed) throw DivergenceError("limit check: classical run diverged", horizon);

    LimitResult res;
    const auto& cl = runs[0].final_state;
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        const Trajectory& tr = runs[i + 1];
        LimitPoint pt;
        pt.eps = eps_list[i];
        pt.failed = tr.failed;
        pt.diff_u = (tr.final_state.u - cl.u).cwiseAbs().maxCoeff();
        pt.diff_v = (tr.final_state.v - cl.v).cwiseAbs().maxCoeff();
        std::vector<double> t, v;
        for (const auto& r : tr.records) {
            t.push_back(r.t);
            v.push_back(r.v_probe);
        }
        const double kf = config.model.k + config.model.f;
        pt.p_simulated = tr.records.back().p_probe;
        pt.p_closed_form = closed_form_p(t, v, tr.records.front().p_probe, pt.eps, kf);
        pt.p_rel_error = std::abs(pt.p_simulated - pt.p_closed_form) / std::max(std::abs(pt.p_closed_form), 1e-300);
        res.max_p_rel_error = std::max(res.max_p_rel_error, pt.p_rel_error);
        res.points.push_back(pt);
    }
    res.strictly_decreasing = res.points.size() >= 2;
    res.min_order = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < res.points.size(); ++i) {
        const auto& a = res.points[i];
        const auto& b = res.points[i + 1];
        if (!(b.diff() < a.diff())) res.strictly_decreasing = false;
        const double order = std::log(a.diff() / b.diff()) / std::log(a.eps / b.eps);
        res.orders.push_back(order);
        res.min_order = std::min(res.min_order, order);
    }
    if (res.orders.empty()) res.min_order = std::numeric_limits<double>::quiet_NaN();
    return res;
}

Direction direction_by_name(const std::string& name, const Params& params) {
    if (name == "s1") return Direction::s1();
    if (name == "s2") return Direction::s2(params);
    if (name == "s3") return Direction::s3();
    if (name == "mixed") return Direction::mixed(params);
    throw ContractViolation("unknown direction '" + name + "'");
}

std::vector<LandscapeCurve> run_landscape(const ScenarioConfig& config, const std::string& base,
                                          const std::vector<std::string>& directions) {
    const Params params = config.params();
    const Grid grid = config.make_grid();
    const double C = mass_constant(build_initial_state(config, grid), params, grid);
    const auto [boundary, interior] = uniform_steady_states(params, C, grid.length());
    std::vector<UniformSteadyState> bases;
    if (base == "boundary" || base == "both") bases.push_back(boundary);
    if (base == "interior" || base == "both") bases.push_back(interior);
    if (bases.empty()) throw ContractViolation("landscape: base must be boundary, interior or both");

    std::vector<LandscapeCurve> out;
    for (const auto& b : bases)
        for (const auto& name : directions) {
            const Direction dir = direction_by_name(name, params);
            LandscapeCurve lc;
            lc.base = b;
            lc.curve = landscape_scan(b, dir, config.analysis.delta_min, config.analysis.delta_max,
                                      config.analysis.n_samples, params);
            lc.at_zero = directional_derivatives(b, dir, 0.0, params);
            lc.infeasible = static_cast<std::size_t>(
                std::count(lc.curve.feasible.begin(), lc.curve.feasible.end(), false));
            out.push_back(std::move(lc));
        }
    return out;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const ScenarioConfig& config, const CommandOptions& opt) {
    return with_session("simulate", config, opt, [&](Session& s) {
        const Params params = config.params();
        const Grid grid = config.make_grid();
        const StepperConfig scfg = config.stepper();
        const State initial = build_initial_state(config, grid);
        const Trajectory traj = simulate(initial, params, grid, scfg, config.time.horizon);

        if (config.output.wants("csv")) {
            io::write_trajectory(s.dir / "trajectory.csv", traj.records);
            s.add(s.dir / "trajectory.csv");
            for (const auto& snap : traj.snapshots) {
                const fs::path p = s.dir / ("snapshot_t" + fmt("%g", snap.t) + ".csv");
                io::write_snapshot(p, snap.state, grid);
                s.add(p);
            }
            io::write_snapshot(s.dir / "final.csv", traj.final_state, grid);
            s.add(s.dir / "final.csv");
        }
        if (config.output.wants("svg")) {
            io::PlotSpec spec{"probe values at x = " + fmt("%g", scfg.probe_x), "t", "concentration"};
            io::write_svg(s.dir / "trajectory.svg", spec,
                          {series("u", traj.records, &Record::u_probe), series("v", traj.records, &Record::v_probe)});
            s.add(s.dir / "trajectory.svg");
        }

        const double c0 = traj.records.front().total_mass;
        double drift = 0;
        for (const auto& r : traj.records) drift = std::max(drift, std::abs(r.total_mass - c0) / std::abs(c0));
        const auto pers = persistence_time(traj, config.analysis.a_threshold);
        const Record& last = traj.records.back();
        s.log << "t_end " << last.t << "  amplitude " << pattern_amplitude(last) << "  u(x*) " << last.u_probe
              << "  v(x*) " << last.v_probe << '\n';
        s.log << "persistence (a = " << config.analysis.a_threshold << "): "
              << (pers.censored ? "censored at " : "T = ") << pers.t_persist << '\n';
        s.log << "relative mass drift " << drift << "  floor events " << traj.floor_events << "  energy violations "
              << traj.energy_violations << '\n';
        if (traj.records.size() >= 3) {
            std::vector<double> t, v;
            for (const auto& r : traj.records) {
                t.push_back(r.t);
                v.push_back(r.v_probe);
            }
            const auto osc = detect_oscillations(t, v);
            s.log << "v(x*) peaks " << osc.peaks.size() << (osc.damped ? " (damped)" : "") << '\n';
        }
        if (traj.snapshots.size() >= 2) {
            const auto front = track_front(traj.snapshots, grid);
            s.log << "min(u) front speed " << front.speed << '\n';
        }
        if (traj.floor_events > 0) s.note("warning: " + std::to_string(traj.floor_events) + " floor events");
        if (traj.failed) {
            s.note("simulation failed: " + traj.failure);
            return int(exit_numerical);
        }
        return int(exit_ok);
    });
}

int cmd_sweep_persistence(const ScenarioConfig& config, const CommandOptions& opt, const SweepRunner& runner) {
    return with_session("sweep-persistence", config, opt, [&](Session& s) {
        const std::vector<double> eps = opt.eps.empty() ? config.analysis.sweep_eps : opt.eps;
        if (sorted_descending(eps).size() < 3)
            throw InsufficientData("the scaling fit needs at least 3 distinct eps values, got " +
                                   std::to_string(sorted_descending(eps).size()));
        const SweepResult res = run_sweep(config, eps, opt.jobs, runner);

        std::vector<io::SweepRow> rows;
        std::size_t censored = 0, failed = 0;
        for (const auto& p : res.points) {
            const fs::path sub = s.dir / ("eps_" + fmt("%g", p.eps));
            if (config.output.wants("csv")) {
                io::write_trajectory(sub / "trajectory.csv", p.records);
                s.add(sub / "trajectory.csv");
            }
            rows.push_back({p.eps, p.persistence.t_persist, p.persistence.censored || p.failed});
            censored += p.persistence.censored ? 1 : 0;
            failed += p.failed ? 1 : 0;
            s.log << "eps " << p.eps << "  T " << p.persistence.t_persist
                  << (p.persistence.censored ? " (censored)" : "") << (p.failed ? " (failed: " + p.failure + ")" : "")
                  << '\n';
        }
        io::write_sweep(s.dir / "sweep.csv", rows);
        s.add(s.dir / "sweep.csv");
        if (config.output.wants("svg")) {
            io::Series pts{"log T", {}, {}};
            for (const auto& r : rows) {
                pts.x.push_back(std::log10(r.eps));
                pts.y.push_back(r.censored ? std::nan("") : std::log10(r.t_persist));
            }
            io::write_svg(s.dir / "sweep.svg", {"persistence time", "log10 eps", "log10 T"}, {pts});
            s.add(s.dir / "sweep.svg");
        }

        if (failed == res.points.size()) {
            s.note("all sweep runs failed");
            return int(exit_numerical);
        }
        if (!res.fit) {
            s.note("warning: " + res.fit_error);
            return int(exit_partial);
        }
        s.log << "slope " << res.fit->slope << "  intercept " << res.fit->intercept << "  r2 " << res.fit->r2
              << "  points used " << res.fit->used << '\n';
        if (2 * (censored + failed) > res.points.size()) {
            s.note("warning: most sweep runs were censored or failed; results are partial");
            return int(exit_partial);
        }
        if (censored + failed > 0) s.note("warning: censored or failed runs were excluded from the fit");
        return int(exit_ok);
    });
}

int cmd_landscape(const ScenarioConfig& config, const CommandOptions& opt) {
    return with_session("landscape", config, opt, [&](Session& s) {
        const std::string base = opt.base.value_or(config.analysis.base);
        const auto dirs = opt.directions.empty() ? config.analysis.directions : opt.directions;
        const auto curves = run_landscape(config, base, dirs);
        for (const auto& lc : curves) {
            const std::string stem = std::string("scan_") + to_string(lc.base.kind) + "_" + lc.curve.direction;
            if (config.output.wants("csv")) {
                io::write_scan(s.dir / (stem + ".csv"), lc.curve);
                s.add(s.dir / (stem + ".csv"));
            }
            if (config.output.wants("svg")) {
                io::Series e{"E", lc.curve.deltas, lc.curve.energies};
                io::write_svg(s.dir / (stem + ".svg"),
                              {std::string("energy landscape, ") + to_string(lc.base.kind) + " state, " +
                                   lc.curve.direction,
                               "delta", "E"},
                              {e});
                s.add(s.dir / (stem + ".svg"));
            }
            s.log << to_string(lc.base.kind) << ' ' << lc.curve.direction << ": dE(0) " << lc.at_zero.dE
                  << "  d2E(0) " << lc.at_zero.d2E;
            if (lc.infeasible > 0) s.log << "  [" << lc.infeasible << " infeasible samples flagged]";
            s.log << '\n';
        }
        return int(exit_ok);
    });
}

int cmd_limit_check(const ScenarioConfig& config, const CommandOptions& opt) {
    return with_session("limit-check", config, opt, [&](Session& s) {
        const std::vector<double> eps = opt.eps.empty() ? config.analysis.limit_eps : opt.eps;
        const LimitResult res = run_limit_check(config, eps, opt.jobs);
        std::ostringstream csv;
        csv << "eps,diff_u,diff_v,p_simulated,p_closed_form,p_rel_error\n";
        for (const auto& p : res.points) {
            csv << io::format_number(p.eps) << ',' << io::format_number(p.diff_u) << ','
                << io::format_number(p.diff_v) << ',' << io::format_number(p.p_simulated) << ','
                << io::format_number(p.p_closed_form) << ',' << io::format_number(p.p_rel_error) << '\n';
            s.log << "eps " << p.eps << "  |du| " << p.diff_u << "  |dv| " << p.diff_v << "  p rel err "
                  << p.p_rel_error << '\n';
        }
        io::write_file_atomic(s.dir / "limit.csv", csv.str());
        s.add(s.dir / "limit.csv");
        for (std::size_t i = 0; i < res.orders.size(); ++i) s.log << "order " << res.orders[i] << '\n';
        s.log << (res.strictly_decreasing ? "differences strictly decreasing" : "differences NOT strictly decreasing")
              << '\n';
        for (const auto& p : res.points)
            if (p.failed) {
                s.note("variational run diverged at eps " + fmt("%g", p.eps));
                return int(exit_numerical);
            }
        return int(exit_ok);
    });
}

int cmd_make_library(const ScenarioConfig& config, const CommandOptions& opt) {
    return with_session("make-library", config, opt, [&](Session& s) {
        const Params params = config.params();
        const Grid grid = config.make_grid();
        LibraryOptions lo = config.library_options(opt.jobs);
        if (opt.seed) lo.rng_seed = static_cast<std::uint64_t>(*opt.seed);
        StepperConfig scfg = config.stepper();
        scfg.snapshot_times.clear();
        const PatternLibrary lib = generate_pattern_library(params, grid, scfg, lo);

        for (const auto& p : io::write_library(s.dir / "library", lib, grid)) s.add(p);
        if (config.output.wants("svg") && !lib.profiles.empty()) {
            std::vector<io::Series> ss;
            for (std::size_t i = 0; i < lib.profiles.size(); ++i) {
                io::Series v{"v #" + std::to_string(i), {}, {}};
                for (Eigen::Index j = 0; j < grid.n_cells(); ++j) {
                    v.x.push_back(grid.center(j));
                    v.y.push_back(lib.profiles[i].v[j]);
                }
                ss.push_back(std::move(v));
            }
            io::write_svg(s.dir / "library.svg", {"pattern library", "x", "v"}, ss);
            s.add(s.dir / "library.svg");
        }
        s.log << "seeds " << lo.seed_count << "  stabilized " << lib.seeds_stabilized << "  polished "
              << lib.seeds_polished << "  distinct " << lib.profiles.size() << '\n';
        for (std::size_t i = 0; i < lib.profiles.size(); ++i) {
            const auto& p = lib.profiles[i];
            s.log << "  #" << i << "  pulses " << p.pulse_count << "  " << to_string(p.stability) << "  residual "
                  << p.residual_norm << "  max v " << p.v.maxCoeff() << "  (" << p.provenance << ")\n";
        }
        for (const auto& w : lib.warnings) s.note("warning: " + w);
        return int(lib.profiles.empty() ? exit_partial : exit_ok);
    });
}

int cmd_steady(const ScenarioConfig& config, const CommandOptions& opt) {
    return with_session("steady", config, opt, [&](Session& s) {
        const Params params = config.params();
        const Grid grid = config.make_grid();
        const double C = mass_constant(build_initial_state(config, grid), params, grid);
        const auto [b, i] = uniform_steady_states(params, C, grid.length());
        std::ostringstream out;
        out.precision(10);
        out << "C = " << C << "\nlambda = " << i.lambda << '\n';
        for (const auto* st : {&b, &i})
            out << to_string(st->kind) << ": u = " << st->u << "  v = " << st->v << "  p = " << st->p
                << "  y = " << st->y << "  (residual " << uniform_residual(*st, params).max() << ")\n";
        s.log << out.str();
        io::write_file_atomic(s.dir / "steady.txt", out.str());
        s.add(s.dir / "steady.txt");
        return int(exit_ok);
    });
}

}  // namespace vgs::harness
