#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "vgs/errors.hpp"
#include "vgs/grid.hpp"
#include "vgs/model.hpp"

namespace vgs {

struct StepperConfig {
    double dt = 0.05;
    double theta = 0.5;   ///< 0 explicit, 0.5 Crank-Nicolson, 1 backward Euler
    double floor = 1e-14;
    double record_every = 1.0;
    std::vector<double> snapshot_times;
    double probe_x = 0.5;
    double energy_rel_tol = 1e-8;

    void validate() const {
        if (!(dt > 0)) throw ContractViolation("stepper: dt must be > 0");
        if (!(theta >= 0 && theta <= 1)) throw ContractViolation("stepper: theta must lie in [0, 1]");
        if (!(floor >= 0)) throw ContractViolation("stepper: floor must be >= 0");
        if (!(record_every >= dt * (1 - 1e-12))) throw ContractViolation("stepper: record_every must be >= dt");
    }
};

/// One field's theta-scheme diffusion update (I - theta dt D L) f' = (I + (1-theta) dt D L) f
/// with the Thomas factorization computed once.
template <typename Scalar = double>
class ThetaDiffusion {
public:
    ThetaDiffusion(Scalar coeff, Scalar dt, Scalar theta, const GridT<Scalar>& grid)
        : n_(grid.n_cells()), r_(coeff * dt / (grid.dx() * grid.dx())), theta_(theta),
          c_prime_(n_), inv_denom_(n_) {
        const Scalar off = -theta_ * r_;
        for (Eigen::Index i = 0; i < n_; ++i) {
            const bool edge = (i == 0 || i == n_ - 1);
            const Scalar diag = Scalar(1) + theta_ * r_ * (edge ? Scalar(1) : Scalar(2));
            const Scalar denom = i == 0 ? diag : diag - off * c_prime_[i - 1];
            // Strict diagonal dominance keeps denom >= 1 for theta, r >= 0.
            if (!(denom > Scalar(0.5))) throw InternalError("ThetaDiffusion: tridiagonal pivot breakdown");
            inv_denom_[i] = Scalar(1) / denom;
            c_prime_[i] = off * inv_denom_[i];
        }
    }

    void apply(FieldT<Scalar>& f) const {
        const Eigen::Index n = n_;
        const Scalar ex = (Scalar(1) - theta_) * r_;
        const Scalar off = -theta_ * r_;
        // Right-hand side, forward sweep and back substitution fused over one scratch buffer.
        Scalar prev_d{};
        Scalar left = f[0];
        for (Eigen::Index i = 0; i < n; ++i) {
            const Scalar fi = f[i];
            const Scalar right = i + 1 < n ? f[i + 1] : fi;
            const Scalar lap = left - Scalar(2) * fi + right;
            const Scalar rhs = fi + ex * lap;
            const Scalar d = (i == 0 ? rhs : rhs - off * prev_d) * inv_denom_[i];
            left = fi;
            f[i] = d;
            prev_d = d;
        }
        for (Eigen::Index i = n - 2; i >= 0; --i) f[i] -= c_prime_[i] * f[i + 1];
    }

private:
    Eigen::Index n_;
    Scalar r_;
    Scalar theta_;
    FieldT<Scalar> c_prime_;
    FieldT<Scalar> inv_denom_;
};

namespace detail {

template <typename Scalar>
std::size_t apply_floor(FieldT<Scalar>& f, Scalar floor) {
    std::size_t negatives = 0;
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        if (f[i] < floor) {
            if (f[i] < Scalar(0)) ++negatives;
            f[i] = floor;
        }
    }
    return negatives;
}

template <typename Scalar>
bool all_finite(const FieldT<Scalar>& f) {
    return f.allFinite();
}

}  // namespace detail

/// Lie-split IMEX stepper for the four-species variational system: explicit
/// mass-action reactions, then theta-scheme diffusion of u and v.
template <typename Scalar = double>
class VariationalStepper {
public:
    VariationalStepper(const ParamsT<Scalar>& params, const GridT<Scalar>& grid, const StepperConfig& cfg)
        : params_(params), grid_(grid), cfg_(cfg),
          diff_u_(params.du, Scalar(cfg.dt), Scalar(cfg.theta), grid),
          diff_v_(params.dv, Scalar(cfg.dt), Scalar(cfg.theta), grid) {
        params_.require_variational();
        cfg_.validate();
    }

    void advance(StateT<Scalar>& s, double t_now) {
        const Scalar dt = Scalar(cfg_.dt);
        const Scalar eps = params_.eps;
        const Scalar kf = params_.kf();
        const Scalar f = params_.f;
        const Eigen::Index n = s.size();
        for (Eigen::Index i = 0; i < n; ++i) {
            const Scalar u = s.u[i], v = s.v[i], p = s.p[i], y = s.y[i];
            const Scalar v2 = v * v;
            const Scalar r1 = u * v2 - eps * v2 * v;
            const Scalar r2 = kf * v - eps * p;
            const Scalar r3 = f * u - y;
            s.u[i] = u + dt * (-r1 - r3);
            s.v[i] = v + dt * (r1 - r2);
            s.p[i] = p + dt * r2;
            s.y[i] = y + dt * eps * r3;
        }
        diff_u_.apply(s.u);
        diff_v_.apply(s.v);
        const Scalar fl = Scalar(cfg_.floor);
        floor_events_ += detail::apply_floor(s.u, fl) + detail::apply_floor(s.v, fl) +
                         detail::apply_floor(s.p, fl) + detail::apply_floor(s.y, fl);
        if (!(detail::all_finite(s.u) && detail::all_finite(s.v) && detail::all_finite(s.p) &&
              detail::all_finite(s.y)))
            throw DivergenceError("variational step produced a non-finite value", t_now + cfg_.dt);
    }

    std::size_t floor_events() const noexcept { return floor_events_; }
    const StepperConfig& config() const noexcept { return cfg_; }

private:
    ParamsT<Scalar> params_;
    GridT<Scalar> grid_;
    StepperConfig cfg_;
    ThetaDiffusion<Scalar> diff_u_, diff_v_;
    std::size_t floor_events_ = 0;
};

/// Same splitting for the two-species classical system.
template <typename Scalar = double>
class ClassicalStepper {
public:
    ClassicalStepper(const ParamsT<Scalar>& params, const GridT<Scalar>& grid, const StepperConfig& cfg)
        : params_(params), cfg_(cfg),
          diff_u_(params.du, Scalar(cfg.dt), Scalar(cfg.theta), grid),
          diff_v_(params.dv, Scalar(cfg.dt), Scalar(cfg.theta), grid) {
        params_.validate();
        cfg_.validate();
    }

    void advance(FieldT<Scalar>& u, FieldT<Scalar>& v, double t_now) {
        const Scalar dt = Scalar(cfg_.dt);
        const Scalar kf = params_.kf();
        const Scalar f = params_.f;
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            const Scalar uv2 = u[i] * v[i] * v[i];
            const Scalar un = u[i] + dt * (-uv2 + f * (Scalar(1) - u[i]));
            v[i] = v[i] + dt * (uv2 - kf * v[i]);
            u[i] = un;
        }
        diff_u_.apply(u);
        diff_v_.apply(v);
        const Scalar fl = Scalar(cfg_.floor);
        floor_events_ += detail::apply_floor(u, fl) + detail::apply_floor(v, fl);
        if (!(detail::all_finite(u) && detail::all_finite(v)))
            throw DivergenceError("classical step produced a non-finite value", t_now + cfg_.dt);
    }

    std::size_t floor_events() const noexcept { return floor_events_; }

private:
    ParamsT<Scalar> params_;
    StepperConfig cfg_;
    ThetaDiffusion<Scalar> diff_u_, diff_v_;
    std::size_t floor_events_ = 0;
};

template <typename Scalar>
StateT<Scalar> step_variational(StateT<Scalar> state, const ParamsT<Scalar>& params,
                                const GridT<Scalar>& grid, const StepperConfig& cfg) {
    state.check(grid, "step_variational");
    VariationalStepper<Scalar> stepper(params, grid, cfg);
    stepper.advance(state, 0.0);
    return state;
}

template <typename Scalar>
std::pair<FieldT<Scalar>, FieldT<Scalar>> step_classical(FieldT<Scalar> u, FieldT<Scalar> v,
                                                         const ParamsT<Scalar>& params,
                                                         const GridT<Scalar>& grid, const StepperConfig& cfg) {
    check_shape(u, grid, "step_classical");
    check_shape(v, grid, "step_classical");
    ClassicalStepper<Scalar> stepper(params, grid, cfg);
    stepper.advance(u, v, 0.0);
    return {std::move(u), std::move(v)};
}

/// One probe record. For classical runs p, y, mass_p, mass_x are zero,
/// total_mass is the integral of u + v and free_energy is zero (undefined).
struct Record {
    double t = 0;
    double amp_u = 0, amp_v = 0;
    double u_probe = 0, v_probe = 0, p_probe = 0, y_probe = 0;
    double mass_u = 0, mass_v = 0, mass_p = 0, mass_x = 0;
    double total_mass = 0;
    double free_energy = 0;
};

template <typename Scalar = double>
struct SnapshotT {
    double t;
    StateT<Scalar> state;
};

template <typename Scalar = double>
struct TrajectoryT {
    std::vector<Record> records;
    std::vector<SnapshotT<Scalar>> snapshots;
    StateT<Scalar> final_state;
    std::size_t floor_events = 0;
    std::size_t energy_violations = 0;
    double max_energy_increase_rel = 0;  ///< largest (F_{n+1} - F_n) / |F_n| seen between records
    bool failed = false;
    bool stopped_early = false;
    std::string failure;
};

using Trajectory = TrajectoryT<double>;
using Snapshot = SnapshotT<double>;

/// Optional early-exit predicate evaluated on each new record.
using StopPredicate = std::function<bool(const Record&)>;

namespace detail {

inline std::size_t steps_for(double span, double dt) {
    return static_cast<std::size_t>(std::llround(span / dt));
}

template <typename Scalar>
double field_range(const FieldT<Scalar>& f) {
    return double(f.maxCoeff() - f.minCoeff());
}

template <typename Scalar, typename Stepper, typename Observe, typename Advance>
TrajectoryT<Scalar> run_loop(StateT<Scalar> state, const StepperConfig& cfg, double horizon,
                             Stepper& stepper, Observe observe, Advance advance, const StopPredicate& stop,
                             bool monitor_energy) {
    if (!(horizon > 0)) throw ContractViolation("simulate: horizon must be > 0");
    TrajectoryT<Scalar> traj;
    const std::size_t n_steps = steps_for(horizon, cfg.dt);
    const std::size_t stride = std::max<std::size_t>(1, steps_for(cfg.record_every, cfg.dt));

    std::vector<std::size_t> snap_steps;
    for (double ts : cfg.snapshot_times)
        if (ts >= 0 && ts <= horizon + 0.5 * cfg.dt) snap_steps.push_back(steps_for(ts, cfg.dt));
    std::sort(snap_steps.begin(), snap_steps.end());
    snap_steps.erase(std::unique(snap_steps.begin(), snap_steps.end()), snap_steps.end());
    std::size_t next_snap = 0;

    auto take = [&](std::size_t step) {
        const double t = double(step) * cfg.dt;
        Record rec = observe(state, t);
        if (monitor_energy && !traj.records.empty()) {
            const double prev = traj.records.back().free_energy;
            const double rel = (rec.free_energy - prev) / std::max(std::abs(prev), 1e-300);
            traj.max_energy_increase_rel = std::max(traj.max_energy_increase_rel, rel);
            if (rel > cfg.energy_rel_tol) ++traj.energy_violations;
        }
        traj.records.push_back(rec);
        return stop && stop(rec);
    };
    auto maybe_snapshot = [&](std::size_t step) {
        while (next_snap < snap_steps.size() && snap_steps[next_snap] == step) {
            traj.snapshots.push_back({double(step) * cfg.dt, state});
            ++next_snap;
        }
    };

    maybe_snapshot(0);
    bool halt = take(0);
    for (std::size_t step = 1; step <= n_steps && !halt; ++step) {
        try {
            advance(state, double(step - 1) * cfg.dt);
        } catch (const DivergenceError& e) {
            traj.failed = true;
            traj.failure = e.what();
            break;
        }
        maybe_snapshot(step);
        if (step % stride == 0 || step == n_steps) {
            halt = take(step);
            if (halt && step < n_steps) traj.stopped_early = true;
        }
    }
    traj.floor_events = stepper.floor_events();
    traj.final_state = std::move(state);
    return traj;
}

}  // namespace detail

/// Record of the variational state at time t.
template <typename Scalar>
Record observe_variational(const StateT<Scalar>& s, const ParamsT<Scalar>& params, const GridT<Scalar>& grid,
                           double probe_x, double t) {
    Record r;
    r.t = t;
    r.amp_u = detail::field_range(s.u);
    r.amp_v = detail::field_range(s.v);
    const Scalar px = Scalar(probe_x);
    r.u_probe = double(sample_at(s.u, grid, px));
    r.v_probe = double(sample_at(s.v, grid, px));
    r.p_probe = double(sample_at(s.p, grid, px));
    r.y_probe = double(sample_at(s.y, grid, px));
    r.mass_u = double(integrate(s.u, grid));
    r.mass_v = double(integrate(s.v, grid));
    r.mass_p = double(integrate(s.p, grid));
    r.mass_x = double(integrate(s.y, grid) / params.eps);
    r.total_mass = r.mass_u + r.mass_v + r.mass_p + r.mass_x;
    r.free_energy = double(free_energy(s, params, grid));
    return r;
}

/// March the variational system to `horizon`, recording every cfg.record_every.
/// Divergence does not throw: the trajectory up to the failure is returned with failed = true.
template <typename Scalar>
TrajectoryT<Scalar> simulate(const StateT<Scalar>& initial, const ParamsT<Scalar>& params,
                             const GridT<Scalar>& grid, const StepperConfig& cfg, double horizon,
                             const StopPredicate& stop = {}) {
    initial.check(grid, "simulate");
    VariationalStepper<Scalar> stepper(params, grid, cfg);
    auto observe = [&](const StateT<Scalar>& s, double t) {
        return observe_variational(s, params, grid, cfg.probe_x, t);
    };
    auto advance = [&](StateT<Scalar>& s, double t) { stepper.advance(s, t); };
    return detail::run_loop(initial, cfg, horizon, stepper, observe, advance, stop, true);
}

/// Classical counterpart; p and y of the carried State stay zero.
template <typename Scalar>
TrajectoryT<Scalar> simulate_classical(const FieldT<Scalar>& u0, const FieldT<Scalar>& v0,
                                       const ParamsT<Scalar>& params, const GridT<Scalar>& grid,
                                       const StepperConfig& cfg, double horizon, const StopPredicate& stop = {}) {
    check_shape(u0, grid, "simulate_classical");
    check_shape(v0, grid, "simulate_classical");
    ClassicalStepper<Scalar> stepper(params, grid, cfg);
    const auto zero = FieldT<Scalar>::Zero(grid.n_cells());
    StateT<Scalar> s(u0, v0, zero, zero);
    auto observe = [&](const StateT<Scalar>& st, double t) {
        Record r;
        r.t = t;
        r.amp_u = detail::field_range(st.u);
        r.amp_v = detail::field_range(st.v);
        r.u_probe = double(sample_at(st.u, grid, Scalar(cfg.probe_x)));
        r.v_probe = double(sample_at(st.v, grid, Scalar(cfg.probe_x)));
        r.mass_u = double(integrate(st.u, grid));
        r.mass_v = double(integrate(st.v, grid));
        r.total_mass = r.mass_u + r.mass_v;
        return r;
    };
    auto advance = [&](StateT<Scalar>& st, double t) { stepper.advance(st.u, st.v, t); };
    return detail::run_loop(std::move(s), cfg, horizon, stepper, observe, advance, stop, false);
}

}  // namespace vgs
