#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "vgs/errors.hpp"
#include "vgs/grid.hpp"
#include "vgs/integrator.hpp"
#include "vgs/model.hpp"
#include "vgs/parallel.hpp"

namespace vgs {

// ---------------------------------------------------------------------------
// Uniform steady states of the variational model
// ---------------------------------------------------------------------------

enum class UniformKind { boundary, interior };

inline const char* to_string(UniformKind k) { return k == UniformKind::boundary ? "boundary" : "interior"; }

template <typename Scalar = double>
struct UniformSteadyStateT {
    UniformKind kind = UniformKind::boundary;
    Scalar u{}, v{}, p{}, y{};
    Scalar lambda{};          ///< eps + 1 + (k + f) / eps + f
    Scalar mass_constant{};   ///< C, total mass over the domain
    Scalar domain_measure{};  ///< |Omega|

    Scalar ytilde(const ParamsT<Scalar>& params) const { return y / params.eps; }

    StateT<Scalar> as_state(const GridT<Scalar>& grid) const { return StateT<Scalar>::uniform(grid, u, v, p, y); }
};

using UniformSteadyState = UniformSteadyStateT<double>;

/// Residuals of the three equilibrium relations and the mass constraint. The
/// constraint is reported relative to C / |Omega| since it sums O(1/eps) terms.
template <typename Scalar>
struct UniformResidualT {
    Scalar feed, autocatalysis, decay, constraint;
    Scalar max() const {
        using std::abs;
        return std::max({abs(feed), abs(autocatalysis), abs(decay), abs(constraint)});
    }
};

template <typename Scalar>
UniformResidualT<Scalar> uniform_residual(const UniformSteadyStateT<Scalar>& s, const ParamsT<Scalar>& params) {
    const Scalar cbar = s.mass_constant / s.domain_measure;
    return {params.f * s.u - s.y, s.u * s.v * s.v - params.eps * s.v * s.v * s.v, params.kf() * s.v - params.eps * s.p,
            (s.u + s.v + s.p + s.y / params.eps - cbar) / cbar};
}

/// Closed-form boundary (v = p = 0) and interior (all positive) uniform steady states.
template <typename Scalar>
std::pair<UniformSteadyStateT<Scalar>, UniformSteadyStateT<Scalar>> uniform_steady_states(
    const ParamsT<Scalar>& params, Scalar mass_constant, Scalar domain_measure) {
    params.require_variational();
    if (!(mass_constant > 0)) throw ContractViolation("uniform_steady_states: C must be > 0");
    if (!(domain_measure > 0)) throw ContractViolation("uniform_steady_states: |Omega| must be > 0");
    const Scalar eps = params.eps, f = params.f, kf = params.kf();
    const Scalar cbar = mass_constant / domain_measure;
    const Scalar lambda = eps + Scalar(1) + kf / eps + f;

    UniformSteadyStateT<Scalar> b;
    b.kind = UniformKind::boundary;
    b.u = eps * cbar / (eps + f);
    b.v = 0;
    b.p = 0;
    b.y = f * eps * cbar / (eps + f);

    UniformSteadyStateT<Scalar> i;
    i.kind = UniformKind::interior;
    i.u = eps * cbar / lambda;
    i.v = cbar / lambda;
    i.p = kf * cbar / (eps * lambda);
    i.y = f * eps * cbar / lambda;

    for (auto* s : {&b, &i}) {
        s->lambda = lambda;
        s->mass_constant = mass_constant;
        s->domain_measure = domain_measure;
        // Each relation is checked relative to the magnitude of its terms.
        const auto r = uniform_residual(*s, params);
        using std::abs;
        const Scalar scale_feed = std::max(Scalar(1), abs(s->y));
        const Scalar scale_auto = std::max(Scalar(1), abs(s->u * s->v * s->v));
        const Scalar scale_decay = std::max(Scalar(1), abs(kf * s->v));
        const Scalar worst = std::max({abs(r.feed) / scale_feed, abs(r.autocatalysis) / scale_auto,
                                       abs(r.decay) / scale_decay, abs(r.constraint)});
        if (!(worst <= Scalar(1e-10)))
            throw InternalError(std::string("uniform_steady_states: ") + to_string(s->kind) +
                                " state fails verification, residual " + std::to_string(double(worst)));
    }
    return {b, i};
}

/// C: total mass of the initial data.
template <typename Scalar>
Scalar mass_constant(const StateT<Scalar>& initial, const ParamsT<Scalar>& params, const GridT<Scalar>& grid) {
    return total_mass(initial, params, grid);
}

// ---------------------------------------------------------------------------
// Non-uniform steady states of the classical model
// ---------------------------------------------------------------------------

enum class Stability { stable, unstable, undetermined };

inline const char* to_string(Stability s) {
    switch (s) {
        case Stability::stable: return "stable";
        case Stability::unstable: return "unstable";
        default: return "undetermined";
    }
}

template <typename Scalar = double>
struct ProfileSteadyStateT {
    FieldT<Scalar> u, v;
    Scalar residual_norm{};
    Stability stability = Stability::undetermined;
    std::string provenance;
    int pulse_count = 0;
    int newton_iterations = 0;

    ProfileSteadyStateT mirrored() const {
        auto m = *this;
        m.u = u.reverse();
        m.v = v.reverse();
        return m;
    }
};

using ProfileSteadyState = ProfileSteadyStateT<double>;

/// Max-norm of the discrete classical steady equations.
template <typename Scalar>
Scalar classical_residual_norm(const FieldT<Scalar>& u, const FieldT<Scalar>& v, const ParamsT<Scalar>& params,
                               const GridT<Scalar>& grid) {
    const auto r = rhs_classical(u, v, params, grid);
    return std::max(r.du_dt.cwiseAbs().maxCoeff(), r.dv_dt.cwiseAbs().maxCoeff());
}

namespace detail {

/// Solve the block-tridiagonal system with 2x2 blocks (lower[i] couples i to i-1,
/// upper[i] couples i to i+1) by block Thomas elimination. rhs is overwritten.
template <typename Scalar>
void block_thomas(std::vector<Eigen::Matrix<Scalar, 2, 2>>& diag, const std::vector<Eigen::Matrix<Scalar, 2, 2>>& lower,
                  const std::vector<Eigen::Matrix<Scalar, 2, 2>>& upper, std::vector<Eigen::Matrix<Scalar, 2, 1>>& rhs) {
    using Mat = Eigen::Matrix<Scalar, 2, 2>;
    const std::size_t n = diag.size();
    std::vector<Mat> c_prime(n);
    for (std::size_t i = 0; i < n; ++i) {
        Mat m = diag[i];
        if (i > 0) {
            m -= lower[i] * c_prime[i - 1];
            rhs[i] -= lower[i] * rhs[i - 1];
        }
        const Scalar det = m.determinant();
        if (!(std::abs(det) > Scalar(1e-14) * std::max(Scalar(1), m.squaredNorm())))
            throw SingularSystem("newton: singular Jacobian block at cell " + std::to_string(i));
        const Mat inv = m.inverse();
        if (i + 1 < n) c_prime[i] = inv * upper[i];
        rhs[i] = inv * rhs[i];
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c_prime[i] * rhs[i + 1];
}

}  // namespace detail

/// Damped Newton on the classical steady equations with the analytic
/// block-tridiagonal Jacobian. Throws NonConvergence after max_iter updates.
template <typename Scalar>
ProfileSteadyStateT<Scalar> newton_steady_classical(FieldT<Scalar> u, FieldT<Scalar> v, const ParamsT<Scalar>& params,
                                                    const GridT<Scalar>& grid, Scalar tol = Scalar(1e-10),
                                                    int max_iter = 50, std::vector<Scalar>* history = nullptr) {
    using Mat = Eigen::Matrix<Scalar, 2, 2>;
    using Vec = Eigen::Matrix<Scalar, 2, 1>;
    if (!(tol > 0)) throw ContractViolation("newton_steady_classical: tol must be > 0");
    check_shape(u, grid, "newton_steady_classical");
    check_shape(v, grid, "newton_steady_classical");
    params.validate();

    const std::size_t n = static_cast<std::size_t>(grid.n_cells());
    const Scalar inv_dx2 = Scalar(1) / (grid.dx() * grid.dx());
    const Scalar f = params.f, kf = params.kf();
    Mat coupling = Mat::Zero();
    coupling(0, 0) = params.du * inv_dx2;
    coupling(1, 1) = params.dv * inv_dx2;
    std::vector<Mat> lower(n, coupling), upper(n, coupling), diag(n);
    std::vector<Vec> step(n);

    Scalar res = classical_residual_norm(u, v, params, grid);
    if (history) history->push_back(res);
    int iter = 0;
    while (res > tol) {
        if (iter >= max_iter)
            throw NonConvergence("newton_steady_classical: no convergence after " + std::to_string(max_iter) +
                                     " iterations, residual " + std::to_string(double(res)),
                                 double(res));
        const auto r = rhs_classical(u, v, params, grid);
        for (std::size_t i = 0; i < n; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            const Scalar lap = (i == 0 || i + 1 == n ? Scalar(-1) : Scalar(-2)) * inv_dx2;
            const Scalar ui = u[ii], vi = v[ii];
            diag[i] << params.du * lap - vi * vi - f, Scalar(-2) * ui * vi,
                       vi * vi, params.dv * lap + Scalar(2) * ui * vi - kf;
            step[i] << -r.du_dt[ii], -r.dv_dt[ii];
        }
        detail::block_thomas(diag, lower, upper, step);

        Scalar damping = 1;
        FieldT<Scalar> u_try(u.size()), v_try(v.size());
        Scalar res_try = res;
        for (int half = 0; half < 30; ++half) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto ii = static_cast<Eigen::Index>(i);
                u_try[ii] = u[ii] + damping * step[i][0];
                v_try[ii] = v[ii] + damping * step[i][1];
            }
            res_try = classical_residual_norm(u_try, v_try, params, grid);
            if (res_try < res) break;
            damping /= 2;
        }
        u.swap(u_try);
        v.swap(v_try);
        res = res_try;
        ++iter;
        if (history) history->push_back(res);
    }

    ProfileSteadyStateT<Scalar> out;
    out.u = std::move(u);
    out.v = std::move(v);
    out.residual_norm = res;
    out.newton_iterations = iter;
    return out;
}

/// Local maxima of v above half its peak; zero when v is essentially flat.
template <typename Scalar>
int count_pulses(const FieldT<Scalar>& v) {
    const Eigen::Index n = v.size();
    const Scalar vmax = v.maxCoeff(), vmin = v.minCoeff();
    if (!(vmax - vmin > Scalar(1e-3))) return 0;
    const Scalar level = vmin + Scalar(0.5) * (vmax - vmin);
    int count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (v[i] < level) continue;
        const Scalar left = i > 0 ? v[i - 1] : Scalar(-1);
        if (left >= v[i]) continue;
        // walk over a plateau
        Eigen::Index j = i;
        while (j + 1 < n && v[j + 1] == v[i]) ++j;
        const Scalar right = j + 1 < n ? v[j + 1] : Scalar(-1);
        if (right < v[i]) ++count;
    }
    return count;
}

// ---------------------------------------------------------------------------
// Stability probe
// ---------------------------------------------------------------------------

struct ProbeOptions {
    double amplitude = 1e-3;
    double horizon = 500;
    int trials = 4;
    std::uint64_t rng_seed = 7;
    double return_factor = 10;  ///< stable if final distance <= return_factor * amplitude
    double escape = 0.05;       ///< unstable if any run departs further than this
    int modes = 5;              ///< cosines cos(m pi x / L), m < modes
};

namespace detail {

template <typename Scalar>
FieldT<Scalar> smooth_random_field(const GridT<Scalar>& grid, std::mt19937_64& rng, int modes) {
    std::normal_distribution<double> normal(0.0, 1.0);
    FieldT<Scalar> out = FieldT<Scalar>::Zero(grid.n_cells());
    const double pi = std::acos(-1.0);
    for (int m = 0; m < modes; ++m) {
        const double c = normal(rng);
        for (Eigen::Index i = 0; i < out.size(); ++i)
            out[i] += Scalar(c * std::cos(m * pi * double(grid.center(i)) / double(grid.length())));
    }
    const Scalar norm = out.cwiseAbs().maxCoeff();
    if (norm > Scalar(0)) out /= norm;
    return out;
}

template <typename Scalar>
Scalar max_distance(const FieldT<Scalar>& u, const FieldT<Scalar>& v, const FieldT<Scalar>& u_ref,
                    const FieldT<Scalar>& v_ref) {
    return std::max((u - u_ref).cwiseAbs().maxCoeff(), (v - v_ref).cwiseAbs().maxCoeff());
}

}  // namespace detail

/// Classify a classical steady profile by evolving small smooth random
/// perturbations. Distances are measured against an unperturbed control run
/// under the same stepper so that the O(dt) offset between the discrete
/// stepper's fixed point and the exact root does not count as growth.
template <typename Scalar>
Stability stability_probe(const ProfileSteadyStateT<Scalar>& profile, const ParamsT<Scalar>& params,
                          const GridT<Scalar>& grid, const StepperConfig& cfg, const ProbeOptions& opt = {}) {
    if (!(opt.amplitude > 0) || opt.trials <= 0) return Stability::stable;
    const std::size_t n_steps = detail::steps_for(opt.horizon, cfg.dt);
    const std::size_t check_every = std::max<std::size_t>(1, detail::steps_for(1.0, cfg.dt));

    std::mt19937_64 rng(opt.rng_seed);
    std::vector<FieldT<Scalar>> us, vs;
    us.push_back(profile.u);
    vs.push_back(profile.v);
    for (int t = 0; t < opt.trials; ++t) {
        FieldT<Scalar> du = detail::smooth_random_field(grid, rng, opt.modes);
        FieldT<Scalar> dv = detail::smooth_random_field(grid, rng, opt.modes);
        us.push_back((profile.u + Scalar(opt.amplitude) * du).cwiseMax(Scalar(0)));
        vs.push_back((profile.v + Scalar(opt.amplitude) * dv).cwiseMax(Scalar(0)));
    }

    ClassicalStepper<Scalar> stepper(params, grid, cfg);
    for (std::size_t step = 1; step <= n_steps; ++step) {
        for (std::size_t r = 0; r < us.size(); ++r) {
            try {
                stepper.advance(us[r], vs[r], double(step - 1) * cfg.dt);
            } catch (const DivergenceError&) {
                return Stability::unstable;
            }
        }
        if (step % check_every == 0) {
            for (std::size_t r = 0; r < us.size(); ++r)
                if (detail::max_distance(us[r], vs[r], profile.u, profile.v) > Scalar(opt.escape))
                    return Stability::unstable;
        }
    }
    const Scalar radius = Scalar(opt.return_factor * opt.amplitude);
    for (std::size_t r = 1; r < us.size(); ++r)
        if (detail::max_distance(us[r], vs[r], us[0], vs[0]) > radius) return Stability::undetermined;
    return Stability::stable;
}

// ---------------------------------------------------------------------------
// Pattern library
// ---------------------------------------------------------------------------

struct LibraryOptions {
    int seed_count = 64;
    std::uint64_t rng_seed = 1;
    double march_time = 2000;
    int max_bumps = 2;
    /// Bump centers are distinct slots (fractions of the domain length) plus uniform jitter.
    std::vector<double> center_slots{0.0, 1.0 / 3.0, 0.5, 2.0 / 3.0, 1.0};
    double center_jitter = 0.03;
    std::array<double, 2> width_range{0.015, 0.035};
    std::array<double, 2> a_range{0.6, 0.75};
    std::array<double, 2> b_ratio_range{0.42, 0.47};  ///< b = ratio * a
    double stabilized_rel = 1e-3;  ///< amplitude change allowed over the last 10% of the march
    double newton_tol = 1e-10;
    int newton_max_iter = 50;
    double dedup_distance = 1e-4;
    ProbeOptions probe{};
    std::size_t jobs = 1;
};

template <typename Scalar = double>
struct PatternLibraryT {
    std::vector<ProfileSteadyStateT<Scalar>> profiles;
    int seeds_stabilized = 0;
    int seeds_polished = 0;
    std::vector<std::string> warnings;
};

using PatternLibrary = PatternLibraryT<double>;

/// Initial data of one library seed: u = 1 - a sum(bumps), v = b sum(bumps),
/// bump(x) = exp(-(x - c)^2 / w).
struct SeedSpec {
    std::vector<double> centers, widths;
    double a = 0, b = 0;

    std::string describe(int index) const {
        std::string s = "seed " + std::to_string(index) + ": " + std::to_string(centers.size()) + " bumps";
        if (!centers.empty()) {
            s += " at";
            for (double c : centers) {
                char buf[32];
                std::snprintf(buf, sizeof buf, " %.3f", c);
                s += buf;
            }
        }
        return s;
    }
};

inline SeedSpec draw_seed(std::uint64_t rng_seed, int index, const LibraryOptions& opt) {
    std::seed_seq seq{static_cast<std::uint32_t>(rng_seed), static_cast<std::uint32_t>(rng_seed >> 32),
                      static_cast<std::uint32_t>(index)};
    std::mt19937_64 rng(seq);
    SeedSpec s;
    if (opt.max_bumps <= 0) return s;
    const int max_m = std::min<int>(opt.max_bumps, static_cast<int>(opt.center_slots.size()));
    if (max_m <= 0) return s;
    std::uniform_int_distribution<int> count(1, max_m);
    std::uniform_real_distribution<double> jitter(-opt.center_jitter, opt.center_jitter),
        width(opt.width_range[0], opt.width_range[1]), amp_a(opt.a_range[0], opt.a_range[1]),
        ratio_b(opt.b_ratio_range[0], opt.b_ratio_range[1]);
    const int m = count(rng);
    std::vector<double> slots = opt.center_slots;
    for (int j = 0; j < m; ++j) {
        std::uniform_int_distribution<std::size_t> pick(0, slots.size() - 1);
        const std::size_t k = pick(rng);
        s.centers.push_back(slots[k] + jitter(rng));
        slots.erase(slots.begin() + static_cast<std::ptrdiff_t>(k));
        s.widths.push_back(width(rng));
    }
    s.a = amp_a(rng);
    s.b = ratio_b(rng) * s.a;
    return s;
}

template <typename Scalar>
std::pair<FieldT<Scalar>, FieldT<Scalar>> seed_fields(const SeedSpec& s, const GridT<Scalar>& grid) {
    FieldT<Scalar> bumps = FieldT<Scalar>::Zero(grid.n_cells());
    for (std::size_t j = 0; j < s.centers.size(); ++j)
        for (Eigen::Index i = 0; i < bumps.size(); ++i) {
            const double d = double(grid.center(i)) - s.centers[j];
            bumps[i] += Scalar(std::exp(-d * d / s.widths[j]));
        }
    FieldT<Scalar> u = (Scalar(1) - Scalar(s.a) * bumps.array()).cwiseMax(Scalar(0)).matrix();
    FieldT<Scalar> v = Scalar(s.b) * bumps;
    return {u, v};
}

/// Regenerate a library of classical steady profiles from random bump seeds:
/// march, Newton-polish when the march has settled, deduplicate up to
/// reflection, then classify stability. Deterministic for a given rng_seed
/// regardless of opt.jobs.
template <typename Scalar>
PatternLibraryT<Scalar> generate_pattern_library(const ParamsT<Scalar>& params, const GridT<Scalar>& grid,
                                                 const StepperConfig& cfg, const LibraryOptions& opt) {
    if (opt.seed_count < 1) throw ContractViolation("generate_pattern_library: seed_count must be >= 1");
    struct Candidate {
        bool stabilized = false;
        bool ok = false;
        ProfileSteadyStateT<Scalar> profile;
    };
    std::vector<Candidate> cands(static_cast<std::size_t>(opt.seed_count));

    StepperConfig march_cfg = cfg;
    march_cfg.snapshot_times.clear();
    march_cfg.record_every = std::max(cfg.dt, 1.0);

    parallel_for(cands.size(), opt.jobs, [&](std::size_t idx) {
        const int index = static_cast<int>(idx);
        const SeedSpec seed = draw_seed(opt.rng_seed, index, opt);
        auto [u0, v0] = seed_fields(seed, grid);
        auto traj = simulate_classical(u0, v0, params, grid, march_cfg, opt.march_time);
        if (traj.failed) return;
        const auto& recs = traj.records;
        const double amp_end = std::max(recs.back().amp_u, recs.back().amp_v);
        const double t_from = 0.9 * recs.back().t;
        double worst = 0;
        for (const auto& r : recs)
            if (r.t >= t_from) worst = std::max(worst, std::abs(std::max(r.amp_u, r.amp_v) - amp_end));
        Candidate& c = cands[idx];
        c.stabilized = worst <= opt.stabilized_rel * std::max(amp_end, 1e-2);
        if (!c.stabilized) return;
        try {
            auto prof = newton_steady_classical<Scalar>(traj.final_state.u, traj.final_state.v, params, grid,
                                                        Scalar(opt.newton_tol), opt.newton_max_iter);
            if (prof.u.minCoeff() < Scalar(-1e-10) || prof.v.minCoeff() < Scalar(-1e-10)) return;
            prof.u = prof.u.cwiseMax(Scalar(0));
            prof.v = prof.v.cwiseMax(Scalar(0));
            prof.residual_norm = classical_residual_norm(prof.u, prof.v, params, grid);
            prof.provenance = seed.describe(index);
            prof.pulse_count = count_pulses(prof.v);
            c.profile = std::move(prof);
            c.ok = c.profile.residual_norm <= Scalar(opt.newton_tol);
        } catch (const NonConvergence&) {
        } catch (const SingularSystem&) {
        }
    });

    PatternLibraryT<Scalar> lib;
    auto same = [&](const ProfileSteadyStateT<Scalar>& a, const ProfileSteadyStateT<Scalar>& b) {
        const Scalar tol = Scalar(opt.dedup_distance);
        if (detail::max_distance(a.u, a.v, b.u, b.v) < tol) return true;
        const FieldT<Scalar> ru = b.u.reverse(), rv = b.v.reverse();
        return detail::max_distance(a.u, a.v, ru, rv) < tol;
    };
    for (auto& c : cands) {
        lib.seeds_stabilized += c.stabilized ? 1 : 0;
        if (!c.ok) continue;
        ++lib.seeds_polished;
        const bool dup = std::any_of(lib.profiles.begin(), lib.profiles.end(),
                                     [&](const auto& p) { return same(p, c.profile); });
        if (!dup) lib.profiles.push_back(std::move(c.profile));
    }

    parallel_for(lib.profiles.size(), opt.jobs, [&](std::size_t i) {
        lib.profiles[i].stability = stability_probe(lib.profiles[i], params, grid, cfg, opt.probe);
    });

    std::stable_sort(lib.profiles.begin(), lib.profiles.end(), [](const auto& a, const auto& b) {
        if (a.pulse_count != b.pulse_count) return a.pulse_count < b.pulse_count;
        return a.v.maxCoeff() < b.v.maxCoeff();
    });
    if (lib.profiles.empty()) lib.warnings.push_back("pattern library is empty: no seed converged");
    return lib;
}

}  // namespace vgs
