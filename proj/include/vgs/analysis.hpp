#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "vgs/errors.hpp"
#include "vgs/grid.hpp"
#include "vgs/integrator.hpp"
#include "vgs/model.hpp"
#include "vgs/steady.hpp"

namespace vgs {

// ---------------------------------------------------------------------------
// Pattern amplitude and persistence
// ---------------------------------------------------------------------------

template <typename Scalar>
Scalar pattern_amplitude(const FieldT<Scalar>& u, const FieldT<Scalar>& v) {
    return std::max(u.maxCoeff() - u.minCoeff(), v.maxCoeff() - v.minCoeff());
}

template <typename Scalar>
Scalar pattern_amplitude(const StateT<Scalar>& s) {
    return pattern_amplitude(s.u, s.v);
}

inline double pattern_amplitude(const Record& r) { return std::max(r.amp_u, r.amp_v); }

struct PersistenceResult {
    double t_persist = 0;  ///< first record time with amplitude <= a, or last record time if censored
    bool censored = false;
    double threshold = 0.05;
    std::size_t record_index = 0;
};

/// First recorded time at which the pattern amplitude is <= a. Resolution is
/// the record spacing.
inline PersistenceResult persistence_time(const std::vector<Record>& records, double a = 0.05) {
    if (records.empty()) throw ContractViolation("persistence_time: trajectory has no records");
    PersistenceResult res;
    res.threshold = a;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (pattern_amplitude(records[i]) <= a) {
            res.t_persist = records[i].t;
            res.record_index = i;
            return res;
        }
    }
    res.censored = true;
    res.t_persist = records.back().t;
    res.record_index = records.size() - 1;
    return res;
}

template <typename Scalar>
PersistenceResult persistence_time(const TrajectoryT<Scalar>& traj, double a = 0.05) {
    return persistence_time(traj.records, a);
}

// ---------------------------------------------------------------------------
// Energy landscape of uniform states
// ---------------------------------------------------------------------------

/// Perturbation direction in (u, v, p, y) coordinates; X changes by components[3] / eps.
struct Direction {
    std::array<double, 4> components{};
    std::string name;

    bool is_zero() const {
        return std::all_of(components.begin(), components.end(), [](double c) { return c == 0; });
    }

    static Direction s1() { return {{0, -1, 1, 0}, "s1"}; }
    template <typename Scalar>
    static Direction s2(const ParamsT<Scalar>& params) {
        return {{-1, 0, 0, double(params.eps)}, "s2"};
    }
    static Direction s3() { return {{-1, 1, 0, 0}, "s3"}; }
    /// (-1, 0, 0, eps) + (-eps, 0, eps, 0): U -> X plus an eps-sized V -> P leak.
    template <typename Scalar>
    static Direction mixed(const ParamsT<Scalar>& params) {
        const double e = double(params.eps);
        return {{-1 - e, 0, e, e}, "mixed"};
    }
};

struct DirectionalDerivatives {
    double dE = 0;
    double d2E = 0;
};

namespace detail {

// Concentrations (u, v, p, ytilde) and their perturbation weights.
template <typename Scalar>
std::array<double, 4> concentrations(const UniformSteadyStateT<Scalar>& base, const ParamsT<Scalar>& params) {
    return {double(base.u), double(base.v), double(base.p), double(base.y / params.eps)};
}

template <typename Scalar>
std::array<double, 4> weights(const Direction& dir, const ParamsT<Scalar>& params) {
    return {dir.components[0], dir.components[1], dir.components[2], dir.components[3] / double(params.eps)};
}

template <typename Scalar>
std::array<double, 4> sigmas(const ParamsT<Scalar>& params) {
    const auto sg = make_sigma(params);
    return {double(sg.sigma_u), double(sg.sigma_v), double(sg.sigma_p), double(sg.sigma_ytilde)};
}

}  // namespace detail

/// dE/ddelta = |Omega| sum w_c (ln c + sigma_c), d2E/ddelta2 = |Omega| sum w_c^2 / c over
/// species with w_c != 0, evaluated formally at base + delta * dir (no feasibility check).
template <typename Scalar>
DirectionalDerivatives directional_derivatives(const UniformSteadyStateT<Scalar>& base, const Direction& dir,
                                               double delta, const ParamsT<Scalar>& params) {
    const auto c = detail::concentrations(base, params);
    const auto w = detail::weights(dir, params);
    const auto sg = detail::sigmas(params);
    DirectionalDerivatives d;
    for (int i = 0; i < 4; ++i) {
        if (w[i] == 0) continue;
        const double ci = c[i] + delta * w[i];
        d.dE += w[i] * (std::log(ci) + sg[i]);
        d.d2E += w[i] * w[i] / ci;
    }
    const double measure = double(base.domain_measure);
    d.dE *= measure;
    d.d2E *= measure;
    return d;
}

struct ScanCurve {
    std::string direction;
    std::vector<double> deltas, energies, first_derivs, second_derivs;
    std::vector<bool> feasible;
};

/// delta grid on [lo, hi]: n/2 linear samples plus geometric samples
/// clustered at 0 (down to 1e-8 of the half-width), sorted and de-duplicated.
inline std::vector<double> scan_deltas(double lo, double hi, int n) {
    if (!(hi > lo)) throw ContractViolation("scan_deltas: need delta_max > delta_min");
    if (n < 3) throw ContractViolation("scan_deltas: need at least 3 samples");
    std::vector<double> d;
    const int n_lin = std::max(3, n / 2);
    for (int i = 0; i < n_lin; ++i) d.push_back(lo + (hi - lo) * i / (n_lin - 1));
    const int n_geo = n - n_lin;
    if (lo < 0 && hi > 0 && n_geo >= 2) {
        d.push_back(0.0);
        const int per_side = (n_geo - 1) / 2;
        for (int side = 0; side < 2; ++side) {
            const double edge = side == 0 ? -lo : hi;
            for (int i = 0; i < per_side; ++i) {
                const double frac = per_side == 1 ? 0.0 : double(i) / (per_side - 1);
                const double mag = edge * std::pow(1e-8, 1.0 - frac);
                d.push_back(side == 0 ? -mag : mag);
            }
        }
    } else if (n_geo > 0) {
        const double start = lo >= 0 ? lo : hi;
        const double edge = lo >= 0 ? hi : lo;
        for (int i = 0; i < n_geo; ++i) {
            const double frac = n_geo == 1 ? 0.0 : double(i) / (n_geo - 1);
            d.push_back(start + (edge - start) * std::pow(1e-8, 1.0 - frac));
        }
    }
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
    return d;
}

/// Energy of base + delta * dir on a uniform state, with analytic first and
/// second derivatives. Samples where a concentration would become negative (or
/// a perturbed one zero) are flagged infeasible and carry NaN.
template <typename Scalar>
ScanCurve landscape_scan(const UniformSteadyStateT<Scalar>& base, const Direction& dir,
                         const std::vector<double>& deltas, const ParamsT<Scalar>& params) {
    if (dir.is_zero()) throw ContractViolation("landscape_scan: direction is all zero");
    params.require_variational();
    const GridT<Scalar> cell(4, base.domain_measure);
    const auto c = detail::concentrations(base, params);
    const auto w = detail::weights(dir, params);
    const double nan = std::numeric_limits<double>::quiet_NaN();

    ScanCurve sc;
    sc.direction = dir.name;
    for (double delta : deltas) {
        bool ok = true;
        for (int i = 0; i < 4; ++i) {
            const double ci = c[i] + delta * w[i];
            if (ci < 0 || (w[i] != 0 && ci <= 0)) ok = false;
        }
        sc.deltas.push_back(delta);
        sc.feasible.push_back(ok);
        if (!ok) {
            sc.energies.push_back(nan);
            sc.first_derivs.push_back(nan);
            sc.second_derivs.push_back(nan);
            continue;
        }
        const auto d = [&](int i) { return Scalar(c[i] + delta * w[i]); };
        auto s = StateT<Scalar>::uniform(cell, d(0), d(1), d(2), d(3) * params.eps);
        sc.energies.push_back(double(free_energy(s, params, cell)));
        const auto dd = directional_derivatives(base, dir, delta, params);
        sc.first_derivs.push_back(dd.dE);
        sc.second_derivs.push_back(dd.d2E);
    }
    return sc;
}

template <typename Scalar>
ScanCurve landscape_scan(const UniformSteadyStateT<Scalar>& base, const Direction& dir, double delta_min,
                         double delta_max, int n_samples, const ParamsT<Scalar>& params) {
    return landscape_scan(base, dir, scan_deltas(delta_min, delta_max, n_samples), params);
}

// ---------------------------------------------------------------------------
// Oscillations
// ---------------------------------------------------------------------------

struct Peak {
    double t;
    double value;
};

struct OscillationReport {
    std::vector<Peak> peaks;
    std::vector<double> ratios;  ///< successive peak heights above the final value
    bool oscillating = false;    ///< at least two peaks
    bool damped = false;         ///< oscillating and every ratio < 1
};

/// Local maxima by 3-point comparison; runs of values equal within
/// plateau_tol count as one point.
inline OscillationReport detect_oscillations(const std::vector<double>& times, const std::vector<double>& values,
                                             double plateau_tol = 1e-12) {
    if (times.size() != values.size()) throw ContractViolation("detect_oscillations: length mismatch");
    if (values.size() < 3) throw ContractViolation("detect_oscillations: need at least 3 records");
    OscillationReport rep;
    const std::size_t n = values.size();
    std::size_t i = 1;
    while (i + 1 < n) {
        if (values[i] > values[i - 1] + plateau_tol) {
            std::size_t j = i;
            while (j + 1 < n && std::abs(values[j + 1] - values[i]) <= plateau_tol) ++j;
            if (j + 1 < n && values[j + 1] < values[i] - plateau_tol) {
                const std::size_t mid = (i + j) / 2;
                rep.peaks.push_back({times[mid], values[mid]});
            }
            i = j + 1;
        } else {
            ++i;
        }
    }
    rep.oscillating = rep.peaks.size() >= 2;
    if (rep.oscillating) {
        const double base = values.back();
        rep.damped = true;
        for (std::size_t k = 0; k + 1 < rep.peaks.size(); ++k) {
            const double h0 = rep.peaks[k].value - base;
            const double h1 = rep.peaks[k + 1].value - base;
            const double ratio = h1 / h0;
            rep.ratios.push_back(ratio);
            if (!(h0 > 0 && ratio < 1)) rep.damped = false;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Front tracking
// ---------------------------------------------------------------------------

struct FrontTrack {
    std::vector<double> times, locations;
    std::vector<bool> at_boundary;  ///< minimum sat in an end cell; location is unrefined
    double speed = 0;
};

/// Ordinary least squares y = slope * x + intercept.
struct LineFit {
    double slope = 0, intercept = 0, r2 = 0;
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw InsufficientData("least_squares: need >= 2 matching points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0)) throw InsufficientData("least_squares: abscissae are all equal");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

/// Location of min(u) per snapshot (parabolic refinement through the minimal
/// cell and its neighbours) and the least-squares speed over snapshots with
/// t in [t_from, t_to].
template <typename Scalar>
FrontTrack track_front(const std::vector<SnapshotT<Scalar>>& snapshots, const GridT<Scalar>& grid,
                       double t_from = -std::numeric_limits<double>::infinity(),
                       double t_to = std::numeric_limits<double>::infinity()) {
    if (snapshots.size() < 2) throw ContractViolation("track_front: need at least 2 snapshots");
    FrontTrack ft;
    const double dx = double(grid.dx());
    for (const auto& snap : snapshots) {
        const auto& u = snap.state.u;
        check_shape(u, grid, "track_front");
        Eigen::Index imin = 0;
        u.minCoeff(&imin);
        double loc = double(grid.center(imin));
        const bool edge = imin == 0 || imin == u.size() - 1;
        if (!edge) {
            const double a = double(u[imin - 1]), b = double(u[imin]), c = double(u[imin + 1]);
            const double denom = a - 2 * b + c;
            if (denom > 0) loc += 0.5 * dx * (a - c) / denom;
        }
        ft.times.push_back(snap.t);
        ft.locations.push_back(loc);
        ft.at_boundary.push_back(edge);
    }
    std::vector<double> t, x;
    for (std::size_t i = 0; i < ft.times.size(); ++i)
        if (ft.times[i] >= t_from && ft.times[i] <= t_to) {
            t.push_back(ft.times[i]);
            x.push_back(ft.locations[i]);
        }
    ft.speed = least_squares(t, x).slope;
    return ft;
}

// ---------------------------------------------------------------------------
// Scaling fit
// ---------------------------------------------------------------------------

struct ScalingPoint {
    double eps;
    double t_persist;
    bool censored = false;
};

struct ScalingFit {
    double slope = 0, intercept = 0, r2 = 0;
    std::size_t used = 0, excluded = 0;
};

/// OLS of ln T against ln eps over uncensored points.
inline ScalingFit fit_scaling(const std::vector<ScalingPoint>& points) {
    std::vector<double> x, y;
    ScalingFit fit;
    for (const auto& p : points) {
        if (p.censored || !(p.eps > 0) || !(p.t_persist > 0)) {
            ++fit.excluded;
            continue;
        }
        x.push_back(std::log(p.eps));
        y.push_back(std::log(p.t_persist));
    }
    fit.used = x.size();
    if (fit.used < 3)
        throw InsufficientData("fit_scaling: need >= 3 uncensored positive points, have " + std::to_string(fit.used));
    const auto line = least_squares(x, y);
    fit.slope = line.slope;
    fit.intercept = line.intercept;
    fit.r2 = line.r2;
    return fit;
}

}  // namespace vgs
