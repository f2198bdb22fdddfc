#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "vgs/errors.hpp"
#include "vgs/grid.hpp"

namespace vgs {

/// Model constants. eps > 0 selects the variational (reversible) model; the
/// classical model ignores eps.
template <typename Scalar = double>
struct ParamsT {
    Scalar du = Scalar(5e-4);
    Scalar dv = Scalar(2.5e-4);
    Scalar f = Scalar(0.04);
    Scalar k = Scalar(0.065);
    Scalar eps = Scalar(1e-2);

    Scalar kf() const noexcept { return k + f; }

    void validate() const {
        if (!(du > 0) || !(dv > 0)) throw ContractViolation("params: diffusion coefficients must be > 0");
        if (!(f > 0) || !(k >= 0)) throw ContractViolation("params: need f > 0 and k >= 0");
        if (!(eps >= 0)) throw ContractViolation("params: eps must be >= 0");
    }

    void require_variational() const {
        validate();
        if (!(eps > 0)) throw ContractViolation("params: variational model requires eps > 0");
    }

    bool operator==(const ParamsT&) const = default;
};

using Params = ParamsT<double>;

/// Internal energies of U, V, P and X (the latter indexed by ytilde = y / eps).
template <typename Scalar = double>
struct SigmaGaugeT {
    Scalar sigma_u{};
    Scalar sigma_v{};
    Scalar sigma_p{};
    Scalar sigma_ytilde{};
};

using SigmaGauge = SigmaGaugeT<double>;

/// Gauge with sigma_u = 0. Throws DomainError when eps = 0 (the gauge diverges).
template <typename Scalar>
SigmaGaugeT<Scalar> make_sigma(const ParamsT<Scalar>& params) {
    using std::log;
    if (!(params.eps > 0)) throw DomainError("make_sigma: gauge undefined for eps = 0");
    if (!(params.f > 0) || !(params.kf() > 0)) throw DomainError("make_sigma: need f > 0 and k + f > 0");
    const Scalar le = log(params.eps);
    return {Scalar(0), le, Scalar(2) * le - log(params.kf()), le - log(params.f)};
}

/// Concentrations of U, V, P and the stored variable y (X has concentration y / eps).
template <typename Scalar = double>
struct StateT {
    FieldT<Scalar> u, v, p, y;

    StateT() = default;
    StateT(FieldT<Scalar> u_, FieldT<Scalar> v_, FieldT<Scalar> p_, FieldT<Scalar> y_)
        : u(std::move(u_)), v(std::move(v_)), p(std::move(p_)), y(std::move(y_)) {}

    static StateT uniform(const GridT<Scalar>& grid, Scalar u0, Scalar v0, Scalar p0, Scalar y0) {
        const auto n = grid.n_cells();
        return {FieldT<Scalar>::Constant(n, u0), FieldT<Scalar>::Constant(n, v0),
                FieldT<Scalar>::Constant(n, p0), FieldT<Scalar>::Constant(n, y0)};
    }

    Eigen::Index size() const noexcept { return u.size(); }

    void check(const GridT<Scalar>& grid, const char* who) const {
        check_shape(u, grid, who);
        check_shape(v, grid, who);
        check_shape(p, grid, who);
        check_shape(y, grid, who);
    }

    StateT mirrored() const {
        return {u.reverse(), v.reverse(), p.reverse(), y.reverse()};
    }

    StateT& operator+=(const StateT& o) {
        u += o.u; v += o.v; p += o.p; y += o.y;
        return *this;
    }
    friend StateT operator*(Scalar a, const StateT& s) { return {a * s.u, a * s.v, a * s.p, a * s.y}; }
    friend StateT operator+(StateT a, const StateT& b) { return a += b; }
};

using State = StateT<double>;

template <typename Scalar = double>
struct ReactionRatesT {
    FieldT<Scalar> r1;  ///< U + 2V <-> 3V
    FieldT<Scalar> r2;  ///< V <-> P
    FieldT<Scalar> r3;  ///< U <-> X
};

using ReactionRates = ReactionRatesT<double>;

/// Closed mass-action rates of the three reversible reactions.
template <typename Scalar>
ReactionRatesT<Scalar> reaction_rates(const StateT<Scalar>& s, const ParamsT<Scalar>& params) {
    const Scalar eps = params.eps;
    const auto v2 = s.v.array().square();
    ReactionRatesT<Scalar> r;
    r.r1 = (s.u.array() * v2 - eps * v2 * s.v.array()).matrix();
    r.r2 = (params.kf() * s.v.array() - eps * s.p.array()).matrix();
    r.r3 = (params.f * s.u.array() - s.y.array()).matrix();
    return r;
}

/// Time derivative of the variational system, returned as a State-shaped rate.
template <typename Scalar>
StateT<Scalar> rhs_variational(const StateT<Scalar>& s, const ParamsT<Scalar>& params,
                               const GridT<Scalar>& grid) {
    params.require_variational();
    s.check(grid, "rhs_variational");
    const auto r = reaction_rates(s, params);
    StateT<Scalar> d;
    d.u = params.du * laplacian_neumann(s.u, grid) - r.r1 - r.r3;
    d.v = params.dv * laplacian_neumann(s.v, grid) + r.r1 - r.r2;
    d.p = r.r2;
    d.y = params.eps * r.r3;
    return d;
}

template <typename Scalar>
struct ClassicalRateT {
    FieldT<Scalar> du_dt, dv_dt;
};

/// Time derivative of the two-species classical system (eps is ignored).
template <typename Scalar>
ClassicalRateT<Scalar> rhs_classical(const FieldT<Scalar>& u, const FieldT<Scalar>& v,
                                     const ParamsT<Scalar>& params, const GridT<Scalar>& grid) {
    check_shape(u, grid, "rhs_classical");
    check_shape(v, grid, "rhs_classical");
    const auto uv2 = (u.array() * v.array().square()).matrix();
    ClassicalRateT<Scalar> d;
    d.du_dt = params.du * laplacian_neumann(u, grid) - uv2 +
              (params.f * (Scalar(1) - u.array())).matrix();
    d.dv_dt = params.dv * laplacian_neumann(v, grid) + uv2 - params.kf() * v;
    return d;
}

namespace detail {

// c (ln c - 1 + sigma), with 0 ln 0 = 0.
template <typename Scalar>
Scalar entropy_density(Scalar c, Scalar sigma) {
    if (c == Scalar(0)) return Scalar(0);
    if (!(c > Scalar(0))) throw DomainError("free_energy: negative concentration " + std::to_string(double(c)));
    using std::log;
    return c * (log(c) - Scalar(1) + sigma);
}

}  // namespace detail

/// Free energy: integral over the four species of c (ln c - 1) + c sigma_c, X counted as y / eps.
template <typename Scalar>
Scalar free_energy(const StateT<Scalar>& s, const ParamsT<Scalar>& params, const GridT<Scalar>& grid) {
    params.require_variational();
    s.check(grid, "free_energy");
    const auto sg = make_sigma(params);
    const Scalar inv_eps = Scalar(1) / params.eps;
    FieldT<Scalar> density(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        density[i] = detail::entropy_density(s.u[i], sg.sigma_u) +
                     detail::entropy_density(s.v[i], sg.sigma_v) +
                     detail::entropy_density(s.p[i], sg.sigma_p) +
                     detail::entropy_density(s.y[i] * inv_eps, sg.sigma_ytilde);
    }
    return integrate(density, grid);
}

/// mu_c = ln c + sigma_c for c in {u, v, p, ytilde}. Zero entries map to -infinity.
template <typename Scalar = double>
struct ChemicalPotentialsT {
    FieldT<Scalar> mu_u, mu_v, mu_p, mu_ytilde;
};

using ChemicalPotentials = ChemicalPotentialsT<double>;

template <typename Scalar>
ChemicalPotentialsT<Scalar> chemical_potentials(const StateT<Scalar>& s, const ParamsT<Scalar>& params) {
    const auto sg = make_sigma(params);
    auto mu = [](const FieldT<Scalar>& c, Scalar sigma) {
        FieldT<Scalar> out(c.size());
        for (Eigen::Index i = 0; i < c.size(); ++i) {
            if (c[i] < Scalar(0)) throw DomainError("chemical_potentials: negative concentration");
            out[i] = c[i] == Scalar(0) ? -std::numeric_limits<Scalar>::infinity()
                                       : Scalar(std::log(c[i])) + sigma;
        }
        return out;
    };
    return {mu(s.u, sg.sigma_u), mu(s.v, sg.sigma_v), mu(s.p, sg.sigma_p),
            mu(FieldT<Scalar>(s.y / params.eps), sg.sigma_ytilde)};
}

/// Conserved quantity: integral of u + v + p + y / eps.
template <typename Scalar>
Scalar total_mass(const StateT<Scalar>& s, const ParamsT<Scalar>& params, const GridT<Scalar>& grid) {
    params.require_variational();
    s.check(grid, "total_mass");
    return integrate(s.u, grid) + integrate(s.v, grid) + integrate(s.p, grid) +
           integrate(s.y, grid) / params.eps;
}

}  // namespace vgs
