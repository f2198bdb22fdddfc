#include <doctest.h>

#include <cmath>
#include <random>

#include "vgs/model.hpp"

using namespace vgs;

namespace {
const double pi = std::acos(-1.0);

Params kinetics(double eps = 1e-2) {
    Params p;
    p.eps = eps;
    return p;
}

// Interior uniform equilibrium at eps = 0.01, C = 6, computed offline.
constexpr double u2[4] = {0.005194805194805195, 0.5194805194805195, 5.454545454545456, 0.00020779220779220783};

State random_positive(const Grid& g, std::mt19937_64& rng, double eps) {
    std::uniform_real_distribution<double> U(0.01, 2.0);
    State s = State::uniform(g, 0, 0, 0, 0);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        s.u[i] = U(rng);
        s.v[i] = U(rng);
        s.p[i] = U(rng);
        s.y[i] = eps * U(rng);
    }
    return s;
}
}  // namespace

TEST_SUITE("model") {

TEST_CASE("sigma gauge values") {
    const auto s = make_sigma(kinetics());
    CHECK(s.sigma_u == 0.0);
    CHECK(s.sigma_v == doctest::Approx(-4.605170185988091).epsilon(1e-12));
    CHECK(s.sigma_p == doctest::Approx(-6.956545443151568).epsilon(1e-12));
    CHECK(s.sigma_ytilde == doctest::Approx(-1.3862943611198904).epsilon(1e-12));

    Params unit;
    unit.eps = 1;
    unit.f = 1;
    unit.k = 0;
    const auto z = make_sigma(unit);
    CHECK(z.sigma_u == 0.0);
    CHECK(z.sigma_v == 0.0);
    CHECK(z.sigma_p == 0.0);
    CHECK(z.sigma_ytilde == 0.0);
}

TEST_CASE("sigma gauge relations hold for many parameter sets") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> L(-12, 0);
    for (int t = 0; t < 50; ++t) {
        Params p;
        p.eps = std::exp(L(rng));
        p.f = std::exp(L(rng) / 3);
        p.k = std::exp(L(rng) / 3);
        const auto s = make_sigma(p);
        CHECK(std::abs(s.sigma_v - s.sigma_u - std::log(p.eps)) <= 1e-12);
        CHECK(std::abs(s.sigma_p - s.sigma_v - (std::log(p.eps) - std::log(p.k + p.f))) <= 1e-12);
        CHECK(std::abs(s.sigma_ytilde - s.sigma_u - (std::log(p.eps) - std::log(p.f))) <= 1e-12);
    }
}

TEST_CASE("sigma gauge is undefined at eps = 0") {
    CHECK_THROWS_AS(make_sigma(kinetics(0.0)), DomainError);
}

TEST_CASE("reaction rates") {
    const Grid g(8, 1.0);
    const auto at_u2 = reaction_rates(State::uniform(g, u2[0], u2[1], u2[2], u2[3]), kinetics());
    CHECK(at_u2.r1.cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(at_u2.r2.cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(at_u2.r3.cwiseAbs().maxCoeff() <= 1e-12);

    const auto at_u1 = reaction_rates(State::uniform(g, 1, 0, 0, 0.04), kinetics());
    CHECK(at_u1.r1.cwiseAbs().maxCoeff() == 0.0);
    CHECK(at_u1.r2.cwiseAbs().maxCoeff() == 0.0);
    CHECK(at_u1.r3.cwiseAbs().maxCoeff() <= 1e-17);

    const auto hand = reaction_rates(State::uniform(g, 1, 1, 0, 0), kinetics());
    CHECK(hand.r1[0] == doctest::Approx(0.99).epsilon(1e-14));
    CHECK(hand.r2[0] == doctest::Approx(0.105).epsilon(1e-14));
    CHECK(hand.r3[0] == doctest::Approx(0.04).epsilon(1e-14));
}

TEST_CASE("variational right-hand side vanishes at the interior equilibrium") {
    const Grid g(16, 1.0);
    const auto r = rhs_variational(State::uniform(g, u2[0], u2[1], u2[2], u2[3]), kinetics(), g);
    for (const Field* f : {&r.u, &r.v, &r.p, &r.y}) CHECK(f->cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("reaction terms cancel in the weighted sum") {
    const Grid g(50, 1.0);
    std::mt19937_64 rng(17);
    for (double eps : {1e-2, 1e-4, 1e-6}) {
        const Params p = kinetics(eps);
        for (int t = 0; t < 10; ++t) {
            const State s = random_positive(g, rng, eps);
            const auto r = rhs_variational(s, p, g);
            const Field diff = p.du * laplacian_neumann(s.u, g) + p.dv * laplacian_neumann(s.v, g);
            const Field residual = r.u + r.v + r.p + r.y / eps - diff;
            const double scale = 1 + diff.cwiseAbs().maxCoeff();
            CHECK(residual.cwiseAbs().maxCoeff() <= 1e-13 * scale);
        }
    }
}

TEST_CASE("variational u rate with v = p = y = 0") {
    const Grid g(100, 1.0);
    Field u(100);
    for (int i = 0; i < 100; ++i) u[i] = std::cos(pi * g.center(i));
    const Field z = Field::Zero(100);
    const Params p = kinetics();
    const auto r = rhs_variational(State(u, z, z, z), p, g);
    const Field expect = p.du * laplacian_neumann(u, g) - p.f * u;
    CHECK((r.u - expect).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("classical right-hand side") {
    const Grid g(10, 1.0);
    const auto trivial = rhs_classical(Field(Field::Ones(10)), Field(Field::Zero(10)), kinetics(), g);
    CHECK(trivial.du_dt.cwiseAbs().maxCoeff() == 0.0);
    CHECK(trivial.dv_dt.cwiseAbs().maxCoeff() == 0.0);
    const auto ones = rhs_classical(Field(Field::Ones(10)), Field(Field::Ones(10)), kinetics(), g);
    CHECK(ones.du_dt[3] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(ones.dv_dt[3] == doctest::Approx(0.895).epsilon(1e-14));
}

TEST_CASE("variational rates approach the classical ones linearly in eps") {
    const Grid g(40, 1.0);
    Field u(40), v(40);
    for (int i = 0; i < 40; ++i) {
        u[i] = 1 - 0.5 * std::exp(-std::pow(g.center(i) - 0.5, 2) / 0.01);
        v[i] = 0.25 * std::exp(-std::pow(g.center(i) - 0.5, 2) / 0.01);
    }
    const Params base = kinetics();
    const auto cl = rhs_classical(u, v, base, g);
    double prev = 0;
    for (double eps : {1e-2, 1e-4}) {
        const Params p = kinetics(eps);
        const auto var = rhs_variational(State(u, v, Field::Zero(40), Field::Constant(40, p.f)), p, g);
        const double d = std::max((var.u - cl.du_dt).cwiseAbs().maxCoeff(), (var.v - cl.dv_dt).cwiseAbs().maxCoeff());
        if (prev > 0) CHECK(prev / d == doctest::Approx(100.0).epsilon(0.01));
        prev = d;
    }
}

TEST_CASE("free energy") {
    const Grid g(10, 1.0);
    CHECK(free_energy(State::uniform(g, 1, 0, 0, 0), kinetics(), g) == doctest::Approx(-1.0).epsilon(1e-14));

    const State s2 = State::uniform(g, u2[0], u2[1], u2[2], u2[3]);
    CHECK(free_energy(s2, kinetics(), g) == doctest::Approx(-37.56057692236704).epsilon(1e-12));

    const Grid twice(10, 2.0);
    CHECK(free_energy(State::uniform(twice, u2[0], u2[1], u2[2], u2[3]), kinetics(), twice) ==
          doctest::Approx(2 * free_energy(s2, kinetics(), g)).epsilon(1e-14));

    State neg = State::uniform(g, 1, 0, 0, 0);
    neg.v[4] = -1e-3;
    CHECK_THROWS_AS(free_energy(neg, kinetics(), g), DomainError);
}

TEST_CASE("entropy density is convex with curvature 1/c") {
    for (double c : {1e-6, 1e-3, 0.5, 3.0, 400.0}) {
        const double h = 1e-4 * c;
        const double d2 = (detail::entropy_density(c + h, 0.7) - 2 * detail::entropy_density(c, 0.7) +
                           detail::entropy_density(c - h, 0.7)) /
                          (h * h);
        CHECK(d2 == doctest::Approx(1 / c).epsilon(1e-4));
    }
    CHECK(detail::entropy_density(0.0, 3.0) == 0.0);
}

TEST_CASE("chemical potentials") {
    const Grid g(6, 1.0);
    const auto mu = chemical_potentials(State::uniform(g, u2[0], u2[1], u2[2], u2[3]), kinetics());
    CHECK(std::abs(mu.mu_v[0] - mu.mu_u[0]) <= 1e-12);
    CHECK(std::abs(mu.mu_p[0] - mu.mu_v[0]) <= 1e-12);
    CHECK(std::abs(mu.mu_ytilde[0] - mu.mu_u[0]) <= 1e-12);

    const auto one = chemical_potentials(State::uniform(g, 1, 0.5, 0.5, 0.001), kinetics());
    CHECK(one.mu_u.cwiseAbs().maxCoeff() == 0.0);

    const auto zero = chemical_potentials(State::uniform(g, 1, 0, 0, 0.04), kinetics());
    CHECK(std::isinf(zero.mu_v[0]));
    CHECK(zero.mu_v[0] < 0);
}

TEST_CASE("affinity sign follows the net rate of the autocatalytic step") {
    const Grid g(30, 1.0);
    std::mt19937_64 rng(23);
    const Params p = kinetics();
    int checked = 0;
    for (int t = 0; t < 20; ++t) {
        const State s = random_positive(g, rng, p.eps);
        const auto r = reaction_rates(s, p);
        const auto mu = chemical_potentials(s, p);
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            if (r.r1[i] > 0) {
                CHECK(mu.mu_v[i] - mu.mu_u[i] < 0);
                // ln(r1 / (eps v^3) + 1) = -(mu_v - mu_u)
                CHECK(std::log(r.r1[i] / (p.eps * std::pow(s.v[i], 3)) + 1) ==
                      doctest::Approx(-(mu.mu_v[i] - mu.mu_u[i])).epsilon(1e-10));
                ++checked;
            } else if (r.r1[i] < 0) {
                CHECK(mu.mu_v[i] - mu.mu_u[i] > 0);
            }
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("total mass") {
    const Grid g(20, 1.0);
    CHECK(total_mass(State::uniform(g, 1, 0, 1, 0.04), kinetics(), g) == doctest::Approx(6.0).epsilon(1e-14));
    CHECK(total_mass(State::uniform(g, 1, 0, 1, 0.04), kinetics(1e-4), g) == doctest::Approx(402.0).epsilon(1e-14));
    const Grid g3(20, 3.0);
    CHECK(total_mass(State::uniform(g3, 0.2, 0.3, 0.4, 0.005), kinetics(), g3) ==
          doctest::Approx((0.2 + 0.3 + 0.4 + 0.5) * 3).epsilon(1e-14));
}

TEST_CASE("params validation") {
    Params p = kinetics();
    p.du = 0;
    CHECK_THROWS_AS(p.validate(), ContractViolation);
    CHECK_THROWS_AS(kinetics(0.0).require_variational(), ContractViolation);
    CHECK_NOTHROW(kinetics(0.0).validate());
}

}
