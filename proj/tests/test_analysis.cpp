#include <doctest.h>

#include <cmath>
#include <random>

#include "vgs/analysis.hpp"

using namespace vgs;

namespace {
const double pi = std::acos(-1.0);

Params kinetics(double eps = 1e-2) {
    Params p;
    p.eps = eps;
    return p;
}

std::vector<Record> amplitude_records(const std::vector<double>& t, const std::vector<double>& amp) {
    std::vector<Record> r(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        r[i].t = t[i];
        r[i].amp_u = amp[i];
        r[i].amp_v = 0.5 * amp[i];
    }
    return r;
}

std::vector<Snapshot> translating(const Grid& g, double speed, const std::vector<double>& times) {
    std::vector<Snapshot> out;
    for (double t : times) {
        State s = State::uniform(g, 1, 0, 0, 0);
        for (Eigen::Index i = 0; i < s.size(); ++i)
            s.u[i] = 1 - 0.5 * std::exp(-std::pow(g.center(i) - 0.2 - speed * t, 2) / 0.01);
        out.push_back({t, s});
    }
    return out;
}
}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("pattern amplitude") {
    const Grid g(200, 1.0);
    CHECK(pattern_amplitude(State::uniform(g, 0.3, 0.2, 1, 1)) == 0.0);
    Field u(200);
    for (int i = 0; i < 200; ++i) u[i] = std::cos(pi * g.center(i));
    const Field v = Field::Zero(200);
    CHECK(pattern_amplitude(u, v) == doctest::Approx(2 * std::cos(pi * g.dx() / 2)).epsilon(1e-14));
    CHECK(pattern_amplitude(u, v) == doctest::Approx(1.9999383).epsilon(1e-7));
    CHECK(pattern_amplitude(Field(u.array() + 3.0), Field(v.array() + 1.0)) ==
          doctest::Approx(pattern_amplitude(u, v)).epsilon(1e-14));
}

TEST_CASE("persistence time") {
    CHECK(persistence_time(amplitude_records({0, 1, 2}, {0.04, 0.3, 0.3})).t_persist == 0.0);

    std::vector<double> t, a;
    for (int i = 0; i <= 100; ++i) {
        t.push_back(0.1 * i);
        a.push_back(std::exp(-0.1 * i));
    }
    const auto r = persistence_time(amplitude_records(t, a), 0.05);
    CHECK_FALSE(r.censored);
    CHECK(r.t_persist == doctest::Approx(3.0));
    CHECK(a[r.record_index] <= 0.05);
    CHECK(a[r.record_index - 1] > 0.05);

    std::vector<double> tc, ac;
    for (int i = 0; i <= 100; ++i) {
        tc.push_back(i);
        ac.push_back(0.2);
    }
    const auto c = persistence_time(amplitude_records(tc, ac));
    CHECK(c.censored);
    CHECK(c.t_persist == 100.0);
    CHECK_THROWS_AS(persistence_time(std::vector<Record>{}), ContractViolation);
}

TEST_CASE("persistence time is monotone in the threshold") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(0, 1);
    std::vector<double> t, a;
    double level = 1;
    for (int i = 0; i < 300; ++i) {
        t.push_back(i);
        level *= 0.97 + 0.05 * U(rng);
        a.push_back(level);
    }
    const auto recs = amplitude_records(t, a);
    double prev = std::numeric_limits<double>::infinity();
    for (double th : {0.001, 0.01, 0.03, 0.05, 0.1, 0.3}) {
        const double T = persistence_time(recs, th).t_persist;
        CHECK(T <= prev);
        prev = T;
    }
}

TEST_CASE("landscape at the interior state") {
    const Params p = kinetics();
    const auto [b, i] = uniform_steady_states(p, 6.0, 1.0);
    for (const auto& dir : {Direction::s1(), Direction::s2(p), Direction::s3()}) {
        const auto d = directional_derivatives(i, dir, 0.0, p);
        CHECK(std::abs(d.dE) <= 1e-10);
        CHECK(d.d2E > 0);
    }
    const auto s1 = directional_derivatives(i, Direction::s1(), 0.0, p);
    CHECK(s1.d2E == doctest::Approx(1 / i.p + 1 / i.v).epsilon(1e-14));
    CHECK(std::abs(s1.d2E - 2.10826) <= 1e-4);
}

TEST_CASE("landscape at the boundary state") {
    const Params p = kinetics();
    const auto [b, i] = uniform_steady_states(p, 6.0, 1.0);
    const auto s2 = directional_derivatives(b, Direction::s2(p), 0.0, p);
    CHECK(std::abs(s2.dE) <= 1e-10);
    CHECK(std::abs(s2.d2E - 1.041667) <= 1e-6);
    const auto esc = directional_derivatives(b, Direction::s3(), 1e-8, p);
    CHECK(esc.dE <= -20);
    CHECK(esc.dE == doctest::Approx(std::log(1e-8) + std::log(p.eps) - std::log(1.2 - 1e-8)).epsilon(1e-12));
}

TEST_CASE("mixed direction slope at the boundary state vanishes with eps") {
    const Grid g(8, 1.0);
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        const Params p = kinetics(eps);
        const double C = mass_constant(State::uniform(g, 1, 0, 1, p.f), p, g);
        const auto b = uniform_steady_states(p, C, 1.0).first;
        // V -> P leak from a state with no V or P: evaluate just inside the feasible set
        const double mag = std::abs(directional_derivatives(b, Direction::mixed(p), 1e-8, p).dE);
        CHECK(mag < prev);
        prev = mag;
    }
}

TEST_CASE("analytic slope matches finite differences of the sampled energy") {
    const Params p = kinetics();
    const auto [b, i] = uniform_steady_states(p, 6.0, 1.0);
    struct Case {
        UniformSteadyState base;
        Direction dir;
        double lo, hi;
    };
    const std::vector<Case> cases{{i, Direction::s1(), -5.0, 0.5},
                                  {i, Direction::s2(p), -0.02, 0.005},
                                  {i, Direction::s3(), -0.5, 0.005},
                                  {b, Direction::s2(p), -1.0, 1.1},
                                  {b, Direction::s3(), 0.01, 1.1}};
    for (const auto& c : cases) {
        for (int k = 1; k < 10; ++k) {
            const double d0 = c.lo + (c.hi - c.lo) * k / 10.0;
            const double h = 1e-4 * (c.hi - c.lo);
            const auto sc = landscape_scan(c.base, c.dir, std::vector<double>{d0 - h, d0, d0 + h}, p);
            REQUIRE(sc.feasible[0]);
            REQUIRE(sc.feasible[2]);
            const double fd = (sc.energies[2] - sc.energies[0]) / (2 * h);
            CHECK(std::abs(fd - sc.first_derivs[1]) <= 1e-4 * std::max(std::abs(sc.first_derivs[1]), 1e-3));
        }
    }
}

TEST_CASE("interior s3 curvature changes sign across delta = u") {
    for (double eps : {1e-2, 1e-3}) {
        const Params p = kinetics(eps);
        const Grid g(8, 1.0);
        const double C = mass_constant(State::uniform(g, 1, 0, 1, p.f), p, g);
        const auto i = uniform_steady_states(p, C, 1.0).second;
        const double at = i.u;
        CHECK(directional_derivatives(i, Direction::s3(), at * (1 - 1e-6), p).d2E > 0);
        CHECK(directional_derivatives(i, Direction::s3(), at * (1 + 1e-6), p).d2E < 0);
        CHECK(at == doctest::Approx(eps * C / i.lambda));
    }
}

TEST_CASE("landscape scan flags infeasible samples and rejects a zero direction") {
    const Params p = kinetics();
    const auto i = uniform_steady_states(p, 6.0, 1.0).second;
    const auto sc = landscape_scan(i, Direction::s3(), -1.0, 1.0, 41, p);
    bool any_bad = false, any_good = false;
    for (std::size_t k = 0; k < sc.deltas.size(); ++k) {
        if (sc.feasible[k]) {
            any_good = true;
            CHECK(std::isfinite(sc.energies[k]));
        } else {
            any_bad = true;
            CHECK(std::isnan(sc.energies[k]));
        }
    }
    CHECK(any_bad);
    CHECK(any_good);
    CHECK_THROWS_AS(landscape_scan(i, Direction{{0, 0, 0, 0}, "none"}, -1.0, 1.0, 11, p), ContractViolation);
}

TEST_CASE("scan deltas cluster near zero") {
    const auto d = scan_deltas(-1, 1, 201);
    CHECK(std::is_sorted(d.begin(), d.end()));
    CHECK(d.front() == -1.0);
    CHECK(d.back() == 1.0);
    CHECK(std::find(d.begin(), d.end(), 0.0) != d.end());
    CHECK(std::count_if(d.begin(), d.end(), [](double x) { return std::abs(x) < 1e-3 && x != 0; }) >= 20);
    CHECK_THROWS_AS(scan_deltas(1, -1, 10), ContractViolation);
}

TEST_CASE("damped oscillation detection") {
    std::vector<double> t, y;
    for (int i = 0; i <= 2500; ++i) {
        t.push_back(0.01 * i);
        y.push_back(std::exp(-0.1 * t.back()) * std::sin(t.back()) + 2);
    }
    const auto rep = detect_oscillations(t, y);
    REQUIRE(rep.peaks.size() >= 3);
    CHECK(rep.oscillating);
    CHECK(rep.damped);
    for (std::size_t k = 0; k < rep.peaks.size(); ++k) CHECK(rep.peaks[k].t == doctest::Approx(1.4711 + 2 * pi * k).epsilon(1e-2));
    for (double r : rep.ratios) CHECK(std::abs(r - std::exp(-0.2 * pi)) <= 0.02);

    std::vector<double> mono, flat;
    for (double x : t) mono.push_back(x * x), flat.push_back(3.0);
    CHECK_FALSE(detect_oscillations(t, mono).oscillating);
    CHECK_FALSE(detect_oscillations(t, flat).oscillating);
    CHECK(detect_oscillations(t, flat).peaks.empty());
    CHECK_THROWS_AS(detect_oscillations({0.0, 1.0}, {1.0, 2.0}), ContractViolation);
}

TEST_CASE("growing oscillation is not damped") {
    std::vector<double> t, y;
    for (int i = 0; i <= 2000; ++i) {
        t.push_back(0.01 * i);
        y.push_back(std::exp(0.05 * t.back()) * std::sin(t.back()));
    }
    const auto rep = detect_oscillations(t, y);
    CHECK(rep.oscillating);
    CHECK_FALSE(rep.damped);
}

TEST_CASE("front tracking") {
    const Grid g(201, 1.0);
    const auto moving = track_front(translating(g, 0.1, {0, 1, 2, 3}), g);
    CHECK(std::abs(moving.speed - 0.1) <= 0.002);
    CHECK(moving.locations[0] == doctest::Approx(0.2).epsilon(1e-3));

    const auto still = track_front(translating(g, 0.0, {0, 1, 2, 3}), g);
    CHECK(std::abs(still.speed) <= 1e-6);

    auto mirrored = translating(g, 0.1, {0, 1, 2, 3});
    for (auto& s : mirrored) s.state = s.state.mirrored();
    CHECK(track_front(mirrored, g).speed == doctest::Approx(-moving.speed).epsilon(1e-9));

    std::vector<Snapshot> edge;
    for (double t : {0.0, 1.0}) {
        State s = State::uniform(g, 1, 0, 0, 0);
        for (Eigen::Index i = 0; i < s.size(); ++i) s.u[i] = g.center(i);
        edge.push_back({t, s});
    }
    const auto fe = track_front(edge, g);
    CHECK(fe.at_boundary[0]);
    CHECK(fe.locations[0] == g.center(0));
    CHECK_THROWS_AS(track_front(std::vector<Snapshot>(1, edge[0]), g), ContractViolation);
}

TEST_CASE("scaling fit") {
    std::vector<ScalingPoint> exact;
    for (double e : {1e-2, 1e-3, 1e-4}) exact.push_back({e, 7 / e});
    const auto f = fit_scaling(exact);
    CHECK(std::abs(f.slope + 1) <= 1e-12);
    CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(std::log(7.0)).epsilon(1e-10));

    const double noise[] = {1.01, 0.99, 1.01};
    std::vector<ScalingPoint> noisy;
    int k = 0;
    for (double e : {1e-2, 1e-3, 1e-4}) noisy.push_back({e, 7 / e * noise[k++]});
    const auto fn = fit_scaling(noisy);
    CHECK(fn.slope >= -1.02);
    CHECK(fn.slope <= -0.98);

    CHECK_THROWS_AS(fit_scaling({{1e-2, 700}, {1e-3, 7000}}), InsufficientData);
    auto with_censored = exact;
    with_censored.push_back({1e-5, 1e5, true});
    const auto fc = fit_scaling(with_censored);
    CHECK(fc.used == 3);
    CHECK(fc.excluded == 1);
}

}
