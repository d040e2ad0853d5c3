#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nlf/solver.hpp"

using namespace nlf;

namespace {

struct lab {
    grid g;
    radial_kernel k;
    nonlocal_operator op;
    bistable f = bistable::cubic(0.3);
};

lab make_lab_2d(double a, double b, double h, obstacle obs = {}) {
    domain d;
    d.xlim = {a, b};
    d.ylim = {a, b};
    d.h = h;
    d.dim = 2;
    d.obs = std::move(obs);
    grid g = grid::build(d);
    auto k = radial_kernel::normalize(kernel_profile::gaussian, 1.0, 2);
    cell_metric cm(g, d.obs, {metric_kind::euclidean}, 1.0, 2);
    auto op = nonlocal_operator::assemble(g, k, cm, 2);
    return {std::move(g), k, std::move(op)};
}

lab make_lab_1d(double a, double b, double h) {
    domain d;
    d.xlim = {a, b};
    d.h = h;
    d.dim = 1;
    grid g = grid::build(d);
    auto k = radial_kernel::normalize(kernel_profile::gaussian, 1.0, 1);
    cell_metric cm(g, d.obs, {metric_kind::euclidean}, 1.0, 2);
    auto op = nonlocal_operator::assemble(g, k, cm, 2);
    return {std::move(g), k, std::move(op)};
}

double theta_level_x(const grid& g, const std::vector<double>& u, double theta) {
    // interpolated crossing along the y = const row closest to 0
    double prev_x = 0.0, prev_u = -1.0;
    for (int i = 0; i < g.n(); ++i) {
        const vec2 c = g.center(i);
        if (g.dim() == 2 && std::abs(c.y) > g.h()) continue;
        if (prev_u >= 0.0 && prev_u < theta && u[i] >= theta)
            return prev_x + (theta - prev_u) / (u[i] - prev_u) * (c.x - prev_x);
        prev_x = c.x;
        prev_u = u[i];
    }
    return std::nan("");
}

}  // namespace

TEST_CASE("equilibria 0, theta, 1 are exact fixed points of both schemes") {
    auto L = make_lab_2d(-2, 2, 0.25, make_disk_obstacle({0, 0}, 0.6, 0.1));
    for (double level : {0.0, 0.3, 1.0}) {
        for (auto sk : {scheme_kind::explicit_euler, scheme_kind::imex_euler}) {
            scheme_config cfg;
            cfg.scheme = sk;
            cfg.dt = 0.1;
            cfg.threads = 2;
            cauchy_state s{0.0, std::vector<double>(L.g.n(), level)};
            const auto next = step(L.op, L.f, s, cfg);
            for (double v : next.u) CHECK(v == level);
        }
    }
}

TEST_CASE("one explicit step matches the 3-cell hand calculation") {
    domain d;
    d.xlim = {0, 3};
    d.h = 1.0;
    d.dim = 1;
    grid g = grid::build(d);
    REQUIRE(g.n() == 3);
    auto k = radial_kernel::normalize(kernel_profile::uniform, 1.0, 1);  // J = 1/2 on [0,1]
    cell_metric cm(g, d.obs, {metric_kind::euclidean}, 1.0, 1);
    auto op = nonlocal_operator::assemble(g, k, cm, 1);
    // weights: adjacent pairs at distance 1 get h * J(1) = 1/2
    CHECK(op.weight(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(op.weight(0, 2) == 0.0);

    scheme_config cfg;
    cfg.scheme = scheme_kind::explicit_euler;
    cfg.dt = 0.2;
    cauchy_state s{0.0, {1.0, 0.0, 0.0}};
    const auto next = step(op, bistable::cubic(0.3), s, cfg);
    // u0' = 0.5 (0 - 1) = -0.5, f(1) = 0          -> 1 - 0.2 * 0.5  = 0.9
    // u1' = 0.5 (1 - 0) + 0.5 (0 - 0) = 0.5, f(0)=0 -> 0 + 0.2 * 0.5 = 0.1
    CHECK(next.u[0] == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(next.u[1] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(next.u[2] == 0.0);
}

TEST_CASE("states stay in [0,1] under both schemes") {
    auto L = make_lab_2d(-3, 3, 0.25, make_disk_obstacle({0, 0}, 0.8, 0.1));
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<double> u0(L.g.n());
    for (auto& v : u0) v = U(rng);
    for (auto sk : {scheme_kind::explicit_euler, scheme_kind::imex_euler}) {
        scheme_config cfg;
        cfg.scheme = sk;
        cfg.dt = sk == scheme_kind::explicit_euler ? 0.25 : 0.5;
        cfg.threads = 2;
        const auto traj = run(L.op, L.f, u0, 0.0, 10.0, {5.0, 10.0}, cfg, validate(L.f, 0.3).omega);
        CHECK(traj.min_u >= -1e-12);
        CHECK(traj.max_u <= 1.0 + 1e-12);
        for (const auto& s : traj.snapshots)
            for (double v : s.u) {
                CHECK(v >= -1e-12);
                CHECK(v <= 1.0 + 1e-12);
            }
    }
}

TEST_CASE("discrete comparison principle on random ordered pairs") {
    auto L = make_lab_2d(-2, 2, 0.25, make_disk_obstacle({0.2, -0.3}, 0.5, 0.1));
    const int n = L.g.n();
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    scheme_config cfg;
    cfg.scheme = scheme_kind::explicit_euler;
    cfg.dt = 0.25;
    cfg.threads = 2;
    for (int pair = 0; pair < 10; ++pair) {
        cauchy_state lo{0.0, std::vector<double>(n)}, hi{0.0, std::vector<double>(n)};
        for (int i = 0; i < n; ++i) {
            const double a = U(rng), b = U(rng);
            lo.u[i] = std::min(a, b);
            hi.u[i] = std::max(a, b);
        }
        for (int s = 0; s < 200; ++s) {
            lo = step(L.op, L.f, lo, cfg);
            hi = step(L.op, L.f, hi, cfg);
        }
        for (int i = 0; i < n; ++i) CHECK(hi.u[i] - lo.u[i] >= -1e-12);
    }
}

TEST_CASE("planar wave data: premise and monotone evolution, speed recovery") {
    auto L = make_lab_1d(-10, 10, 0.08);
    const auto p = solve_profile(L.k, L.f);

    auto u0 = planar_wave_initial(L.g, p, 0.0);
    for (double v : u0) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
    // premise of the monotonicity lemma: L u0 + f(u0) >= 0 (up to quadrature)
    const auto lu = L.op.apply(u0, 2);
    double premise = 1e300;
    for (int i = 0; i < L.g.n(); ++i) premise = std::min(premise, lu[i] + L.f.eval(u0[i]));
    REQUIRE(premise >= -1e-8);

    scheme_config cfg;
    cfg.scheme = scheme_kind::explicit_euler;
    cfg.dt = 0.2;
    cfg.threads = 2;
    cauchy_state s{0.0, u0};
    double worst_decrement = 0.0;
    for (int k = 0; k < 50; ++k) {
        const auto next = step(L.op, L.f, s, cfg);
        for (int i = 0; i < L.g.n(); ++i)
            worst_decrement = std::min(worst_decrement, next.u[i] - s.u[i]);
        s = next;
    }
    CHECK(worst_decrement >= -1e-8);

    // one time unit of evolution moves the theta level by -c, within 5%
    const double x_start = theta_level_x(L.g, u0, L.f.theta());
    const double x_end = theta_level_x(L.g, s.u, L.f.theta());
    const double c_est = -(x_end - x_start) / s.t;
    CHECK(std::abs(c_est - p.c) <= 0.05 * p.c);
}

TEST_CASE("explicit and imex agree to first order in dt") {
    auto L = make_lab_2d(-2, 2, 0.25);
    const auto u0 = heaviside_initial(L.g, 0.0, 0.5);
    auto solve_to_1 = [&](scheme_kind sk, double dt) {
        scheme_config cfg;
        cfg.scheme = sk;
        cfg.dt = dt;
        cfg.threads = 2;
        cauchy_state s{0.0, u0};
        const int steps = static_cast<int>(std::lround(1.0 / dt));
        for (int k = 0; k < steps; ++k) s = step(L.op, L.f, s, cfg);
        return s.u;
    };
    double gap[2];
    double dt = 0.2;
    for (int lvl = 0; lvl < 2; ++lvl, dt /= 2.0) {
        const auto a = solve_to_1(scheme_kind::explicit_euler, dt);
        const auto b = solve_to_1(scheme_kind::imex_euler, dt);
        double g = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) g = std::max(g, std::abs(a[i] - b[i]));
        gap[lvl] = g;
    }
    CHECK(gap[1] <= gap[0] / 2.0 * 1.5);
}

TEST_CASE("heaviside builder honors the width contract") {
    auto L = make_lab_2d(-2, 2, 0.5);
    const auto sharp = heaviside_initial(L.g, 0.1, 0.0);
    for (double v : sharp) CHECK((v == 0.0 || v == 1.0));
    const auto smooth = heaviside_initial(L.g, 0.1, 1.0);
    for (double v : smooth) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("cfl guard rejects oversized explicit steps") {
    auto L = make_lab_2d(-2, 2, 0.5);
    scheme_config cfg;
    cfg.scheme = scheme_kind::explicit_euler;
    cfg.dt = 2.0;
    cauchy_state s{0.0, std::vector<double>(L.g.n(), 0.5)};
    CHECK_THROWS_AS(step(L.op, L.f, s, cfg), cfl_violation_error);
}

TEST_CASE("snapshots are recorded at the requested times") {
    auto L = make_lab_2d(-2, 2, 0.5);
    const auto u0 = heaviside_initial(L.g, 0.0, 1.0);
    scheme_config cfg;
    cfg.scheme = scheme_kind::imex_euler;
    cfg.dt = 0.1;
    cfg.threads = 2;
    const auto traj = run(L.op, L.f, u0, 0.0, 2.0, {0.0, 1.0, 2.0}, cfg, 3.0);
    REQUIRE(traj.snapshots.size() == 3);
    CHECK(traj.snapshots[0].t == doctest::Approx(0.0));
    CHECK(traj.snapshots[1].t == doctest::Approx(1.0).epsilon(0.06));
    CHECK(traj.snapshots[2].t == doctest::Approx(2.0).epsilon(0.06));
}
