#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nlf/geometry.hpp"

using namespace nlf;

namespace {

domain box2d(double a, double b, double h, obstacle obs = {}) {
    domain d;
    d.xlim = {a, b};
    d.ylim = {a, b};
    d.h = h;
    d.dim = 2;
    d.obs = std::move(obs);
    return d;
}

// dense-sampling visibility oracle
bool visible_by_sampling(vec2 p, vec2 q, const obstacle& obs, double step) {
    const double len = dist(p, q);
    const int n = std::max(2, static_cast<int>(len / step));
    for (int k = 1; k < n; ++k) {
        const double t = static_cast<double>(k) / n;
        if (obs.contains_interior(p + t * (q - p))) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("grid: empty box is the full lattice") {
    const grid g = grid::build(box2d(-2, 2, 1.0));
    CHECK(g.n() == 16);
    CHECK(g.cell_area() * g.n() == doctest::Approx(16.0));
}

TEST_CASE("grid: disk obstacle removes exactly the covered centers") {
    const obstacle obs = make_disk_obstacle({0, 0}, 1.0, 0.25);
    const grid g = grid::build(box2d(-2, 2, 0.5, obs));
    // brute-force membership scan over the same lattice
    int expect = 0;
    for (int iy = 0; iy < 8; ++iy) {
        for (int ix = 0; ix < 8; ++ix) {
            const double x = -2 + (ix + 0.5) * 0.5;
            const double y = -2 + (iy + 0.5) * 0.5;
            if (std::hypot(x, y) > 1.0) ++expect;
        }
    }
    CHECK(g.n() == expect);
    for (int i = 0; i < g.n(); ++i) CHECK(norm(g.center(i)) > 1.0);
}

TEST_CASE("grid: enclosed pocket is rejected as disconnected") {
    const obstacle ring = make_annulus_channel(1.0, 1.8, 0.0, 0.0, 0.2);
    CHECK_THROWS_AS(grid::build(box2d(-3, 3, 0.25, ring)), disconnected_domain_error);
    const grid g = grid::build_unchecked(box2d(-3, 3, 0.25, ring));
    CHECK(g.components() == 2);
}

TEST_CASE("grid: neighbor queries match brute force") {
    const obstacle obs = make_disk_obstacle({0.2, -0.1}, 0.8, 0.1);
    const grid g = grid::build(box2d(-2, 2, 0.25, obs));
    const double R = 0.7;
    for (int i = 0; i < g.n(); i += 7) {
        auto got = g.neighbors_within(i, R);
        std::vector<int> expect;
        for (int j = 0; j < g.n(); ++j)
            if (dist(g.center(i), g.center(j)) <= R) expect.push_back(j);
        CHECK(got == expect);
    }
}

TEST_CASE("visible: unit disk cases") {
    const obstacle obs = make_disk_obstacle({0, 0}, 1.0, 0.05);
    CHECK(visible({0, 2}, {1, 2}, obs));
    CHECK_FALSE(visible({-2, 0}, {2, 0}, obs));
    // near-tangent segment agrees with the dense-sampling oracle
    const vec2 p{-2, 0}, q{0, 1.0000001};
    CHECK(visible(p, q, obs) == visible_by_sampling(p, q, obs, 1e-4));
}

TEST_CASE("obstacle construction rejects bad parts") {
    convex_polygon two;
    two.v = {{0, 0}, {1, 0}};
    CHECK_THROWS_AS(obstacle({two}, 0.1), validation_error);
    convex_polygon clockwise;
    clockwise.v = {{0, 0}, {0, 1}, {1, 1}, {1, 0}};
    CHECK_THROWS_AS(obstacle({clockwise}, 0.1), validation_error);
    convex_polygon dented;
    dented.v = {{0, 0}, {2, 0}, {1, 0.2}, {1, 2}};
    CHECK_THROWS_AS(obstacle({dented}, 0.1), validation_error);
    CHECK_THROWS_AS(obstacle({disk{{0, 0}, -1.0}}, 0.1), validation_error);
}

TEST_CASE("visible: polygon blocking") {
    convex_polygon sq;
    sq.v = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    const obstacle obs({sq}, 0.25);
    CHECK_FALSE(visible({-2, 0}, {2, 0}, obs));
    CHECK(visible({-2, 1.5}, {2, 1.5}, obs));
    // running exactly along an edge does not count as blocked
    CHECK(visible({-2, 1.0}, {2, 1.0}, obs));
}

TEST_CASE("geodesic: visible pair gives the euclidean length") {
    const obstacle obs = make_disk_obstacle({0, 0}, 1.0, 0.02);
    const auto d = geodesic_distance({0, 2}, {1, 2}, obs);
    REQUIRE(d.has_value());
    CHECK(*d == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("geodesic: antipodal pair around the unit disk") {
    // analytic: two tangents of length sqrt(3) plus the wrapped arc of pi/3
    const double exact = 2.0 * std::sqrt(3.0) + std::numbers::pi / 3.0;
    const obstacle obs = make_disk_obstacle({0, 0}, 1.0, 0.02);
    const auto d = geodesic_distance({-2, 0}, {2, 0}, obs);
    REQUIRE(d.has_value());
    CHECK(*d == doctest::Approx(exact).epsilon(0.01));

    // polygonization convergence: refine the boundary step, error must drop
    double prev_err = -1.0;
    for (double step : {0.08, 0.04, 0.02}) {
        const obstacle o = make_disk_obstacle({0, 0}, 1.0, step);
        const auto dd = geodesic_distance({-2, 0}, {2, 0}, o);
        REQUIRE(dd.has_value());
        const double err = std::abs(*dd - exact);
        if (prev_err >= 0.0) CHECK(err <= 0.6 * prev_err);
        prev_err = err;
    }
}

TEST_CASE("geodesic: closed ring separates inside from outside") {
    const obstacle ring = make_annulus_channel(1.0, 1.8, 0.0, 0.0, 0.1);
    const auto d = geodesic_distance({0, 0}, {2.5, 0}, ring);
    CHECK_FALSE(d.has_value());
}

TEST_CASE("geodesic: endpoint inside obstacle is rejected") {
    const obstacle obs = make_disk_obstacle({0, 0}, 1.0, 0.05);
    CHECK_THROWS_AS(geodesic_distance({0, 0}, {2, 0}, obs), point_inside_obstacle_error);
}

TEST_CASE("metric dispatch: mix is the affine combination") {
    const obstacle obs = make_disk_obstacle({0, 0}, 1.0, 0.02);
    const vec2 p{-2, 0}, q{2, 0};
    const double geo = *metric_distance({metric_kind::geodesic}, p, q, obs);
    const double eu = *metric_distance({metric_kind::euclidean}, p, q, obs);
    CHECK(eu == doctest::Approx(4.0));
    const double mixed = *metric_distance({metric_kind::mix, 0.5}, p, q, obs);
    CHECK(mixed == doctest::Approx(0.5 * (geo + eu)).epsilon(1e-12));
    CHECK(*metric_distance({metric_kind::mix, 0.0}, p, q, obs) == doctest::Approx(4.0));
    const double exact = 2.0 * std::sqrt(3.0) + std::numbers::pi / 3.0;
    CHECK(geo == doctest::Approx(exact).epsilon(0.01));
    CHECK(0.5 * (geo + eu) == doctest::Approx((4.0 + exact) / 2).epsilon(0.01));
}

TEST_CASE("metric axioms on sampled pairs and triples") {
    const obstacle obs = make_disk_obstacle({0, 0}, 1.0, 0.05);
    const geodesic_engine eng(obs);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    auto sample_point = [&] {
        while (true) {
            vec2 p{U(rng), U(rng)};
            if (!obs.contains(p)) return p;
        }
    };
    std::vector<vec2> pts;
    for (int k = 0; k < 40; ++k) pts.push_back(sample_point());
    for (std::size_t a = 0; a < pts.size(); ++a) {
        CHECK(*eng.distance(pts[a], pts[a]) == 0.0);
        for (std::size_t b = a + 1; b < pts.size(); ++b) {
            const double dab = *eng.distance(pts[a], pts[b]);
            const double dba = *eng.distance(pts[b], pts[a]);
            CHECK(dab == doctest::Approx(dba).epsilon(1e-9));
            CHECK(dab >= dist(pts[a], pts[b]) - 1e-9);
            if (obs.segment_clear(pts[a], pts[b]))
                CHECK(dab == doctest::Approx(dist(pts[a], pts[b])).epsilon(1e-12));
        }
    }
    // triangle inequality on a subsample
    for (std::size_t a = 0; a < 12; ++a)
        for (std::size_t b = 0; b < 12; ++b)
            for (std::size_t c = 0; c < 12; ++c) {
                const double ab = *eng.distance(pts[a], pts[b]);
                const double bc = *eng.distance(pts[b], pts[c]);
                const double ac = *eng.distance(pts[a], pts[c]);
                CHECK(ac <= ab + bc + 1e-9);
            }
}

TEST_CASE("quasi-euclidean sandwich on random pairs") {
    const obstacle obs = make_disk_obstacle({0.3, -0.4}, 1.2, 0.05);
    const geodesic_engine eng(obs);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(-4.0, 4.0);
    int checked = 0;
    while (checked < 10000) {
        const vec2 p{U(rng), U(rng)}, q{U(rng), U(rng)};
        if (obs.contains(p) || obs.contains(q)) continue;
        ++checked;
        const auto d = eng.distance(p, q);
        REQUIRE(d.has_value());
        CHECK(*d >= dist(p, q) - 1e-9);
        if (obs.segment_clear(p, q)) CHECK(*d == doctest::Approx(dist(p, q)).epsilon(1e-12));
    }
}

TEST_CASE("geodesic monotone under obstacle shrinking") {
    const vec2 p{-2, 0}, q{2, 0};
    const double big = *geodesic_distance(p, q, make_disk_obstacle({0, 0}, 1.0, 0.02));
    const double small = *geodesic_distance(p, q, make_disk_obstacle({0, 0}, 0.5, 0.02));
    CHECK(small <= big + 1e-12);
}

TEST_CASE("cell metric: euclidean jumps across walls, geodesic does not") {
    // thin wall between x in [-0.2, 0.2], tall enough to force a long detour
    convex_polygon wall;
    wall.v = {{-0.2, -3.2}, {0.2, -3.2}, {0.2, 3.2}, {-0.2, 3.2}};
    domain d = box2d(-2, 2, 0.5, obstacle({wall}, 0.1));
    d.ylim = {-2, 2};
    const grid g = grid::build_unchecked(d);
    const double R = 1.0;
    const cell_metric eu(g, d.obs, {metric_kind::euclidean}, R, 2);
    const cell_metric geo(g, d.obs, {metric_kind::geodesic}, R, 2);
    // cells straddling the wall at the same height
    int left = -1, right = -1;
    for (int i = 0; i < g.n(); ++i) {
        const vec2 c = g.center(i);
        if (c.x == -0.25 && c.y == 0.25) left = i;
        if (c.x == 0.25 && c.y == 0.25) right = i;
    }
    REQUIRE(left >= 0);
    REQUIRE(right >= 0);
    CHECK(eu.delta(left, right).has_value());       // jump through the wall
    CHECK_FALSE(geo.delta(left, right).has_value());  // detour exceeds range
    // symmetry is bitwise
    for (int i = 0; i < g.n(); i += 5) {
        for (const auto& [j, dv] : geo.in_range(i)) {
            const auto back = geo.delta(j, i);
            REQUIRE(back.has_value());
            CHECK(*back == dv);
        }
    }
}

TEST_CASE("j-covering: euclidean on a connected grid covers everything") {
    const obstacle obs = make_disk_obstacle({0, 0}, 1.0, 0.1);
    const grid g = grid::build(box2d(-3, 3, 0.25, obs));
    const cell_metric cm(g, obs, {metric_kind::euclidean}, 1.0, 2);
    const auto rep = check_j_covering(cm, [](double r) { return r <= 1.0; }, 0, 200);
    CHECK(rep.covered_fraction == 1.0);
    CHECK(rep.rounds_used < 200);
}

TEST_CASE("j-covering: convex smooth obstacle with geodesic metric covers everything") {
    const obstacle obs = make_disk_obstacle({0, 0}, 1.0, 0.1);
    const grid g = grid::build(box2d(-3, 3, 0.25, obs));
    const cell_metric cm(g, obs, {metric_kind::geodesic}, 1.0, 2);
    const auto rep = check_j_covering(cm, [](double r) { return r <= 1.0; }, 0, 200);
    CHECK(rep.covered_fraction == 1.0);
}

TEST_CASE("j-covering: geodesic support cannot leave a closed pocket") {
    const obstacle ring = make_annulus_channel(1.0, 1.8, 0.0, 0.0, 0.1);
    const grid g = grid::build_unchecked(box2d(-3, 3, 0.25, ring));
    const cell_metric cm(g, ring, {metric_kind::geodesic}, 1.0, 2);
    // start inside the pocket
    int x0 = -1;
    for (int i = 0; i < g.n(); ++i)
        if (norm(g.center(i)) < 0.9) { x0 = i; break; }
    REQUIRE(x0 >= 0);
    const auto rep = check_j_covering(cm, [](double r) { return r <= 1.0; }, x0, 200);
    CHECK(rep.covered_fraction < 1.0);
    CHECK(rep.covered_fraction > 0.0);
}
