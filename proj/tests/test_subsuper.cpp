#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nlf/subsuper.hpp"

using namespace nlf;

namespace {

struct wave_lab {
    radial_kernel k = radial_kernel::normalize(kernel_profile::gaussian, 1.0, 2);
    bistable f = bistable::cubic(0.3);
    wave_profile p;
    characteristic_roots_result roots;
    tail_constants_result tails;
    double z_star = 0.0;

    wave_lab() {
        p = solve_profile(k, f);
        const auto cw = make_conv_weights(marginal_kernel::marginal(k, p.dz), p.dz);
        roots = characteristic_roots(cw, p.c, f);
        tails = tail_constants(p, roots);
        p.set_tail_rates(roots.lambda, tails.mu_fit);
        z_star = convexity_threshold(p, roots);
    }
};

const wave_lab& lab() {
    static wave_lab L;
    return L;
}

struct cert_grid {
    domain d;
    grid g;
    nonlocal_operator op;

    static cert_grid make() {
        domain d;
        d.xlim = {-10, 14};
        d.ylim = {-3, 3};
        d.h = 0.25;
        d.dim = 2;
        d.obs = make_disk_obstacle({-6.5, 0}, 2.0, 0.125);
        grid g = grid::build(d);
        cell_metric cm(g, d.obs, {metric_kind::euclidean}, 1.0, 2);
        auto op = nonlocal_operator::assemble(g, cert_kernel(), cm, 2);
        return {d, std::move(g), std::move(op)};
    }
    static const radial_kernel& cert_kernel() {
        static auto k = radial_kernel::normalize(kernel_profile::gaussian, 1.0, 2);
        return k;
    }

private:
    cert_grid(domain dd, grid gg, nonlocal_operator o)
        : d(std::move(dd)), g(std::move(gg)), op(std::move(o)) {}
};

scheme_config cert_scheme() {
    scheme_config cfg;
    cfg.scheme = scheme_kind::imex_euler;
    cfg.dt = 0.05;
    cfg.threads = 2;
    return cfg;
}

}  // namespace

TEST_CASE("xi: limits and the drift identity") {
    const auto& L = lab();
    const auto pair = make_sandwich(L.p, L.roots, L.tails, L.f, L.z_star, 1.0);
    const auto& sh = pair.shift;
    const double lc = sh.lambda * sh.c;
    // xi vanishes far in the past
    CHECK(sh.xi(sh.horizon() - 40.0 / lc) < 1e-6);
    // xi is positive and increasing on the sampled range
    double prev = -1.0;
    for (double t = pair.t1 - 20.0; t <= pair.t1; t += 1.0) {
        const double v = sh.xi(t);
        CHECK(v > 0.0);
        CHECK(v > prev);
        prev = v;
        // xi_dot identity against finite differences
        const double fd = (sh.xi(t + 1e-5) - sh.xi(t - 1e-5)) / 2e-5;
        CHECK(std::abs(fd - sh.xi_dot(t)) <= 1e-8);
    }
    CHECK(sh.m_plus(pair.t1) < 0.0);
    CHECK(sh.m_minus(pair.t1) <= sh.m_plus(pair.t1));
}

TEST_CASE("w+ branches agree at x1 = 0 and w- vanishes on the left") {
    const auto& L = lab();
    const auto pair = make_sandwich(L.p, L.roots, L.tails, L.f, L.z_star, 1.0);
    for (double t : {pair.t1 - 7.0, pair.t1}) {
        const double from_right = pair.w_plus(t, {0.0, 0.3});
        const double from_left = pair.w_plus(t, {-1e-300, 0.3});
        CHECK(from_right == from_left);  // both are exactly 2 phi(M+)
        CHECK(pair.w_minus(t, {-0.4, 0.0}) == 0.0);
        CHECK(pair.w_minus(t, {-1e-300, 1.0}) == 0.0);
    }
}

TEST_CASE("sandwich gap obeys the printed bound and decays into the past") {
    const auto& L = lab();
    const auto pair = make_sandwich(L.p, L.roots, L.tails, L.f, L.z_star, 1.0);
    double dphi_max = 0.0;
    for (double z = -L.p.z_max; z <= L.p.z_max; z += L.p.dz)
        dphi_max = std::max(dphi_max, L.p.deriv(z));
    double prev_bound = 1e300;
    for (double t : {pair.t1, pair.t1 - 10.0, pair.t1 - 20.0, pair.t1 - 40.0}) {
        const double bound = 3.0 * dphi_max * pair.shift.xi(t) +
                             2.0 * L.p(pair.shift.m_plus(t)) + L.p(pair.shift.m_minus(t));
        for (double x1 = 0.0; x1 <= 14.0; x1 += 0.5) {
            const double gap = pair.w_plus(t, {x1, 0}) - pair.w_minus(t, {x1, 0});
            CHECK(gap >= 0.0);
            CHECK(gap <= bound + 1e-9);
        }
        CHECK(bound < prev_bound);
        prev_bound = bound;
    }
    CHECK(prev_bound < 0.05);  // the bound itself decays
}

TEST_CASE("residual of constant one vanishes exactly") {
    const auto& L = lab();
    const auto cg = cert_grid::make();
    auto w = [](double, vec2) { return 1.0; };
    const auto r = residual_field(cg.op, L.f, w, cg.g, -30.0, 1e-3, 2);
    for (double v : r) CHECK(v == 0.0);
}

TEST_CASE("residual of the exact planar wave sits at the scheme floor") {
    const auto& L = lab();
    const auto cg = cert_grid::make();
    // free space for this check: pad so the box edges do not contribute
    domain d2 = cg.d;
    d2.obs = obstacle{};
    grid g2 = grid::build(d2);
    cell_metric cm2(g2, d2.obs, {metric_kind::euclidean}, 1.0, 2);
    auto op2 = nonlocal_operator::assemble(g2, cert_grid::cert_kernel(), cm2, 2, 0, true);
    auto w = [&](double t, vec2 x) { return L.p(x.x + L.p.c * t); };
    const auto r = residual_field(op2, L.f, w, g2, -30.0, 1e-3, 2);
    double worst = 0.0;
    for (double v : r) worst = std::max(worst, std::abs(v));
    CHECK(worst <= 0.05);
}

TEST_CASE("certification passes with the default shift amplitude") {
    const auto& L = lab();
    const auto cg = cert_grid::make();
    const auto pair = make_sandwich(L.p, L.roots, L.tails, L.f, L.z_star, 1.0);
    const double tol = 20.0 * (L.p.dz + 0.05);
    const auto rep = certify_sandwich(cg.op, L.f, cg.g, cg.d.obs, pair,
                                      {pair.t1 - 5.0, pair.t1 - 2.0, pair.t1}, tol, cert_scheme());
    CHECK(rep.ordering_ok);
    CHECK(rep.min_p_wplus >= -tol);
    CHECK(rep.max_p_wminus <= tol);
    CHECK(rep.cauchy_enclosed);
    CHECK(rep.enclosure_slack <= 0.05);
    // at desk scale the defining inequalities hold down to the scheme floor
    CHECK(rep.min_p_wplus >= -0.015);
    CHECK(rep.max_p_wminus <= 0.015);
}

TEST_CASE("shrinking k far below the thresholds breaks the inequalities") {
    const auto& L = lab();
    const auto cg = cert_grid::make();
    const auto good = make_sandwich(L.p, L.roots, L.tails, L.f, L.z_star, 1.0);
    const auto tiny =
        make_sandwich(L.p, L.roots, L.tails, L.f, L.z_star, 1.0, good.shift.k / 1024.0);
    const double tol = 20.0 * (L.p.dz + 0.05);
    const auto rep_good = certify_sandwich(cg.op, L.f, cg.g, cg.d.obs, good,
                                           {good.t1 - 5.0, good.t1}, tol, cert_scheme());
    const auto rep_tiny = certify_sandwich(cg.op, L.f, cg.g, cg.d.obs, tiny,
                                           {tiny.t1 - 5.0, tiny.t1}, tol, cert_scheme());
    // the negative residual grows measurably past the scheme floor
    CHECK(rep_tiny.min_p_wplus <= -0.015);
    CHECK(rep_tiny.min_p_wplus <= 1.4 * rep_good.min_p_wplus);
    CHECK(rep_tiny.max_p_wminus >= 0.015);
    CHECK(rep_tiny.max_p_wminus >= 1.4 * rep_good.max_p_wminus);
}

TEST_CASE("placement condition is enforced") {
    const auto& L = lab();
    domain d;
    d.xlim = {-6, 6};
    d.ylim = {-3, 3};
    d.h = 0.25;
    d.dim = 2;
    d.obs = make_disk_obstacle({0, 0}, 1.0, 0.125);  // violates K in {x1 < -R_J}
    grid g = grid::build(d);
    cell_metric cm(g, d.obs, {metric_kind::euclidean}, 1.0, 2);
    auto op = nonlocal_operator::assemble(g, cert_grid::cert_kernel(), cm, 2);
    const auto pair = make_sandwich(L.p, L.roots, L.tails, L.f, L.z_star, 1.0);
    CHECK_THROWS_AS(certify_sandwich(op, L.f, g, d.obs, pair, {pair.t1}, 1.0, cert_scheme()),
                    placement_violation_error);
}

TEST_CASE("perturbed supersolution dominates the matched cauchy run") {
    const auto& L = lab();
    const auto w = make_perturbed_super(L.p, L.f, 0.0);
    const double alpha0 = -std::max(L.f.fp0(), L.f.fp1());
    CHECK(w.alpha > 0.0);
    CHECK(w.alpha <= alpha0);
    CHECK(w.beta > 0.0);
    const auto prm = measure_perturbed_params(L.p, L.f, w.alpha);
    CHECK(w.beta <= prm.beta0);
    CHECK(w.kappa >= prm.kappa0);

    domain d;
    d.xlim = {-12, 12};
    d.ylim = {-2, 2};
    d.h = 0.25;
    d.dim = 2;
    grid g = grid::build(d);
    cell_metric cm(g, d.obs, {metric_kind::euclidean}, 1.0, 2);
    auto op = nonlocal_operator::assemble(g, cert_grid::cert_kernel(), cm, 2, 0, true);
    std::vector<double> u0(g.n());
    for (int i = 0; i < g.n(); ++i) u0[i] = L.p(g.center(i).x);  // u0 <= w(0, .)
    cauchy_state s{0.0, std::move(u0)};
    auto cfg = cert_scheme();
    double worst = 0.0;
    while (s.t < 20.0) {
        s = step(op, L.f, s, cfg);
        for (int i = 0; i < g.n(); ++i)
            worst = std::max(worst, s.u[i] - w.eval(s.t, g.center(i)));
    }
    CHECK(worst <= 1e-9);
}
