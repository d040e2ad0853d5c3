#include "nlf/subsuper.hpp"

#include <algorithm>
#include <cmath>

namespace nlf {

double front_shift::xi(double t) const {
    const double q = std::exp(lambda * c * t) * k / c;
    if (q >= 1.0) throw out_of_validity_error("xi(t) evaluated at or past its horizon");
    return std::log(1.0 / (1.0 - q)) / lambda;
}

double sandwich_pair::w_plus(double t, vec2 x) const {
    // small allowance for the centered time difference of the residual op
    if (t > t1 + 0.01) throw out_of_validity_error("w+ evaluated past t1");
    const double m = shift.m_plus(t);
    const auto& p = *phi;
    if (x.x >= 0.0) return p(x.x + m) + p(-x.x + m);
    return 2.0 * p(m);
}

double sandwich_pair::w_minus(double t, vec2 x) const {
    if (t > t1 + 0.01) throw out_of_validity_error("w- evaluated past t1");
    if (x.x < 0.0) return 0.0;
    const double m = shift.m_minus(t);
    const auto& p = *phi;
    return p(x.x + m) - p(-x.x + m);
}

double measured_rho(const bistable& f) {
    double rho = 0.0;
    const int n = 200;
    for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= n; ++j) {
            const double a = static_cast<double>(i) / n;
            const double b = static_cast<double>(j) / n;
            rho = std::max(rho, std::abs(f.eval(a) + f.eval(b) - f.eval(a + b)) / (a * b));
        }
    }
    return rho;
}

double default_shift_k(const characteristic_roots_result& roots,
                       const tail_constants_result& tails, const bistable& f, double safety) {
    const double rho = measured_rho(f);
    const double k = std::max({rho * tails.beta0 * tails.beta0 / tails.gamma0,
                               rho * tails.beta0 / tails.gamma1,
                               (tails.delta0 + rho * tails.beta0) / tails.gamma0,
                               8.0 * rho * tails.beta0 / roots.lambda});
    return safety * k;
}

double choose_t1(const wave_profile& phi, const front_shift& shift, double z_star, double r_j) {
    const double lc = shift.lambda * shift.c;
    // keep xi in its flat regime
    const double t_cap = shift.horizon() - std::log(2.0) / lc;

    // phi^{-1}(theta/2) by bisection
    double lo = -phi.z_max, hi = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) > phi.theta / 2.0 ? hi : lo) = mid;
    }
    const double m_target = std::min({z_star - r_j, 0.5 * (lo + hi), -1e-9});

    // M+(t) is increasing; find the largest t <= t_cap with M+(t) <= m_target
    if (shift.m_plus(t_cap) <= m_target) return t_cap;
    double ta = t_cap - 200.0 / lc, tb = t_cap;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (ta + tb);
        (shift.m_plus(mid) > m_target ? tb : ta) = mid;
    }
    return 0.5 * (ta + tb);
}

sandwich_pair make_sandwich(const wave_profile& phi, const characteristic_roots_result& roots,
                            const tail_constants_result& tails, const bistable& f,
                            double z_star, double r_j, double k_override) {
    sandwich_pair pair;
    pair.phi = &phi;
    pair.theta = phi.theta;
    pair.shift.k = k_override > 0.0 ? k_override : default_shift_k(roots, tails, f);
    pair.shift.lambda = roots.lambda;
    pair.shift.c = phi.c;
    pair.t1 = choose_t1(phi, pair.shift, z_star, r_j);
    return pair;
}

std::vector<double> residual_field(const nonlocal_operator& op, const bistable& f,
                                   const std::function<double(double, vec2)>& w, const grid& g,
                                   double t, double dt_fd, int threads) {
    const int n = g.n();
    std::vector<double> now(n), fwd(n), bwd(n), lw(n), out(n);
    for (int i = 0; i < n; ++i) {
        now[i] = w(t, g.center(i));
        fwd[i] = w(t + dt_fd, g.center(i));
        bwd[i] = w(t - dt_fd, g.center(i));
    }
    op.apply(now, lw, threads);
    for (int i = 0; i < n; ++i)
        out[i] = (fwd[i] - bwd[i]) / (2.0 * dt_fd) - lw[i] - f.eval(now[i]);
    return out;
}

sandwich_report certify_sandwich(const nonlocal_operator& op, const bistable& f, const grid& g,
                                 const obstacle& obs, const sandwich_pair& pair,
                                 std::vector<double> times, double tol,
                                 const scheme_config& cfg) {
    if (!obs.empty() && obs.bbox()[1] >= -op.rj())
        throw placement_violation_error("obstacle must satisfy K in {x1 < -R_J}");
    std::sort(times.begin(), times.end());
    if (times.empty() || times.back() > pair.t1)
        throw out_of_validity_error("certification times must not exceed t1");

    sandwich_report rep;
    rep.t1 = pair.t1;
    rep.k_used = pair.shift.k;
    rep.sampled_times = times;
    rep.min_p_wplus = 1e300;
    rep.max_p_wminus = -1e300;
    rep.ordering_ok = true;

    const double dt_fd = 1e-3;
    auto wp = [&](double t, vec2 x) { return pair.w_plus(t, x); };
    auto wm = [&](double t, vec2 x) { return pair.w_minus(t, x); };
    for (double t : times) {
        const auto rp = residual_field(op, f, wp, g, t, dt_fd, cfg.threads);
        const auto rm = residual_field(op, f, wm, g, t, dt_fd, cfg.threads);
        for (int i = 0; i < g.n(); ++i) {
            rep.min_p_wplus = std::min(rep.min_p_wplus, rp[i]);
            rep.max_p_wminus = std::max(rep.max_p_wminus, rm[i]);
            const double lo = pair.w_minus(t, g.center(i));
            const double hi = pair.w_plus(t, g.center(i));
            if (!(lo >= -1e-12 && lo < hi && hi <= 1.0 + 1e-6)) rep.ordering_ok = false;
        }
    }

    // a Cauchy run started from w-(t_start) must stay inside the sandwich
    std::vector<double> u(g.n());
    for (int i = 0; i < g.n(); ++i) u[i] = std::max(0.0, pair.w_minus(times.front(), g.center(i)));
    cauchy_state s{times.front(), std::move(u)};
    std::size_t mark = 0;
    double slack = 0.0;
    auto check_against = [&](const cauchy_state& st) {
        for (int i = 0; i < g.n(); ++i) {
            const double lo = pair.w_minus(st.t, g.center(i));
            const double hi = pair.w_plus(st.t, g.center(i));
            slack = std::max({slack, lo - st.u[i], st.u[i] - hi});
        }
    };
    while (mark < times.size()) {
        if (s.t >= times[mark] - 1e-9) {
            check_against(s);
            ++mark;
            continue;
        }
        s = step(op, f, s, cfg);
    }
    rep.enclosure_slack = slack;
    rep.cauchy_enclosed = slack <= tol;
    return rep;
}

double perturbed_super::eval(double t, vec2 x) const {
    const double decay = std::exp(-alpha * t);
    return (*phi)(x.x + phi->c * t + rho + kappa * beta * (1.0 - decay)) + beta * decay;
}

perturbed_super_params measure_perturbed_params(const wave_profile& phi, const bistable& f,
                                                double alpha) {
    perturbed_super_params prm;
    prm.alpha0 = -std::max(f.fp0(), f.fp1());

    // largest beta with -f'(s) >= alpha on [-2b, 2b] and [1-2b, 1+2b]
    const double cap = 0.25 * std::min(f.theta(), 1.0 - f.theta());
    double beta0 = 0.0;
    for (int step_i = 1; step_i <= 400; ++step_i) {
        const double b = cap * step_i / 400.0;
        bool ok = true;
        for (int k = -40; k <= 40 && ok; ++k) {
            const double s = 2.0 * b * k / 40.0;
            if (-f.deriv(s) < alpha || -f.deriv(1.0 + s) < alpha) ok = false;
        }
        if (!ok) break;
        beta0 = b;
    }
    prm.beta0 = beta0;

    // A with phi(-A) <= beta0, phi(A) >= 1 - beta0
    double A = 1.0;
    while (A < phi.z_max && (phi(-A) > beta0 || phi(A) < 1.0 - beta0)) A += 0.25;
    prm.A = A;
    prm.zeta = 1e300;
    for (double z = -A; z <= A; z += phi.dz) prm.zeta = std::min(prm.zeta, phi.deriv(z));
    prm.kappa0 = (f.sup_abs_fp() + alpha) / (prm.zeta * alpha);
    return prm;
}

perturbed_super make_perturbed_super(const wave_profile& phi, const bistable& f, double rho) {
    const double alpha0 = -std::max(f.fp0(), f.fp1());
    const double alpha = 0.5 * std::min(alpha0, phi.c);  // also below mu c in practice
    const auto prm = measure_perturbed_params(phi, f, alpha);
    if (prm.beta0 <= 0.0) throw not_found_error("no admissible beta window for this f");
    perturbed_super w;
    w.phi = &phi;
    w.alpha = alpha;
    w.beta = prm.beta0;
    w.kappa = 1.05 * prm.kappa0;
    w.rho = rho;
    return w;
}

}  // namespace nlf
