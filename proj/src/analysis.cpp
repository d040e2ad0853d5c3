#include "nlf/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace nlf {

std::vector<double> level_positions(const grid& g, const std::vector<double>& u, double level,
                                    const std::vector<double>& rays) {
    std::vector<double> out(rays.size(), std::nan(""));
    for (std::size_t r = 0; r < rays.size(); ++r) {
        // nearest lattice row to the requested ray
        int iy = 0;
        if (g.dim() == 2) {
            iy = static_cast<int>(std::floor((rays[r] - g.ylim()[0]) / g.h()));
            iy = std::clamp(iy, 0, g.ny() - 1);
        }
        double prev_x = 0.0, prev_u = -1.0;
        for (int ix = 0; ix < g.nx(); ++ix) {
            const int i = g.cell_at(ix, iy);
            if (i < 0) {
                prev_u = -1.0;  // obstacle interrupts the ray
                continue;
            }
            const double x = g.center(i).x, v = u[i];
            if (v >= level) {
                if (prev_u < 0.0) {
                    // level reached at the first visible cell of the ray
                    out[r] = ix == 0 ? g.xlim()[0] : x;
                } else {
                    out[r] = prev_x + (level - prev_u) / (v - prev_u) * (x - prev_x);
                }
                break;
            }
            prev_x = x;
            prev_u = v;
        }
    }
    return out;
}

front_track track_front(const grid& g, const trajectory& traj, double level,
                        const std::vector<double>& rays) {
    front_track ft;
    ft.level = level;
    ft.rays = rays;
    for (const auto& s : traj.snapshots) {
        ft.times.push_back(s.t);
        ft.position.push_back(level_positions(g, s.u, level, rays));
    }
    return ft;
}

speed_fit mean_speed(const front_track& track) {
    speed_fit fit;
    std::vector<double> t, y;
    for (std::size_t k = 0; k < track.times.size(); ++k) {
        for (double pos : track.position[k]) {
            if (std::isnan(pos)) continue;
            t.push_back(track.times[k]);
            y.push_back(-pos);
        }
    }
    fit.points = static_cast<int>(t.size());
    if (fit.points < 5) throw validation_error("mean_speed needs at least 5 samples");
    const double n = static_cast<double>(t.size());
    double st = 0, sy = 0, stt = 0, sty = 0, syy = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        st += t[i];
        sy += y[i];
        stt += t[i] * t[i];
        sty += t[i] * y[i];
        syy += y[i] * y[i];
    }
    const double denom = n * stt - st * st;
    fit.c_est = denom != 0.0 ? (n * sty - st * sy) / denom : 0.0;
    const double ss_tot = syy - sy * sy / n;
    const double ss_res = ss_tot - fit.c_est * (sty - st * sy / n);
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

steady_result steady_state(const nonlocal_operator& op, const bistable& f,
                           std::vector<double> u_seed, const grid& g, const steady_config& cfg) {
    steady_result out;
    cauchy_state s{0.0, std::move(u_seed)};
    std::vector<double> prev = s.u;
    double prev_t = 0.0;
    while (s.t < cfg.horizon - 1e-9) {
        s = step(op, f, s, cfg.scheme);
        if (s.t - prev_t >= cfg.check_interval - 1e-9) {
            double diff = 0.0;
            for (int i = 0; i < g.n(); ++i) diff = std::max(diff, std::abs(s.u[i] - prev[i]));
            const double rate = diff / (s.t - prev_t);
            prev = s.u;
            prev_t = s.t;
            if (rate <= cfg.steady_tol) {
                out.converged = true;
                break;
            }
        }
    }
    out.t_end = s.t;
    const auto lu = op.apply(s.u, cfg.scheme.threads);
    for (int i = 0; i < g.n(); ++i)
        out.residual_inf = std::max(out.residual_inf, std::abs(lu[i] + f.eval(s.u[i])));
    if (cfg.probe_radius > 0.0) {
        double sup = 0.0;
        for (double v : s.u) sup = std::max(sup, v);
        if (sup >= 1.0 - cfg.steady_tol * 10.0) {
            for (int i = 0; i < g.n(); ++i) {
                if (norm(g.center(i)) < cfg.probe_radius) continue;
                if (s.u[i] < 1.0 - cfg.far_field_eps) out.far_field_ok = false;
            }
        }
    }
    out.u = std::move(s.u);
    return out;
}

const char* to_string(invasion_class c) {
    switch (c) {
        case invasion_class::invasion: return "Invasion";
        case invasion_class::blocking: return "Blocking";
        case invasion_class::indeterminate: return "Indeterminate";
    }
    return "?";
}

blocking_report classify_liouville(const grid& g, const steady_result& steady,
                                   const std::vector<probe_region>& probes,
                                   double invasion_threshold, double blocking_threshold) {
    blocking_report rep;
    rep.steady_residual = steady.residual_inf;
    rep.min_all = 1e300;
    bool all_probes_high = true;
    for (const auto& pr : probes) {
        double lo = 1e300;
        for (int i = 0; i < g.n(); ++i) {
            if (pr.radius >= 0.0 && dist(g.center(i), pr.center_pt) > pr.radius) continue;
            lo = std::min(lo, steady.u[i]);
        }
        if (lo == 1e300) lo = std::nan("");
        rep.probe_minima.emplace_back(pr.name, lo);
        if (!std::isnan(lo)) {
            rep.min_all = std::min(rep.min_all, lo);
            if (lo < invasion_threshold) all_probes_high = false;
            if (pr.is_pocket) {
                rep.has_pocket = true;
                rep.min_pocket = std::min(rep.min_pocket, lo);
            }
        }
    }
    if (rep.min_all == 1e300) rep.min_all = std::nan("");
    if (all_probes_high) rep.classification = invasion_class::invasion;
    else if (rep.has_pocket && rep.min_pocket < blocking_threshold)
        rep.classification = invasion_class::blocking;
    else rep.classification = invasion_class::indeterminate;
    return rep;
}

namespace {

struct snapshot_shape {
    double a = std::nan("");  // leftmost x1 in the level set
    double l = std::nan("");  // left end of the contiguous saturated column run
    double r = std::nan("");  // right end of that run
};

snapshot_shape level_set_shape(const grid& g, const std::vector<double>& u, double level) {
    snapshot_shape sh;
    for (int i = 0; i < g.n(); ++i) {
        if (u[i] >= level) {
            const double x = g.center(i).x;
            if (std::isnan(sh.a) || x < sh.a) sh.a = x;
        }
    }
    // contiguous run of columns, from the right, whose column minimum clears
    // the level (columns fully inside the obstacle are skipped)
    for (int ix = g.nx() - 1; ix >= 0; --ix) {
        double colmin = 1e300;
        bool any = false;
        for (int iy = 0; iy < std::max(1, g.ny()); ++iy) {
            const int i = g.cell_at(ix, iy);
            if (i < 0) continue;
            any = true;
            colmin = std::min(colmin, u[i]);
        }
        if (any && colmin < level) break;
        const double x = g.lattice_center(ix, 0).x;
        if (std::isnan(sh.r)) sh.r = x;
        sh.l = x;
    }
    return sh;
}

}  // namespace

superlevel_report superlevel_sandwich(const grid& g, const trajectory& traj, double c,
                                      double level) {
    superlevel_report rep;
    const std::size_t n = traj.snapshots.size();
    if (n < 4) throw validation_error("superlevel sandwich needs at least 4 snapshots");
    const std::size_t half = n / 2;
    rep.gamma0 = 1e300;
    rep.gamma1 = 1e300;
    rep.gamma2 = -1e300;
    for (std::size_t k = 0; k < half; ++k) {
        const auto& s = traj.snapshots[k];
        const auto sh = level_set_shape(g, s.u, level);
        if (!std::isnan(sh.a)) rep.gamma0 = std::min(rep.gamma0, sh.a + c * s.t);
        if (!std::isnan(sh.l)) {
            rep.gamma1 = std::min(rep.gamma1, sh.r);
            rep.gamma2 = std::max(rep.gamma2, sh.l + c * s.t);
        }
    }
    // one lattice spacing of slack: level-set boundaries are resolved to a
    // cell on the grid
    rep.gamma0 -= g.h();
    rep.gamma2 += g.h();
    const double eps = 1e-9;
    for (std::size_t k = half; k < n; ++k) {
        const auto& s = traj.snapshots[k];
        ++rep.verified_snapshots;
        for (int i = 0; i < g.n(); ++i) {
            const double x = g.center(i).x;
            if (s.u[i] >= level && x < rep.gamma0 - c * s.t - eps) ++rep.violations_upper;
            if (x <= rep.gamma1 + eps && x >= rep.gamma2 - c * s.t - eps && s.u[i] < level)
                ++rep.violations_lower;
        }
    }
    return rep;
}

std::vector<transition_diag_row> transition_front_diag(const grid& g, const trajectory& traj,
                                                       const std::vector<double>& u_inf, double c,
                                                       const std::vector<double>& a_values) {
    std::vector<transition_diag_row> rows;
    for (double A : a_values) {
        transition_diag_row row;
        row.A = A;
        for (const auto& s : traj.snapshots) {
            for (int i = 0; i < g.n(); ++i) {
                const double phase = g.center(i).x + c * s.t;
                if (phase >= A)
                    row.front_gap = std::max(row.front_gap, std::abs(s.u[i] - u_inf[i]));
                if (phase <= -A) row.rear_level = std::max(row.rear_level, s.u[i]);
            }
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace nlf
