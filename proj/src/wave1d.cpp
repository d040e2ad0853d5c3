#include "nlf/wave1d.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nlf {

namespace {

// interpolated position of the theta level, or nullopt when the profile
// does not cross it
std::optional<double> theta_crossing(const std::vector<double>& v, double theta, double dz,
                                     double z0) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i - 1] < theta && v[i] >= theta) {
            const double fr = (theta - v[i - 1]) / (v[i] - v[i - 1]);
            return z0 + (static_cast<double>(i - 1) + fr) * dz;
        }
    }
    return std::nullopt;
}

}  // namespace

double conv_weights::apply(const std::vector<double>& v, int i) const {
    const int n = static_cast<int>(v.size());
    double acc = 0.0;
    for (int k = -m; k <= m; ++k) {
        const int j = i + k;
        const double vj = j < 0 ? 0.0 : (j >= n ? 1.0 : v[j]);
        acc += w[k + m] * vj;
    }
    return acc;
}

double conv_weights::moment(double s) const {
    double acc = 0.0;
    for (int k = -m; k <= m; ++k) acc += w[k + m] * std::exp(s * k * dz);
    return acc;
}

double conv_weights::moment_d(double s) const {
    double acc = 0.0;
    for (int k = -m; k <= m; ++k) acc += w[k + m] * (k * dz) * std::exp(s * k * dz);
    return acc;
}

conv_weights make_conv_weights(const marginal_kernel& j1, double dz) {
    conv_weights cw;
    cw.dz = dz;
    cw.m = static_cast<int>(std::floor(j1.radius() / dz + 1e-9));
    cw.w.assign(2 * cw.m + 1, 0.0);
    const bool aligned = std::abs(j1.step() - dz) < 1e-12 && j1.half_points() == cw.m;
    const bool edge_on_grid = std::abs(cw.m * dz - j1.radius()) < 1e-9 * j1.radius();
    for (int k = -cw.m; k <= cw.m; ++k) {
        double wk = dz * (aligned ? j1.samples()[k + cw.m] : j1(k * dz));
        if (edge_on_grid && std::abs(k) == cw.m) wk *= 0.5;  // trapezoid ends
        cw.w[k + cw.m] = wk;
    }
    const double sum = std::accumulate(cw.w.begin(), cw.w.end(), 0.0);
    if (!(sum > 0.0)) throw zero_mass_error("marginal kernel has no mass on this grid");
    for (auto& wk : cw.w) wk /= sum;  // constants become exact equilibria
    return cw;
}

double wave_profile::operator()(double z) const {
    const int n = points();
    if (z <= -z_max) {
        const double base = phi.front();
        if (lambda_ > 0.0) return base * std::exp(lambda_ * (z + z_max));
        return base;
    }
    if (z >= z_max) {
        const double gap = 1.0 - phi.back();
        if (mu_right_ > 0.0) return 1.0 - gap * std::exp(-mu_right_ * (z - z_max));
        return phi.back();
    }
    const double t = (z + z_max) / dz;
    const int i = std::min(n - 2, static_cast<int>(t));
    const double fr = t - i;
    return phi[i] * (1.0 - fr) + phi[i + 1] * fr;
}

double wave_profile::deriv(double z) const {
    const int n = points();
    if (z <= -z_max) return lambda_ > 0.0 ? lambda_ * (*this)(z) : 0.0;
    if (z >= z_max) return mu_right_ > 0.0 ? mu_right_ * (1.0 - (*this)(z)) : 0.0;
    auto d_at = [&](int i) {
        if (i <= 0 || i >= n - 1) {
            if (i <= 0) return lambda_ > 0.0 ? lambda_ * phi.front() : (phi[1] - phi[0]) / dz;
            return mu_right_ > 0.0 ? mu_right_ * (1.0 - phi.back())
                                   : (phi[n - 1] - phi[n - 2]) / dz;
        }
        return (phi[i + 1] - phi[i - 1]) / (2.0 * dz);
    };
    const double t = (z + z_max) / dz;
    const int i = std::min(n - 2, static_cast<int>(t));
    const double fr = t - i;
    return d_at(i) * (1.0 - fr) + d_at(i + 1) * fr;
}

wave_profile solve_profile(const radial_kernel& kernel, const bistable& f, wave_config cfg) {
    const double R = kernel.radius();
    if (cfg.z_max <= 0.0) cfg.z_max = 20.0 * R;
    if (cfg.dz <= 0.0) cfg.dz = R / 40.0;
    const double lip = f.sup_abs_fp();
    if (cfg.dt <= 0.0) cfg.dt = 0.5 / (1.0 + lip);
    if (cfg.dt * (1.0 + lip) > 1.0) throw cfl_violation_error("wave solver step too large");

    const int half = std::max(4, static_cast<int>(std::lround(cfg.z_max / cfg.dz)));
    const double dz = cfg.dz;
    const double z_max = half * dz;
    const int n = 2 * half + 1;

    const auto j1 = marginal_kernel::marginal(kernel, dz);
    const auto cw = make_conv_weights(j1, dz);

    // smoothed step initial datum around z0
    std::vector<double> v(n), rhs(n);
    for (int i = 0; i < n; ++i) {
        const double z = -z_max + i * dz;
        v[i] = 1.0 / (1.0 + std::exp(-2.0 * (z - cfg.z0)));
    }

    const double theta = f.theta();
    double shift_total = 0.0;  // accumulated recentering, in z units
    const int steps = std::max(1, static_cast<int>(std::lround(cfg.t_relax / cfg.dt)));
    const double dt = cfg.t_relax / steps;

    // absolute theta-level position in the initial frame, sampled at the
    // quarter points of the relaxation window
    std::vector<std::pair<double, double>> marks;  // (t, X)
    auto absolute_pos = [&]() -> double {
        const auto zc = theta_crossing(v, theta, dz, -z_max);
        if (!zc) throw degenerate_profile_error("profile lost the theta level");
        return shift_total + *zc;
    };

    for (int s = 1; s <= steps; ++s) {
        for (int i = 0; i < n; ++i) rhs[i] = cw.apply(v, i) - v[i] + f.eval(v[i]);
        for (int i = 0; i < n; ++i) v[i] += dt * rhs[i];

        // keep the theta level near z = 0 by integer shifts
        const auto zc = theta_crossing(v, theta, dz, -z_max);
        if (!zc) throw degenerate_profile_error("profile lost the theta level");
        const int cells = static_cast<int>(std::lround(*zc / dz));
        if (cells != 0) {
            std::vector<double> nv(n);
            for (int i = 0; i < n; ++i) {
                const int j = i + cells;
                nv[i] = j < 0 ? 0.0 : (j >= n ? 1.0 : v[j]);
            }
            v.swap(nv);
            shift_total += cells * dz;
        }
        const double t_now = s * dt;
        if (s == steps / 2 || s == (3 * steps) / 4 || s == steps)
            marks.emplace_back(t_now, absolute_pos());
    }

    if (marks.size() < 3) throw no_convergence_error("relaxation window too short");
    const double c_q3 = -(marks[1].second - marks[0].second) / (marks[1].first - marks[0].first);
    const double c_q4 = -(marks[2].second - marks[1].second) / (marks[2].first - marks[1].first);
    if (std::abs(c_q4 - c_q3) > cfg.tol)
        throw no_convergence_error("drift rate still moving: " + std::to_string(c_q3) + " vs " +
                                   std::to_string(c_q4));
    const double c = -(marks[2].second - marks[0].second) / (marks[2].first - marks[0].first);

    // monotonicity up to solver tolerance
    for (int i = 1; i < n; ++i) {
        if (v[i] - v[i - 1] < -1e-8)
            throw degenerate_profile_error("profile is not monotone");
    }

    // final fractional recentering so that phi(0) = theta on the grid
    const auto zc = theta_crossing(v, theta, dz, -z_max);
    if (!zc) throw degenerate_profile_error("profile lost the theta level");
    const double off = *zc;
    std::vector<double> centered(n);
    for (int i = 0; i < n; ++i) {
        const double z = -z_max + i * dz + off;
        const double t = (z + z_max) / dz;
        if (t <= 0.0) centered[i] = 0.0;
        else if (t >= n - 1) centered[i] = 1.0;
        else {
            const int j = static_cast<int>(t);
            const double fr = t - j;
            centered[i] = v[j] * (1.0 - fr) + v[j + 1] * fr;
        }
    }

    wave_profile p;
    p.phi = std::move(centered);
    p.dz = dz;
    p.z_max = z_max;
    p.c = c;
    p.theta = theta;
    if (p.phi.front() > 1e-4 || 1.0 - p.phi.back() > 1e-4)
        throw degenerate_profile_error("profile does not settle at the window ends");
    return p;
}

double profile_residual_inf(const wave_profile& p, const radial_kernel& kernel,
                            const bistable& f) {
    const auto j1 = marginal_kernel::marginal(kernel, p.dz);
    const auto cw = make_conv_weights(j1, p.dz);
    const int n = p.points();
    double worst = 0.0;
    for (int i = 1; i < n - 1; ++i) {
        const double dphi = (p.phi[i + 1] - p.phi[i - 1]) / (2.0 * p.dz);
        const double r = p.c * dphi - cw.apply(p.phi, i) + p.phi[i] - f.eval(p.phi[i]);
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

double char_equation(const conv_weights& w, double c, double fprime, double s) {
    return w.moment(s) - 1.0 - c * s + fprime;
}

namespace {

double positive_root(const conv_weights& w, double c, double fprime, double s_cap) {
    // m(0) = fprime < 0 (the weights sum to one); m is convex and grows like
    // the exponential moment, so there is exactly one positive root
    const double step = s_cap / 400.0;
    double lo = 0.0, hi = 0.0;
    for (double s = step; s <= s_cap + 1e-12; s += step) {
        if (char_equation(w, c, fprime, s) > 0.0) {
            hi = s;
            lo = s - step;
            break;
        }
    }
    if (hi == 0.0) throw root_bracket_failure_error("no sign change below the root cap");
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (char_equation(w, c, fprime, mid) > 0.0) hi = mid;
        else lo = mid;
    }
    double s = 0.5 * (lo + hi);
    for (int it = 0; it < 60; ++it) {
        const double val = char_equation(w, c, fprime, s);
        if (std::abs(val) <= 1e-13) break;
        const double d = w.moment_d(s) - c;
        if (d <= 0.0) break;
        s -= val / d;
    }
    return s;
}

struct window_fit {
    double intercept = 0.0;  // exp of the fixed-slope intercept
    double slope = 0.0;      // freely fitted slope
    double max_rel_dev = 0.0;
};

// least squares of log(y) over the index window, both with the fixed rate
// (intercept) and with a free slope
window_fit fit_log(const std::vector<double>& z, const std::vector<double>& y, double rate) {
    window_fit out;
    const std::size_t n = z.size();
    double mean_adj = 0.0;
    double sz = 0.0, sy = 0.0, szz = 0.0, szy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ly = std::log(y[i]);
        mean_adj += ly - rate * z[i];
        sz += z[i];
        sy += ly;
        szz += z[i] * z[i];
        szy += z[i] * ly;
    }
    mean_adj /= n;
    out.intercept = std::exp(mean_adj);
    const double denom = n * szz - sz * sz;
    out.slope = denom != 0.0 ? (n * szy - sz * sy) / denom : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double g = y[i] * std::exp(-rate * z[i]);
        out.max_rel_dev = std::max(out.max_rel_dev, std::abs(g / out.intercept - 1.0));
    }
    return out;
}

}  // namespace

characteristic_roots_result characteristic_roots(const conv_weights& w, double c,
                                                 const bistable& f) {
    const double R = w.m * w.dz;
    const double cap = 50.0 / std::max(R, 1e-9);
    characteristic_roots_result r;
    r.lambda = positive_root(w, c, f.fp0(), cap);
    r.mu = positive_root(w, c, f.fp1(), cap);
    r.res_lambda = char_equation(w, c, f.fp0(), r.lambda);
    r.res_mu = char_equation(w, c, f.fp1(), r.mu);
    return r;
}

tail_constants_result tail_constants(const wave_profile& p,
                                     const characteristic_roots_result& roots) {
    tail_constants_result out;
    const int n = p.points();
    const double R = p.z_max / 20.0;  // window margins scale with the kernel radius

    auto collect = [&](double z_lo, double z_hi, bool right_side, double floor_val,
                       std::vector<double>& z, std::vector<double>& y,
                       std::vector<double>& dphi) {
        for (int i = 1; i < n - 1; ++i) {
            const double zi = p.z_of(i);
            if (zi < z_lo || zi > z_hi) continue;
            const double val = right_side ? 1.0 - p.phi[i] : p.phi[i];
            if (val < floor_val) continue;
            z.push_back(zi);
            y.push_back(val);
            dphi.push_back((p.phi[i + 1] - p.phi[i - 1]) / (2.0 * p.dz));
        }
    };

    {
        std::vector<double> z, y, dphi;
        collect(-p.z_max + R, -p.z_max / 2.0, false, 1e-300, z, y, dphi);
        if (z.size() < 8) throw poor_fit_error("left tail window too short");
        const auto fit = fit_log(z, y, roots.lambda);
        out.A0 = fit.intercept;
        out.lambda_fit = fit.slope;
        out.fit_error = fit.max_rel_dev;
        out.alpha0 = 1e300;
        out.gamma0 = 1e300;
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double e = std::exp(-roots.lambda * z[i]);
            out.alpha0 = std::min(out.alpha0, y[i] * e);
            out.beta0 = std::max(out.beta0, y[i] * e);
            out.gamma0 = std::min(out.gamma0, dphi[i] * e);
            out.delta0 = std::max(out.delta0, dphi[i] * e);
        }
    }
    {
        // the right window is clipped to cells where 1 - phi is resolvable
        std::vector<double> z, y, dphi;
        collect(p.z_max / 2.0, p.z_max - R, true, 1e-12, z, y, dphi);
        if (z.size() < 8) collect(R, p.z_max - R, true, 1e-12, z, y, dphi);
        if (z.size() < 8) throw poor_fit_error("right tail window too short");
        const auto fit = fit_log(z, y, -roots.mu);
        out.A1 = fit.intercept;
        out.mu_fit = -fit.slope;
        out.alpha1 = 1e300;
        out.gamma1 = 1e300;
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double e = std::exp(roots.mu * z[i]);
            out.alpha1 = std::min(out.alpha1, y[i] * e);
            out.beta1 = std::max(out.beta1, y[i] * e);
            out.gamma1 = std::min(out.gamma1, dphi[i] * e);
            out.delta1 = std::max(out.delta1, dphi[i] * e);
        }
    }
    if (out.fit_error > 0.1) throw poor_fit_error("left tail deviates from the fitted rate");
    return out;
}

double convexity_threshold(const wave_profile& p, const characteristic_roots_result& roots) {
    const int n = p.points();
    const int skip = static_cast<int>(std::lround(p.z_max / 20.0 / p.dz)) + 1;  // kernel band
    int best = -1;
    for (int i = skip; i < n - 1; ++i) {
        if (p.phi[i] < 1e-10) continue;  // below tail resolution
        const double d1 = (p.phi[i + 1] - p.phi[i - 1]) / (2.0 * p.dz);
        const double d2 = (p.phi[i + 1] - 2.0 * p.phi[i] + p.phi[i - 1]) / (p.dz * p.dz);
        if (d2 >= roots.lambda / 8.0 * d1) best = i;
        else break;
    }
    if (best < 0) throw not_found_error("convexity fails at the leftmost resolved point; "
                                        "window may be too short");
    // the threshold lives on the negative axis and only z <= z* is consumed;
    // clamp when the inequality happens to extend past the origin
    return std::min(p.z_of(best), -p.dz);
}

}  // namespace nlf
