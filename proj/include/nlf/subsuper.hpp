#pragma once

#include <functional>

#include "nlf/solver.hpp"
#include "nlf/wave1d.hpp"

namespace nlf {

struct out_of_validity_error : error { using error::error; };

// Front-shift bookkeeping: xi(t) and the shifted frames M±(t) = c t ± xi(t),
// defined for t < T = (lambda c)^{-1} log(c / k).
struct front_shift {
    double k = 1.0;
    double lambda = 1.0;
    double c = 1.0;

    double horizon() const { return std::log(c / k) / (lambda * c); }  // T
    double xi(double t) const;
    double xi_dot(double t) const { return k * std::exp(lambda * m_plus(t)); }
    double m_plus(double t) const { return c * t + xi(t); }
    double m_minus(double t) const { return c * t - xi(t); }
};

// w+ / w- evaluators of the pre-obstacle sandwich, with the validity horizon
// t1 chosen from the measured smallness conditions.
struct sandwich_pair {
    const wave_profile* phi = nullptr;
    front_shift shift;
    double theta = 0.3;
    double t1 = 0.0;

    double w_plus(double t, vec2 x) const;
    double w_minus(double t, vec2 x) const;
};

// |f(a) + f(b) - f(a+b)| <= rho * a * b on (0,1]^2, measured by sampling.
double measured_rho(const bistable& f);

// Default shift amplitude: the explicit thresholds of the construction,
// evaluated with the measured rho and tail constants, times a safety factor.
double default_shift_k(const characteristic_roots_result& roots,
                       const tail_constants_result& tails, const bistable& f,
                       double safety = 2.0);

// Largest time at which all smallness conditions hold: M+(t) < 0,
// phi(M+(t)) <= theta/2, M+(t) <= z* - R_J, and xi is still in its flat
// regime (c^{-1} k e^{lambda c t} <= 1/2).
double choose_t1(const wave_profile& phi, const front_shift& shift, double z_star, double r_j);

sandwich_pair make_sandwich(const wave_profile& phi, const characteristic_roots_result& roots,
                            const tail_constants_result& tails, const bistable& f,
                            double z_star, double r_j, double k_override = 0.0);

// P[w](t, .) = dw/dt - L w - f(w) sampled on the grid; the time derivative
// is a centered difference with step dt_fd.
std::vector<double> residual_field(const nonlocal_operator& op, const bistable& f,
                                   const std::function<double(double, vec2)>& w, const grid& g,
                                   double t, double dt_fd, int threads);

struct sandwich_report {
    double min_p_wplus = 0.0;
    double max_p_wminus = 0.0;
    bool ordering_ok = false;
    bool cauchy_enclosed = false;
    double enclosure_slack = 0.0;  // max violation of w- <= u <= w+
    double t1 = 0.0;
    double k_used = 0.0;
    std::vector<double> sampled_times;
};

// Samples the defining inequalities of the pair on the grid at the given
// times (all <= t1) and checks that a Cauchy run started from w-(times[0])
// stays inside the sandwich. Requires K inside {x1 < -R_J}.
sandwich_report certify_sandwich(const nonlocal_operator& op, const bistable& f, const grid& g,
                                 const obstacle& obs, const sandwich_pair& pair,
                                 std::vector<double> times, double tol,
                                 const scheme_config& cfg);

// Perturbed planar supersolution  phi(x1 + ct + rho + kappa beta (1 - e^{-alpha t}))
// + beta e^{-alpha t}  for the free-space problem.
struct perturbed_super {
    const wave_profile* phi = nullptr;
    double alpha = 0.0, beta = 0.0, kappa = 0.0, rho = 0.0;
    double eval(double t, vec2 x) const;
};

struct perturbed_super_params {
    double alpha0 = 0.0;  // -max{f'(0), f'(1)}
    double beta0 = 0.0;
    double kappa0 = 0.0;
    double zeta = 0.0;    // min phi' on [-A, A]
    double A = 0.0;
};

perturbed_super_params measure_perturbed_params(const wave_profile& phi, const bistable& f,
                                                double alpha);
perturbed_super make_perturbed_super(const wave_profile& phi, const bistable& f, double rho);

}  // namespace nlf
