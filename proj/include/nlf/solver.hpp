#pragma once

#include <vector>

#include "nlf/nonlocal_operator.hpp"
#include "nlf/nonlinearity.hpp"
#include "nlf/wave1d.hpp"

namespace nlf {

enum class scheme_kind { explicit_euler, imex_euler };

struct scheme_config {
    scheme_kind scheme = scheme_kind::imex_euler;
    double dt = 0.05;
    bool cfl_guard = true;        // explicit only: dt (max d_i + Lip f) <= 1
    double imex_tol = 1e-10;      // CG residual (2-norm)
    int imex_max_iter = 500;
    int threads = 1;
};

struct cauchy_state {
    double t = 0.0;
    std::vector<double> u;
};

cauchy_state step(const nonlocal_operator& op, const bistable& f, const cauchy_state& s,
                  const scheme_config& cfg);

struct trajectory {
    std::vector<cauchy_state> snapshots;
    double min_u = 0.0, max_u = 0.0;
    double monotone_fraction = 0.0;  // steps whose smallest increment >= -1e-12
    double wall_seconds = 0.0;
    int steps = 0;
};

// Advance from t0 to T, recording the state at the requested times (each
// snapshot is taken at the nearest step boundary). Guards the a priori
// growth bound ||u(t)||_inf <= e^{omega (t-t0)} (... + ||u0||_inf) in log
// space, with omega from the validation report.
trajectory run(const nonlocal_operator& op, const bistable& f, std::vector<double> u0, double t0,
               double T, const std::vector<double>& snapshot_times, const scheme_config& cfg,
               double omega);

// initial data builders
std::vector<double> heaviside_initial(const grid& g, double x1_0, double smoothing_width);
std::vector<double> planar_wave_initial(const grid& g, const wave_profile& profile, double t0);

// symmetric positive definite solve of (I - dt L) x = b by conjugate
// gradients; deterministic reductions
int solve_identity_minus_dtl(const nonlocal_operator& op, double dt, const std::vector<double>& b,
                             std::vector<double>& x, double tol, int max_iter, int threads);

}  // namespace nlf
