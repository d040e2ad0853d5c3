#pragma once

#include <string>
#include <vector>

#include "nlf/solver.hpp"

namespace nlf {

// Per-snapshot leftmost crossings of a level along fixed-y rays. NaN marks a
// ray that never reaches the level.
struct front_track {
    std::vector<double> times;
    std::vector<double> rays;                  // y values (one per tracked row)
    double level = 0.5;
    std::vector<std::vector<double>> position;  // [time][ray]
};

std::vector<double> level_positions(const grid& g, const std::vector<double>& u, double level,
                                    const std::vector<double>& rays);

front_track track_front(const grid& g, const trajectory& traj, double level,
                        const std::vector<double>& rays);

struct speed_fit {
    double c_est = 0.0;
    double r2 = 0.0;
    int points = 0;
};

// Least-squares slope of (-position) against t over all finite samples.
speed_fit mean_speed(const front_track& track);

struct steady_config {
    scheme_config scheme;
    double steady_tol = 1e-6;   // per unit time, sup norm
    double horizon = 1000.0;
    double check_interval = 1.0;
    double probe_radius = 0.0;  // far-field proxy: |x| >= probe_radius (0 = skip)
    double far_field_eps = 0.05;
};

struct steady_result {
    std::vector<double> u;
    double residual_inf = 0.0;  // ||L u + f(u)||_inf
    bool converged = false;
    bool far_field_ok = true;
    double t_end = 0.0;
};

steady_result steady_state(const nonlocal_operator& op, const bistable& f,
                           std::vector<double> u_seed, const grid& g, const steady_config& cfg);

enum class invasion_class { invasion, blocking, indeterminate };
const char* to_string(invasion_class c);

// Probe region over which field minima are taken.
struct probe_region {
    std::string name;
    // accepts cells with |center - center_pt| <= radius; radius < 0 = all
    vec2 center_pt{0, 0};
    double radius = -1.0;
    bool is_pocket = false;  // the designated blocking pocket
};

struct blocking_report {
    invasion_class classification = invasion_class::indeterminate;
    double min_all = 0.0;
    double min_pocket = 1.0;
    bool has_pocket = false;
    double steady_residual = 0.0;
    std::vector<std::pair<std::string, double>> probe_minima;
};

blocking_report classify_liouville(const grid& g, const steady_result& steady,
                                   const std::vector<probe_region>& probes,
                                   double invasion_threshold = 0.95,
                                   double blocking_threshold = 0.5);

struct transition_diag_row {
    double A = 0.0;
    double front_gap = 0.0;  // sup over x1 + c t >= A of |u - u_inf|
    double rear_level = 0.0; // sup over x1 + c t <= -A of u
};

std::vector<transition_diag_row> transition_front_diag(const grid& g, const trajectory& traj,
                                                       const std::vector<double>& u_inf, double c,
                                                       const std::vector<double>& a_values);

// Moving-frame bounds on the super-level sets E_level(t): the constants are
// fitted on the first half of the snapshots and the containments
//   E(t) in {x1 >= gamma0 - c t}    and    {gamma1 >= x1 >= gamma2 - c t} in E(t)
// are then verified on the second half.
struct superlevel_report {
    double gamma0 = 0.0, gamma1 = 0.0, gamma2 = 0.0;
    int violations_upper = 0;   // part (i)
    int violations_lower = 0;   // part (ii)
    int verified_snapshots = 0;
};

superlevel_report superlevel_sandwich(const grid& g, const trajectory& traj, double c,
                                      double level);

}  // namespace nlf
