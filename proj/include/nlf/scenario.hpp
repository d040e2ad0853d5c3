#pragma once

#include <optional>
#include <string>

#include "nlf/analysis.hpp"
#include "nlf/subsuper.hpp"

namespace nlf {

struct config_parse_error : error { using error::error; };

struct scenario {
    std::string name = "custom";
    domain dom;
    metric met;
    kernel_profile profile = kernel_profile::gaussian;
    double kernel_radius = 1.0;
    bistable f = bistable::cubic(0.3);
    scheme_config scheme;
    bool extend_planar = false;

    // initial data
    bool planar_initial = false;
    double x1_0 = 0.0;
    double smoothing_width = 0.0;
    double planar_t0 = 0.0;

    std::vector<double> snapshot_times;

    // analysis
    std::vector<double> levels{0.1, 0.5, 0.9};
    std::vector<double> rays{0.0};
    std::vector<double> a_values{0, 2, 4, 8, 12, 16};
    std::vector<probe_region> probes;
    double steady_tol = 1e-6;
    double probe_radius = 0.0;
    std::optional<std::pair<double, double>> speed_window;  // snapshot times used in the fit

    std::string out_dir = "out";
    bool heatmaps = true;

    // canonical (sorted-key, defaults-filled) serializations set by the
    // factory functions; the hashes key outputs and operator caches
    std::string spec_json;
    std::string geom_json;

    std::string canonical_json() const;  // sorted-key dump used for hashing
    std::uint64_t config_hash() const;
    std::uint64_t geometry_hash() const;  // domain+obstacle+metric+kernel (cache key)
};

scenario scenario_from_json_file(const std::string& path);
scenario scenario_from_json_text(const std::string& text);
scenario builtin_scenario(const std::string& name);
std::vector<std::string> builtin_names();

struct scenario_result {
    blocking_report classification;
    speed_fit speed;
    bool speed_valid = false;
    steady_result steady;
    std::vector<transition_diag_row> diag;
    std::vector<superlevel_report> superlevels;  // one per level
    trajectory traj;
    validation_report validation;
    double jdelta_inf = 0.0, jdelta_inf_interior = 0.0, jdelta_sup = 0.0;
    double covering_fraction = 0.0;
    assembly_stats assembly;
    std::uint64_t config_hash = 0;
};

// validate -> assemble -> integrate -> analyze -> write artifacts.
// dry_run stops after validation. Throws; the CLI maps exceptions to codes.
scenario_result run_scenario(const scenario& sc, int threads, bool dry_run,
                             bool write_outputs = true);

// validation + grid/operator assembly shared by the subcommands
struct scenario_setup {
    grid g;
    radial_kernel kernel;
    nonlocal_operator op;
    jdelta_stats jd;
    validation_report validation;
    double covering_fraction = 1.0;
};
scenario_setup prepare_scenario(const scenario& sc, int threads);

// wave subcommand payload
struct wave_report {
    wave_profile profile;
    characteristic_roots_result roots;
    tail_constants_result tails;
    double z_star = 0.0;
    double residual = 0.0;
};
wave_report compute_wave_report(kernel_profile profile, double radius, const bistable& f,
                                wave_config cfg = {});

void write_wave_outputs(const wave_report& rep, const std::string& dir, std::uint64_t hash);
void write_sandwich_outputs(const sandwich_report& rep, const std::string& dir,
                            std::uint64_t hash);

}  // namespace nlf
