#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nlf/scenario.hpp"

using namespace nlf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitValidation = 3;
constexpr int kExitRuntime = 4;

scenario load_scenario(const std::string& config, const std::string& builtin,
                       const std::string& out_override) {
    scenario sc;
    if (!builtin.empty()) sc = builtin_scenario(builtin);
    else if (!config.empty()) sc = scenario_from_json_file(config);
    else throw config_parse_error("need --config or --builtin");
    if (!out_override.empty()) sc.out_dir = out_override;
    return sc;
}

int classify_exit(const std::exception& e) {
    if (dynamic_cast<const config_parse_error*>(&e)) return kExitConfig;
    if (dynamic_cast<const validation_error*>(&e) ||
        dynamic_cast<const disconnected_domain_error*>(&e) ||
        dynamic_cast<const empty_domain_error*>(&e) ||
        dynamic_cast<const placement_violation_error*>(&e) ||
        dynamic_cast<const zero_mass_error*>(&e))
        return kExitValidation;
    return kExitRuntime;
}

int cmd_run(const std::string& config, const std::string& builtin, const std::string& out,
            int threads, bool dry_run) {
    const scenario sc = load_scenario(config, builtin, out);
    const auto res = run_scenario(sc, threads, dry_run);
    if (dry_run) {
        std::printf("%s: validation ok (omega=%.4f, jdelta_inf=%.4f, covering=%.3f)\n",
                    sc.name.c_str(), res.validation.omega, res.jdelta_inf_interior,
                    res.covering_fraction);
        return kExitOk;
    }
    std::printf("%s: %s  min_u_inf=%.4f  steady_residual=%.3e%s\n", sc.name.c_str(),
                to_string(res.classification.classification), res.classification.min_all,
                res.steady.residual_inf, res.steady.converged ? "" : " (horizon reached)");
    if (res.speed_valid)
        std::printf("  mean speed c=%.6f (r2=%.6f)\n", res.speed.c_est, res.speed.r2);
    std::printf("  artifacts in %s\n", sc.out_dir.c_str());
    return kExitOk;
}

int cmd_wave(double theta, double scale, const std::string& profile, double radius, double dz,
             double zmax, const std::string& out) {
    const auto f = bistable::cubic(theta, scale);
    wave_config cfg;
    if (dz > 0.0) cfg.dz = dz;
    if (zmax > 0.0) cfg.z_max = zmax;
    const kernel_profile kp =
        profile == "uniform" ? kernel_profile::uniform : kernel_profile::gaussian;
    const auto rep = compute_wave_report(kp, radius, f, cfg);
    fnv1a h;
    h.feed("wave");
    h.feed(theta);
    h.feed(scale);
    h.feed(radius);
    h.feed(rep.profile.dz);
    h.feed(rep.profile.z_max);
    h.feed(profile);
    write_wave_outputs(rep, out, h.digest());
    std::printf("c=%.8f lambda=%.8f mu=%.8f A0=%.6f A1=%.6f z_star=%.4f residual=%.3e\n",
                rep.profile.c, rep.roots.lambda, rep.roots.mu, rep.tails.A0, rep.tails.A1,
                rep.z_star, rep.residual);
    std::printf("artifacts in %s\n", out.c_str());
    return kExitOk;
}

int cmd_check_sandwich(const std::string& config, const std::string& builtin,
                       const std::string& out, int threads) {
    scenario sc = load_scenario(config, builtin.empty() ? "sandwich-theta03" : builtin, out);
    sc.scheme.threads = threads;
    auto setup = prepare_scenario(sc, threads);

    auto rep = compute_wave_report(sc.profile, sc.kernel_radius, sc.f);
    const auto pair = make_sandwich(rep.profile, rep.roots, rep.tails, sc.f, rep.z_star,
                                    sc.kernel_radius);
    const double tol = 20.0 * (rep.profile.dz + sc.scheme.dt);
    const auto cert = certify_sandwich(setup.op, sc.f, setup.g, sc.dom.obs, pair,
                                       {pair.t1 - 5.0, pair.t1 - 2.0, pair.t1}, tol, sc.scheme);
    write_sandwich_outputs(cert, sc.out_dir, sc.config_hash());
    const bool pass = cert.ordering_ok && cert.cauchy_enclosed && cert.min_p_wplus >= -tol &&
                      cert.max_p_wminus <= tol;
    std::printf("sandwich: k=%.4f T1=%.3f tol=%.3f\n", cert.k_used, cert.t1, tol);
    std::printf("  min P[w+] = %.4e (>= %.3f)\n", cert.min_p_wplus, -tol);
    std::printf("  max P[w-] = %.4e (<= %.3f)\n", cert.max_p_wminus, tol);
    std::printf("  ordering 0<=w-<w+<=1: %s, cauchy enclosed: %s (slack %.2e)\n",
                cert.ordering_ok ? "ok" : "VIOLATED",
                cert.cauchy_enclosed ? "ok" : "VIOLATED", cert.enclosure_slack);
    std::printf("%s\n", pass ? "CERTIFIED" : "NOT CERTIFIED");
    return pass ? kExitOk : kExitRuntime;
}

int cmd_check_covering(const std::string& config, const std::string& builtin,
                       const std::string& out, int threads, int max_rounds) {
    scenario sc = load_scenario(config, builtin, out);
    auto kernel = radial_kernel::normalize(sc.profile, sc.kernel_radius, sc.dom.dim);
    grid g = grid::build_unchecked(sc.dom);
    cell_metric cm(g, sc.dom.obs, sc.met, kernel.radius(), threads);
    const auto rep = check_j_covering(
        cm, [&](double r) { return kernel(r) > 0.0; }, 0, max_rounds);
    std::printf("covered_fraction %.6f in %d rounds (n=%d)\n", rep.covered_fraction,
                rep.rounds_used, g.n());
    std::filesystem::create_directories(sc.out_dir);
    nlohmann::json j;
    char hash_hex[24];
    std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                  static_cast<unsigned long long>(sc.config_hash()));
    j["config_hash"] = hash_hex;
    j["covered_fraction"] = rep.covered_fraction;
    j["rounds_used"] = rep.rounds_used;
    std::ofstream os(sc.out_dir + "/covering_report.json", std::ios::trunc);
    os << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_report(const std::string& dir) {
    namespace fs = std::filesystem;
    std::printf("%-28s %-14s %10s %10s %12s %10s\n", "scenario", "class", "min_u", "c_est",
                "residual", "wall[s]");
    int found = 0;
    auto consume = [&](const fs::path& p) {
        std::ifstream is(p);
        if (!is) return;
        nlohmann::json j;
        try {
            is >> j;
        } catch (...) {
            return;
        }
        if (!j.contains("classification")) return;
        ++found;
        char c_col[16] = "-";
        if (j.contains("speed"))
            std::snprintf(c_col, sizeof c_col, "%.6f", j["speed"].value("c_est", 0.0));
        std::printf("%-28s %-14s %10.4f %10s %12.3e %10.1f\n", j.value("name", "?").c_str(),
                    j["classification"].get<std::string>().c_str(), j.value("min_u_inf", 0.0),
                    c_col, j["steady"].value("residual_inf", 0.0),
                    j["run"].value("wall_time", 0.0));
    };
    const fs::path root(dir);
    if (fs::exists(root / "report.json")) consume(root / "report.json");
    if (fs::is_directory(root)) {
        for (const auto& e : fs::directory_iterator(root)) {
            if (e.is_directory() && fs::exists(e.path() / "report.json"))
                consume(e.path() / "report.json");
        }
    }
    if (found == 0) std::printf("(no report.json found under %s)\n", dir.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nonlocal bistable front propagation around obstacles"};
    app.require_subcommand(1);
    app.fallthrough(true);

    int threads = default_threads();
    app.add_option("--threads", threads, "worker threads");

    std::string config, builtin, out;

    auto* run_cmd = app.add_subcommand("run", "run a scenario end to end");
    bool dry_run = false;
    run_cmd->add_option("--config", config, "scenario JSON");
    run_cmd->add_option("--builtin", builtin, "builtin scenario name");
    run_cmd->add_option("--out", out, "output directory override");
    run_cmd->add_flag("--dry-run", dry_run, "validate without computing");

    auto* wave_cmd = app.add_subcommand("wave", "solve the 1D traveling wave");
    double theta = 0.3, scale = 1.0, radius = 1.0, dz = 0.0, zmax = 0.0;
    std::string profile = "gaussian", wave_out = "out/wave";
    wave_cmd->add_option("--theta", theta, "cubic unstable zero");
    wave_cmd->add_option("--scale", scale, "cubic amplitude");
    wave_cmd->add_option("--profile", profile, "gaussian|uniform");
    wave_cmd->add_option("--radius", radius, "kernel radius");
    wave_cmd->add_option("--dz", dz, "grid step (default R/40)");
    wave_cmd->add_option("--zmax", zmax, "half window (default 20R)");
    wave_cmd->add_option("--out", wave_out, "output directory");

    auto* sw_cmd = app.add_subcommand("check-sandwich", "certify the sub/supersolution pair");
    sw_cmd->add_option("--config", config, "scenario JSON");
    sw_cmd->add_option("--builtin", builtin, "builtin scenario name");
    sw_cmd->add_option("--out", out, "output directory override");

    auto* cov_cmd = app.add_subcommand("check-covering", "iterate the kernel-support covering");
    int max_rounds = 10000;
    cov_cmd->add_option("--config", config, "scenario JSON");
    cov_cmd->add_option("--builtin", builtin, "builtin scenario name");
    cov_cmd->add_option("--out", out, "output directory override");
    cov_cmd->add_option("--max-rounds", max_rounds, "round cap");

    auto* rep_cmd = app.add_subcommand("report", "aggregate report.json files");
    std::string report_dir = "out";
    rep_cmd->add_option("dir", report_dir, "directory to scan");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return cmd_run(config, builtin, out, threads, dry_run);
        if (wave_cmd->parsed()) return cmd_wave(theta, scale, profile, radius, dz, zmax, wave_out);
        if (sw_cmd->parsed()) return cmd_check_sandwich(config, builtin, out, threads);
        if (cov_cmd->parsed()) return cmd_check_covering(config, builtin, out, threads, max_rounds);
        if (rep_cmd->parsed()) return cmd_report(report_dir);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return classify_exit(e);
    }
    return kExitOk;
}
