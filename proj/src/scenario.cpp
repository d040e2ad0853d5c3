#include "nlf/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <queue>
#include <sstream>

#include <json.hpp>

namespace nlf {

using nlohmann::json;

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hex16(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

obstacle obstacle_from_json(const json& j, double boundary_step) {
    if (j.is_null() || j.empty()) return {};
    if (j.contains("builtin")) {
        const std::string b = j.at("builtin");
        if (b == "disk") {
            const auto c = j.at("center");
            return make_disk_obstacle({c.at(0), c.at(1)}, j.at("radius"), boundary_step);
        }
        if (b == "ellipse_cluster") return make_ellipse_cluster(boundary_step);
        if (b == "annulus_channel")
            return make_annulus_channel(j.at("r_in"), j.at("r_out"), j.at("channel_width"),
                                        j.value("channel_angle", 0.0), boundary_step);
        if (b == "square_annulus_channel")
            return make_square_annulus_channel(j.at("half_out"), j.at("half_in"),
                                               j.at("channel_width"),
                                               j.value("channel_angle", 0.0), boundary_step);
        throw config_parse_error("unknown obstacle builtin: " + b);
    }
    std::vector<obstacle_part> parts;
    for (const auto& pj : j.value("parts", json::array())) {
        if (pj.contains("disk")) {
            const auto& dj = pj.at("disk");
            const auto c = dj.at("center");
            parts.emplace_back(disk{{c.at(0), c.at(1)}, dj.at("radius")});
        } else if (pj.contains("polygon")) {
            convex_polygon poly;
            for (const auto& vj : pj.at("polygon").at("vertices"))
                poly.v.push_back({vj.at(0), vj.at(1)});
            parts.emplace_back(std::move(poly));
        } else {
            throw config_parse_error("obstacle part must be a disk or a polygon");
        }
    }
    if (parts.empty()) return {};
    return obstacle(std::move(parts), boundary_step);
}

json normalized_config(const json& in) {
    json j;
    j["name"] = in.value("name", "custom");
    const auto& dj = in.at("domain");
    j["domain"]["xlim"] = dj.at("xlim");
    j["domain"]["ylim"] = dj.value("ylim", json::array({0.0, 1.0}));
    j["domain"]["h"] = dj.at("h");
    j["domain"]["dim"] = dj.value("dim", 2);
    j["boundary_step"] = in.value("boundary_step", dj.at("h").get<double>() / 2.0);
    j["obstacle"] = in.value("obstacle", json::object());
    {
        const auto mj = in.value("metric", json{{"kind", "euclidean"}});
        j["metric"]["kind"] = mj.value("kind", "euclidean");
        j["metric"]["weight"] = mj.value("weight", 0.5);
    }
    {
        const auto kj = in.value("kernel", json{{"profile", "gaussian"}, {"radius", 1.0}});
        j["kernel"]["profile"] = kj.value("profile", "gaussian");
        j["kernel"]["radius"] = kj.value("radius", 1.0);
    }
    {
        const auto fj = in.value("nonlinearity", json{{"kind", "cubic"}, {"theta", 0.3}});
        if (fj.value("kind", "cubic") != std::string("cubic"))
            throw config_parse_error("only the cubic nonlinearity is configurable from JSON");
        j["nonlinearity"]["kind"] = "cubic";
        j["nonlinearity"]["theta"] = fj.value("theta", 0.3);
        j["nonlinearity"]["scale"] = fj.value("scale", 1.0);
    }
    {
        const auto sj = in.value("scheme", json{{"type", "imex"}, {"dt", 0.05}});
        j["scheme"]["type"] = sj.value("type", "imex");
        j["scheme"]["dt"] = sj.value("dt", 0.05);
        j["scheme"]["cfl_guard"] = sj.value("cfl_guard", true);
        j["scheme"]["imex_tol"] = sj.value("imex_tol", 1e-10);
        j["scheme"]["imex_max_iter"] = sj.value("imex_max_iter", 500);
    }
    {
        const auto ij = in.value("initial", json{{"type", "heaviside"}, {"x1_0", 0.0}});
        j["initial"]["type"] = ij.value("type", "heaviside");
        j["initial"]["x1_0"] = ij.value("x1_0", 0.0);
        j["initial"]["smoothing_width"] =
            ij.value("smoothing_width", 2.0 * dj.at("h").get<double>());
        j["initial"]["t0"] = ij.value("t0", 0.0);
    }
    j["snapshots"] = in.value("snapshots", json::array({0.0, 10.0}));
    j["extend_planar"] = in.value("extend_planar", false);
    {
        const auto aj = in.value("analysis", json::object());
        j["analysis"]["levels"] = aj.value("levels", json::array({0.1, 0.5, 0.9}));
        j["analysis"]["rays"] = aj.value("rays", json::array({0.0}));
        j["analysis"]["A_values"] = aj.value("A_values", json::array({0, 2, 4, 8, 12, 16}));
        j["analysis"]["probes"] = aj.value("probes", json::array());
        j["analysis"]["steady_tol"] = aj.value("steady_tol", 1e-6);
        j["analysis"]["probe_radius"] = aj.value("probe_radius", 0.0);
        if (aj.contains("speed_window")) j["analysis"]["speed_window"] = aj.at("speed_window");
    }
    {
        const auto oj = in.value("output", json::object());
        j["output"]["dir"] = oj.value("dir", "out/" + j["name"].get<std::string>());
        j["output"]["heatmaps"] = oj.value("heatmaps", true);
    }
    return j;
}

scenario scenario_from_normalized(const json& j) {
    scenario sc;
    sc.name = j.at("name");
    sc.dom.xlim = {j["domain"]["xlim"].at(0), j["domain"]["xlim"].at(1)};
    sc.dom.ylim = {j["domain"]["ylim"].at(0), j["domain"]["ylim"].at(1)};
    sc.dom.h = j["domain"]["h"];
    sc.dom.dim = j["domain"]["dim"];
    sc.dom.obs = obstacle_from_json(j.at("obstacle"), j.at("boundary_step"));

    const std::string mk = j["metric"]["kind"];
    if (mk == "euclidean") sc.met.kind = metric_kind::euclidean;
    else if (mk == "geodesic") sc.met.kind = metric_kind::geodesic;
    else if (mk == "mix") sc.met.kind = metric_kind::mix;
    else throw config_parse_error("unknown metric kind: " + mk);
    sc.met.mix_weight = j["metric"]["weight"];

    const std::string kp = j["kernel"]["profile"];
    if (kp == "gaussian") sc.profile = kernel_profile::gaussian;
    else if (kp == "uniform") sc.profile = kernel_profile::uniform;
    else throw config_parse_error("unknown kernel profile: " + kp);
    sc.kernel_radius = j["kernel"]["radius"];

    sc.f = bistable::cubic(j["nonlinearity"]["theta"], j["nonlinearity"]["scale"]);

    const std::string st = j["scheme"]["type"];
    if (st == "imex") sc.scheme.scheme = scheme_kind::imex_euler;
    else if (st == "explicit") sc.scheme.scheme = scheme_kind::explicit_euler;
    else throw config_parse_error("unknown scheme type: " + st);
    sc.scheme.dt = j["scheme"]["dt"];
    sc.scheme.cfl_guard = j["scheme"]["cfl_guard"];
    sc.scheme.imex_tol = j["scheme"]["imex_tol"];
    sc.scheme.imex_max_iter = j["scheme"]["imex_max_iter"];

    const std::string it = j["initial"]["type"];
    if (it == "planar_wave") sc.planar_initial = true;
    else if (it != "heaviside") throw config_parse_error("unknown initial type: " + it);
    sc.x1_0 = j["initial"]["x1_0"];
    sc.smoothing_width = j["initial"]["smoothing_width"];
    sc.planar_t0 = j["initial"]["t0"];

    sc.snapshot_times = j.at("snapshots").get<std::vector<double>>();
    sc.extend_planar = j.at("extend_planar");

    sc.levels = j["analysis"]["levels"].get<std::vector<double>>();
    sc.rays = j["analysis"]["rays"].get<std::vector<double>>();
    sc.a_values = j["analysis"]["A_values"].get<std::vector<double>>();
    for (const auto& pj : j["analysis"]["probes"]) {
        probe_region pr;
        pr.name = pj.value("name", "probe");
        if (pj.value("all", false)) {
            pr.radius = -1.0;
        } else {
            pr.center_pt = {pj.at("center").at(0), pj.at("center").at(1)};
            pr.radius = pj.at("radius");
        }
        pr.is_pocket = pj.value("pocket", false);
        sc.probes.push_back(std::move(pr));
    }
    if (sc.probes.empty()) sc.probes.push_back({"window", {0, 0}, -1.0, false});
    sc.steady_tol = j["analysis"]["steady_tol"];
    sc.probe_radius = j["analysis"]["probe_radius"];
    if (j["analysis"].contains("speed_window"))
        sc.speed_window = std::make_pair(j["analysis"]["speed_window"].at(0).get<double>(),
                                         j["analysis"]["speed_window"].at(1).get<double>());

    sc.out_dir = j["output"]["dir"];
    sc.heatmaps = j["output"]["heatmaps"];

    sc.spec_json = j.dump();
    json geom;
    geom["domain"] = j["domain"];
    geom["boundary_step"] = j["boundary_step"];
    geom["obstacle"] = j["obstacle"];
    geom["metric"] = j["metric"];
    geom["kernel"] = j["kernel"];
    geom["extend_planar"] = j["extend_planar"];
    sc.geom_json = geom.dump();
    return sc;
}

}  // namespace

std::string scenario::canonical_json() const { return spec_json; }

std::uint64_t scenario::config_hash() const {
    fnv1a h;
    h.feed(spec_json);
    return h.digest();
}

std::uint64_t scenario::geometry_hash() const {
    fnv1a h;
    h.feed(geom_json);
    return h.digest();
}

scenario scenario_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw config_parse_error(std::string("config parse failed: ") + e.what());
    }
    try {
        return scenario_from_normalized(normalized_config(j));
    } catch (const json::exception& e) {
        throw config_parse_error(std::string("config field error: ") + e.what());
    }
}

scenario scenario_from_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw config_parse_error("cannot open config " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return scenario_from_json_text(ss.str());
}

std::vector<std::string> builtin_names() {
    return {"fig-disk", "fig-annulus", "fig-square-annulus-geo", "fig-square-annulus-euclid",
            "fig-ellipses", "speed-free", "sandwich-theta03"};
}

scenario builtin_scenario(const std::string& name) {
    json j;
    j["name"] = name;
    j["kernel"] = {{"profile", "gaussian"}, {"radius", 1.0}};
    j["nonlinearity"] = {{"kind", "cubic"}, {"theta", 0.3}, {"scale", 1.0}};
    if (name == "fig-disk") {
        j["domain"] = {{"xlim", {-15, 15}}, {"ylim", {-15, 15}}, {"h", 0.25}, {"dim", 2}};
        j["obstacle"] = {{"builtin", "disk"}, {"center", {0, 0}}, {"radius", 4.0}};
        j["metric"] = {{"kind", "euclidean"}};
        j["scheme"] = {{"type", "imex"}, {"dt", 0.05}};
        j["initial"] = {{"type", "heaviside"}, {"x1_0", 10.0}, {"smoothing_width", 0.5}};
        j["snapshots"] = {0, 150, 300, 450, 600, 750, 900, 1000};
        j["analysis"] = {{"levels", {0.1, 0.5, 0.9}},
                         {"rays", {-6.0, 6.0}},
                         {"A_values", {0, 2, 4, 8, 12, 16}},
                         {"probes", json::array({{{"name", "window"}, {"all", true}}})},
                         {"probe_radius", 12.0},
                         {"speed_window", {0.0, 300.0}}};
    } else if (name == "fig-annulus") {
        j["domain"] = {{"xlim", {-11, 11}}, {"ylim", {-11, 11}}, {"h", 0.25}, {"dim", 2}};
        j["obstacle"] = {{"builtin", "annulus_channel"}, {"r_in", 2.0},   {"r_out", 5.0},
                         {"channel_width", 0.6},         {"channel_angle", 0.0}};
        j["metric"] = {{"kind", "euclidean"}};
        j["scheme"] = {{"type", "imex"}, {"dt", 0.1}};
        j["initial"] = {{"type", "heaviside"}, {"x1_0", 8.0}, {"smoothing_width", 0.5}};
        j["snapshots"] = {0, 40, 80, 120, 160, 200, 240, 280};
        j["analysis"] = {
            {"levels", {0.1, 0.5, 0.9}},
            {"rays", {-8.0, 8.0}},
            {"A_values", {0, 2, 4, 8, 12}},
            {"probes",
             json::array({{{"name", "window"}, {"all", true}},
                          {{"name", "pocket"}, {"center", {0, 0}}, {"radius", 1.5},
                           {"pocket", true}},
                          {{"name", "outside"}, {"center", {0, 8.0}}, {"radius", 2.0}}})},
            {"speed_window", {0.0, 160.0}}};
    } else if (name == "fig-square-annulus-geo" || name == "fig-square-annulus-euclid") {
        // bar thickness 0.5 < R_J, so euclidean jumps across the frame carry
        // real weight while geodesic paths must take the channel
        j["domain"] = {{"xlim", {-5, 5}}, {"ylim", {-5, 5}}, {"h", 0.25}, {"dim", 2}};
        j["obstacle"] = {{"builtin", "square_annulus_channel"}, {"half_out", 2.7},
                         {"half_in", 2.2},                      {"channel_width", 0.6},
                         {"channel_angle", 0.0}};
        j["metric"] = {{"kind", name == "fig-square-annulus-geo" ? "geodesic" : "euclidean"}};
        j["scheme"] = {{"type", "imex"}, {"dt", 0.1}};
        j["initial"] = {{"type", "heaviside"}, {"x1_0", 4.0}, {"smoothing_width", 0.5}};
        j["snapshots"] = {0, 300, 700, 1100, 1200, 1300, 1500, 1900, 2000};
        j["analysis"] = {
            {"levels", {0.1, 0.5, 0.9}},
            {"rays", {-4.0, 4.0}},
            {"A_values", {0, 1, 2, 4}},
            {"speed_window", {0.0, 120.0}},
            {"probes",
             json::array({{{"name", "window"}, {"all", true}},
                          {{"name", "pocket"}, {"center", {0, 0}}, {"radius", 1.8},
                           {"pocket", true}},
                          {{"name", "outside"}, {"center", {0, 4.0}}, {"radius", 0.9}}})}};
    } else if (name == "fig-ellipses") {
        // the cluster geometry is a documented stand-in; outputs qualitative
        j["domain"] = {{"xlim", {-50, 30}}, {"ylim", {-15, 15}}, {"h", 0.25}, {"dim", 2}};
        j["obstacle"] = {{"builtin", "ellipse_cluster"}};
        j["metric"] = {{"kind", "euclidean"}};
        j["scheme"] = {{"type", "imex"}, {"dt", 0.075}};
        j["initial"] = {{"type", "heaviside"}, {"x1_0", 25.0}, {"smoothing_width", 0.5}};
        j["snapshots"] = {0, 50, 100, 200, 300, 400, 450, 500, 550, 600, 650, 700, 750};
        j["analysis"] = {{"levels", {0.1, 0.5, 0.9}},
                         {"rays", {-12.0, 12.0}},
                         {"A_values", {0, 4, 8, 16}},
                         {"probes", json::array({{{"name", "window"}, {"all", true}}})},
                         {"speed_window", {50.0, 500.0}}};
    } else if (name == "speed-free") {
        j["domain"] = {{"xlim", {-16, 8}}, {"ylim", {-6, 6}}, {"h", 0.25}, {"dim", 2}};
        j["obstacle"] = json::object();
        j["metric"] = {{"kind", "euclidean"}};
        j["scheme"] = {{"type", "explicit"}, {"dt", 0.5}};
        j["initial"] = {{"type", "heaviside"}, {"x1_0", 4.0}, {"smoothing_width", 0.5}};
        j["snapshots"] = {30, 40, 50, 60, 70, 80, 90, 100};
        j["extend_planar"] = true;
        j["analysis"] = {{"levels", {0.5}},
                         {"rays", {-1.0, 0.0, 1.0}},
                         {"A_values", {0, 2, 4, 8}},
                         {"probes", json::array({{{"name", "window"}, {"all", true}}})},
                         {"speed_window", {30.0, 100.0}}};
    } else if (name == "sandwich-theta03") {
        j["domain"] = {{"xlim", {-15, 15}}, {"ylim", {-6, 6}}, {"h", 0.25}, {"dim", 2}};
        j["obstacle"] = {{"builtin", "disk"}, {"center", {-9.0, 0.0}}, {"radius", 4.0}};
        j["metric"] = {{"kind", "euclidean"}};
        j["scheme"] = {{"type", "imex"}, {"dt", 0.05}};
        j["initial"] = {{"type", "heaviside"}, {"x1_0", 10.0}, {"smoothing_width", 0.5}};
        j["snapshots"] = {0, 50, 100};
        j["analysis"] = {{"levels", {0.5}},
                         {"rays", {-5.0, 5.0}},
                         {"A_values", {0, 2, 4}},
                         {"probes", json::array({{{"name", "window"}, {"all", true}}})}};
    } else {
        throw config_parse_error("unknown builtin scenario: " + name);
    }
    j["output"] = {{"dir", "out/" + name}, {"heatmaps", true}};
    return scenario_from_normalized(normalized_config(j));
}

// ---------------------------------------------------------------------------
// orchestration

scenario_setup prepare_scenario(const scenario& sc, int threads) {
    auto kernel = radial_kernel::normalize(sc.profile, sc.kernel_radius, sc.dom.dim);

    if (!sc.dom.obs.empty()) {
        const auto bb = sc.dom.obs.bbox();
        const double r = kernel.radius();
        const bool margin_ok =
            bb[0] - r >= sc.dom.xlim[0] && bb[1] + r <= sc.dom.xlim[1] &&
            (sc.dom.dim == 1 || (bb[2] - r >= sc.dom.ylim[0] && bb[3] + r <= sc.dom.ylim[1]));
        if (!margin_ok)
            throw validation_error(
                "(C1) the box must contain the obstacle with one kernel radius of margin");
    }

    grid g = grid::build(sc.dom);  // (C1) connectivity
    cell_metric cm(g, sc.dom.obs, sc.met, kernel.radius(), threads);

    std::optional<nonlocal_operator> op;
    const char* cache_dir = std::getenv("NONLOC_CACHE_DIR");
    std::string cache_path;
    if (cache_dir && *cache_dir) {
        std::filesystem::create_directories(cache_dir);
        cache_path = std::string(cache_dir) + "/" + hex16(sc.geometry_hash()) + ".nlw";
        op = nonlocal_operator::load(cache_path, g.n(), sc.geometry_hash(), kernel.radius());
    }
    if (!op) {
        op = nonlocal_operator::assemble(g, kernel, cm, threads, sc.geometry_hash(),
                                         sc.extend_planar);
        if (!cache_path.empty()) op->save(cache_path);
    }

    auto jd = jdelta_field(*op, g, kernel.radius());
    auto rep = validate(sc.f, jd.inf_interior, std::min(jd.sup, 1.0 + 1e-9));
    if (!rep.failure.empty()) throw validation_error(rep.failure);

    // (C3) J-covering on the discrete support graph
    std::vector<char> seen(g.n(), 0);
    std::queue<int> bfs;
    bfs.push(0);
    seen[0] = 1;
    int covered = 1;
    while (!bfs.empty()) {
        const int i = bfs.front();
        bfs.pop();
        const auto [cols, ws] = op->row(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const int j = static_cast<int>(cols[k]);
            if (ws[k] > 0.0 && !seen[j]) {
                seen[j] = 1;
                ++covered;
                bfs.push(j);
            }
        }
    }
    const double frac = static_cast<double>(covered) / g.n();
    if (frac < 1.0)
        throw validation_error("(C3) J-covering fails: covered fraction " + std::to_string(frac));

    return {std::move(g), kernel, std::move(*op), std::move(jd), rep, frac};
}

namespace {

void write_csv_snapshot(const std::string& path, const grid& g, const cauchy_state& s,
                        std::uint64_t hash) {
    std::ofstream os(path, std::ios::trunc);
    os << "# config=" << hex16(hash) << "\n";
    os << (g.dim() == 2 ? "t,x,y,u\n" : "t,x,u\n");
    for (int i = 0; i < g.n(); ++i) {
        const vec2 c = g.center(i);
        os << fmt17(s.t) << ',' << fmt17(c.x);
        if (g.dim() == 2) os << ',' << fmt17(c.y);
        os << ',' << fmt17(s.u[i]) << '\n';
    }
}

void write_pgm(const std::string& path, const grid& g, const std::vector<double>* u,
               std::uint64_t hash, bool mask) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os << "P5\n# config=" << hex16(hash) << "\n" << g.nx() << " " << std::max(1, g.ny())
       << "\n255\n";
    for (int iy = std::max(1, g.ny()) - 1; iy >= 0; --iy) {
        for (int ix = 0; ix < g.nx(); ++ix) {
            const int i = g.cell_at(ix, iy);
            unsigned char px;
            if (mask) {
                px = i >= 0 ? 255 : 0;
            } else if (i < 0) {
                px = 128;
            } else {
                const double v = std::clamp((*u)[i], 0.0, 1.0);
                px = static_cast<unsigned char>(std::lround(v * 255.0));
            }
            os.write(reinterpret_cast<const char*>(&px), 1);
        }
    }
}

void write_front_csv(const std::string& path, const grid& g, const trajectory& traj,
                     const std::vector<double>& levels, const std::vector<double>& rays,
                     std::uint64_t hash) {
    std::ofstream os(path, std::ios::trunc);
    os << "# config=" << hex16(hash) << "\n";
    os << "t,ray_y,lambda,x1_position\n";
    for (const auto& s : traj.snapshots) {
        for (double level : levels) {
            const auto pos = level_positions(g, s.u, level, rays);
            for (std::size_t r = 0; r < rays.size(); ++r) {
                os << fmt17(s.t) << ',' << fmt17(rays[r]) << ',' << fmt17(level) << ','
                   << (std::isnan(pos[r]) ? std::string("nan") : fmt17(pos[r])) << '\n';
            }
        }
    }
}

}  // namespace

scenario_result run_scenario(const scenario& sc, int threads, bool dry_run, bool write_outputs) {
    scenario sc_local = sc;
    sc_local.scheme.threads = threads;

    auto setup = prepare_scenario(sc_local, threads);
    scenario_result res;
    res.validation = setup.validation;
    res.jdelta_inf = setup.jd.inf;
    res.jdelta_inf_interior = setup.jd.inf_interior;
    res.jdelta_sup = setup.jd.sup;
    res.covering_fraction = setup.covering_fraction;
    res.assembly = setup.op.stats;
    res.config_hash = sc_local.config_hash();
    if (dry_run) return res;

    const grid& g = setup.g;
    std::vector<double> u0;
    if (sc_local.planar_initial) {
        const auto p = solve_profile(setup.kernel, sc_local.f);
        u0 = planar_wave_initial(g, p, sc_local.planar_t0);
    } else {
        u0 = heaviside_initial(g, sc_local.x1_0, sc_local.smoothing_width);
    }

    const double t_end =
        sc_local.snapshot_times.empty() ? 0.0 : *std::max_element(sc_local.snapshot_times.begin(),
                                                                  sc_local.snapshot_times.end());
    res.traj = run(setup.op, sc_local.f, std::move(u0), 0.0, t_end, sc_local.snapshot_times,
                   sc_local.scheme, res.validation.omega);

    // stationarity check at the horizon
    steady_config scfg;
    scfg.scheme = sc_local.scheme;
    scfg.steady_tol = sc_local.steady_tol;
    scfg.horizon = 5.0;
    scfg.probe_radius = sc_local.probe_radius;
    res.steady = steady_state(setup.op, sc_local.f, res.traj.snapshots.back().u, g, scfg);
    res.steady.t_end += t_end;

    res.classification = classify_liouville(g, res.steady, sc_local.probes);

    // mean speed over the requested snapshot window
    {
        front_track track;
        track.level = 0.5;
        track.rays = sc_local.rays;
        for (const auto& s : res.traj.snapshots) {
            if (sc_local.speed_window &&
                (s.t < sc_local.speed_window->first - 1e-9 ||
                 s.t > sc_local.speed_window->second + 1e-9))
                continue;
            track.times.push_back(s.t);
            track.position.push_back(level_positions(g, s.u, 0.5, sc_local.rays));
        }
        int finite = 0;
        for (const auto& row : track.position)
            for (double v : row)
                if (!std::isnan(v)) ++finite;
        if (finite >= 5) {
            res.speed = mean_speed(track);
            res.speed_valid = true;
        }
    }

    if (res.speed_valid) {
        res.diag = transition_front_diag(g, res.traj, res.steady.u, res.speed.c_est,
                                         sc_local.a_values);
        if (res.traj.snapshots.size() >= 4) {
            for (double level : sc_local.levels)
                res.superlevels.push_back(
                    superlevel_sandwich(g, res.traj, res.speed.c_est, level));
        }
    }

    if (write_outputs) {
        namespace fs = std::filesystem;
        fs::create_directories(sc_local.out_dir);
        const std::uint64_t hash = res.config_hash;
        for (std::size_t k = 0; k < res.traj.snapshots.size(); ++k) {
            char name[64];
            std::snprintf(name, sizeof name, "snapshot_%02zu.csv", k);
            write_csv_snapshot(sc_local.out_dir + "/" + name, g, res.traj.snapshots[k], hash);
            if (sc_local.heatmaps) {
                std::snprintf(name, sizeof name, "snapshot_%02zu.pgm", k);
                write_pgm(sc_local.out_dir + "/" + name, g, &res.traj.snapshots[k].u, hash,
                          false);
            }
        }
        if (sc_local.heatmaps) write_pgm(sc_local.out_dir + "/mask.pgm", g, nullptr, hash, true);
        write_front_csv(sc_local.out_dir + "/front_track.csv", g, res.traj, sc_local.levels,
                        sc_local.rays, hash);

        json rep;
        rep["name"] = sc_local.name;
        rep["config_hash"] = hex16(hash);
        rep["classification"] = to_string(res.classification.classification);
        rep["min_u_inf"] = res.classification.min_all;
        for (const auto& [nm, lo] : res.classification.probe_minima)
            rep["probe_minima"][nm] = std::isnan(lo) ? json() : json(lo);
        rep["steady"] = {{"residual_inf", res.steady.residual_inf},
                         {"converged", res.steady.converged},
                         {"far_field_ok", res.steady.far_field_ok},
                         {"t_end", res.steady.t_end}};
        if (res.speed_valid)
            rep["speed"] = {{"c_est", res.speed.c_est}, {"r2", res.speed.r2},
                            {"points", res.speed.points}};
        rep["run"] = {{"t_final", res.traj.snapshots.back().t},
                      {"min_u", res.traj.min_u},
                      {"max_u", res.traj.max_u},
                      {"monotone_fraction", res.traj.monotone_fraction},
                      {"steps", res.traj.steps},
                      {"wall_time", res.traj.wall_seconds}};
        rep["validation"] = {{"c2_ok", res.validation.c2_ok},
                             {"c5_ok", res.validation.c5_ok},
                             {"nondegenerate_ok", res.validation.nondegenerate_ok},
                             {"omega", res.validation.omega},
                             {"jdelta_inf", res.jdelta_inf},
                             {"jdelta_inf_interior", res.jdelta_inf_interior},
                             {"jdelta_sup", res.jdelta_sup},
                             {"covering_fraction", res.covering_fraction}};
        rep["assembly"] = {{"avg_neighbors", res.assembly.avg_neighbors},
                           {"build_seconds", res.assembly.build_seconds},
                           {"from_cache", res.assembly.from_cache}};
        for (const auto& row : res.diag)
            rep["transition_diag"].push_back(
                {{"A", row.A}, {"front_gap", row.front_gap}, {"rear_level", row.rear_level}});
        for (std::size_t k = 0; k < res.superlevels.size(); ++k) {
            const auto& sl = res.superlevels[k];
            rep["superlevel"].push_back({{"level", sc_local.levels[k]},
                                         {"gamma0", sl.gamma0},
                                         {"gamma1", sl.gamma1},
                                         {"gamma2", sl.gamma2},
                                         {"violations_upper", sl.violations_upper},
                                         {"violations_lower", sl.violations_lower}});
        }
        std::ofstream os(sc_local.out_dir + "/report.json", std::ios::trunc);
        os << rep.dump(2) << "\n";
    }
    return res;
}

wave_report compute_wave_report(kernel_profile profile, double radius, const bistable& f,
                                wave_config cfg) {
    wave_report rep;
    const auto k = radial_kernel::normalize(profile, radius, 2);
    rep.profile = solve_profile(k, f, cfg);
    const auto cw = make_conv_weights(marginal_kernel::marginal(k, rep.profile.dz),
                                      rep.profile.dz);
    rep.roots = characteristic_roots(cw, rep.profile.c, f);
    rep.tails = tail_constants(rep.profile, rep.roots);
    rep.profile.set_tail_rates(rep.roots.lambda, rep.tails.mu_fit);
    rep.z_star = convexity_threshold(rep.profile, rep.roots);
    rep.residual = profile_residual_inf(rep.profile, k, f);
    return rep;
}

void write_wave_outputs(const wave_report& rep, const std::string& dir, std::uint64_t hash) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir + "/profile.csv", std::ios::trunc);
        os << "# config=" << hex16(hash) << "\n";
        os << "z,phi\n";
        for (int i = 0; i < rep.profile.points(); ++i)
            os << fmt17(rep.profile.z_of(i)) << ',' << fmt17(rep.profile.phi[i]) << '\n';
    }
    json j;
    j["config_hash"] = hex16(hash);
    j["c"] = rep.profile.c;
    j["lambda"] = rep.roots.lambda;
    j["mu"] = rep.roots.mu;
    j["A0"] = rep.tails.A0;
    j["A1"] = rep.tails.A1;
    j["z_star"] = rep.z_star;
    j["residual"] = rep.residual;
    j["mu_fit"] = rep.tails.mu_fit;
    j["lambda_fit"] = rep.tails.lambda_fit;
    j["fit_error"] = rep.tails.fit_error;
    std::ofstream os(dir + "/wave_report.json", std::ios::trunc);
    os << j.dump(2) << "\n";
}

void write_sandwich_outputs(const sandwich_report& rep, const std::string& dir,
                            std::uint64_t hash) {
    std::filesystem::create_directories(dir);
    json j;
    j["config_hash"] = hex16(hash);
    j["min_P_w_plus"] = rep.min_p_wplus;
    j["max_P_w_minus"] = rep.max_p_wminus;
    j["ordering_ok"] = rep.ordering_ok;
    j["cauchy_enclosed"] = rep.cauchy_enclosed;
    j["enclosure_slack"] = rep.enclosure_slack;
    j["t1"] = rep.t1;
    j["k"] = rep.k_used;
    j["sampled_times"] = rep.sampled_times;
    std::ofstream os(dir + "/sandwich_report.json", std::ios::trunc);
    os << j.dump(2) << "\n";
}

}  // namespace nlf
