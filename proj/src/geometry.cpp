#include "nlf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <queue>

namespace nlf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double seg_point_dist(vec2 a, vec2 b, vec2 p) {
    const vec2 d = b - a;
    const double dd = dot(d, d);
    if (dd == 0.0) return dist(a, p);
    double t = dot(p - a, d) / dd;
    t = std::clamp(t, 0.0, 1.0);
    return dist(a + t * d, p);
}

std::array<double, 4> poly_bbox(const convex_polygon& poly) {
    double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
    for (const auto& p : poly.v) {
        x0 = std::min(x0, p.x); x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y); y1 = std::max(y1, p.y);
    }
    return {x0, x1, y0, y1};
}

double poly_scale2(const convex_polygon& poly) {
    const auto b = poly_bbox(poly);
    const double dx = b[1] - b[0], dy = b[3] - b[2];
    return dx * dx + dy * dy;
}

void check_convex_ccw(const convex_polygon& poly) {
    const std::size_t n = poly.v.size();
    if (n < 3) throw validation_error("polygon needs at least 3 vertices");
    const double eps = 1e-12 * poly_scale2(poly);
    double area2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const vec2 a = poly.v[i];
        const vec2 b = poly.v[(i + 1) % n];
        const vec2 c = poly.v[(i + 2) % n];
        const double turn = cross(b - a, c - b);
        if (turn <= eps) throw validation_error("polygon is not strictly convex/ccw");
        area2 += cross(a, b);
    }
    if (area2 <= 0.0) throw validation_error("polygon is not counterclockwise");
}

bool poly_contains_closed(const convex_polygon& poly, vec2 p, double eps) {
    const std::size_t n = poly.v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const vec2 a = poly.v[i];
        const vec2 b = poly.v[(i + 1) % n];
        if (cross(b - a, p - a) < -eps) return false;
    }
    return true;
}

bool poly_contains_strict(const convex_polygon& poly, vec2 p, double eps) {
    const std::size_t n = poly.v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const vec2 a = poly.v[i];
        const vec2 b = poly.v[(i + 1) % n];
        if (cross(b - a, p - a) <= eps) return false;
    }
    return true;
}

// Open segment (a,b) meets the eps-shrunken interior of the convex polygon.
// Cyrus-Beck clipping: the surviving parameter interval must have positive
// length for the segment to actually pass through the interior; grazing a
// vertex or running along an edge leaves a degenerate interval.
bool seg_hits_poly_interior(const convex_polygon& poly, vec2 a, vec2 b, double eps) {
    double lo = 0.0, hi = 1.0;
    const vec2 d = b - a;
    const std::size_t n = poly.v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const vec2 va = poly.v[i];
        const vec2 e = poly.v[(i + 1) % n] - va;
        const double g0 = cross(e, a - va);
        const double gd = cross(e, d);
        // keep g0 + t*gd >= eps
        if (gd == 0.0) {
            if (g0 < eps) return false;
        } else if (gd > 0.0) {
            lo = std::max(lo, (eps - g0) / gd);
        } else {
            hi = std::min(hi, (eps - g0) / gd);
        }
        if (lo >= hi) return false;
    }
    return hi - lo > 1e-9;
}

double poly_distance(const convex_polygon& poly, vec2 p, double eps) {
    if (poly_contains_closed(poly, p, eps)) return 0.0;
    double best = kInf;
    const std::size_t n = poly.v.size();
    for (std::size_t i = 0; i < n; ++i)
        best = std::min(best, seg_point_dist(poly.v[i], poly.v[(i + 1) % n], p));
    return best;
}

convex_polygon polygonize_disk(const disk& dsk, double step) {
    const double per = 2.0 * std::numbers::pi * dsk.radius;
    const int m = std::max(12, static_cast<int>(std::ceil(per / step)));
    convex_polygon poly;
    poly.v.reserve(m);
    for (int k = 0; k < m; ++k) {
        const double th = 2.0 * std::numbers::pi * k / m;
        poly.v.push_back(dsk.center + vec2{dsk.radius * std::cos(th), dsk.radius * std::sin(th)});
    }
    return poly;
}

convex_polygon polygonize_ellipse(vec2 center, double a, double b, double step) {
    const double per = std::numbers::pi * (3.0 * (a + b) - std::sqrt((3.0 * a + b) * (a + 3.0 * b)));
    const int m = std::max(12, static_cast<int>(std::ceil(per / step)));
    convex_polygon poly;
    poly.v.reserve(m);
    for (int k = 0; k < m; ++k) {
        const double t = 2.0 * std::numbers::pi * k / m;
        poly.v.push_back(center + vec2{a * std::cos(t), b * std::sin(t)});
    }
    return poly;
}

bool bbox_overlaps_segment(const std::array<double, 4>& bb, vec2 a, vec2 b) {
    const double x0 = std::min(a.x, b.x), x1 = std::max(a.x, b.x);
    const double y0 = std::min(a.y, b.y), y1 = std::max(a.y, b.y);
    return x1 >= bb[0] && x0 <= bb[1] && y1 >= bb[2] && y0 <= bb[3];
}

}  // namespace

obstacle::obstacle(std::vector<obstacle_part> parts, double boundary_step)
    : parts_(std::move(parts)), boundary_step_(boundary_step) {
    if (boundary_step_ <= 0.0) throw validation_error("boundary step must be positive");
    poly_.reserve(parts_.size());
    for (const auto& part : parts_) {
        if (const auto* d = std::get_if<disk>(&part)) {
            if (d->radius <= 0.0) throw validation_error("disk radius must be positive");
            poly_.push_back(polygonize_disk(*d, boundary_step_));
        } else {
            poly_.push_back(std::get<convex_polygon>(part));
        }
        check_convex_ccw(poly_.back());
        part_bbox_.push_back(poly_bbox(poly_.back()));
    }
    if (!poly_.empty()) {
        bbox_ = {kInf, -kInf, kInf, -kInf};
        for (const auto& bb : part_bbox_) {
            bbox_[0] = std::min(bbox_[0], bb[0]);
            bbox_[1] = std::max(bbox_[1], bb[1]);
            bbox_[2] = std::min(bbox_[2], bb[2]);
            bbox_[3] = std::max(bbox_[3], bb[3]);
        }
        // disks stick out past their inscribed polygons
        for (const auto& part : parts_) {
            if (const auto* d = std::get_if<disk>(&part)) {
                bbox_[0] = std::min(bbox_[0], d->center.x - d->radius);
                bbox_[1] = std::max(bbox_[1], d->center.x + d->radius);
                bbox_[2] = std::min(bbox_[2], d->center.y - d->radius);
                bbox_[3] = std::max(bbox_[3], d->center.y + d->radius);
            }
        }
    }
}

bool obstacle::contains(vec2 p) const {
    for (std::size_t i = 0; i < parts_.size(); ++i) {
        if (const auto* d = std::get_if<disk>(&parts_[i])) {
            if (dist(p, d->center) <= d->radius) return true;
        } else {
            const auto& poly = std::get<convex_polygon>(parts_[i]);
            if (poly_contains_closed(poly, p, 1e-12 * poly_scale2(poly))) return true;
        }
    }
    return false;
}

bool obstacle::contains_interior(vec2 p) const {
    for (std::size_t i = 0; i < parts_.size(); ++i) {
        if (const auto* d = std::get_if<disk>(&parts_[i])) {
            if (dist(p, d->center) < d->radius) return true;
        } else {
            const auto& poly = std::get<convex_polygon>(parts_[i]);
            if (poly_contains_strict(poly, p, 1e-12 * poly_scale2(poly))) return true;
        }
    }
    return false;
}

bool obstacle::poly_contains_interior(vec2 p) const {
    for (const auto& poly : poly_) {
        if (poly_contains_strict(poly, p, 1e-12 * poly_scale2(poly))) return true;
    }
    return false;
}

bool obstacle::segment_clear(vec2 a, vec2 b) const {
    for (std::size_t i = 0; i < parts_.size(); ++i) {
        if (const auto* d = std::get_if<disk>(&parts_[i])) {
            if (seg_point_dist(a, b, d->center) < d->radius) return false;
        } else {
            const auto& poly = std::get<convex_polygon>(parts_[i]);
            if (!bbox_overlaps_segment(part_bbox_[i], a, b)) continue;
            if (seg_hits_poly_interior(poly, a, b, 1e-12 * poly_scale2(poly))) return false;
        }
    }
    return true;
}

bool obstacle::segment_clear_poly(vec2 a, vec2 b) const {
    for (std::size_t i = 0; i < poly_.size(); ++i) {
        if (!bbox_overlaps_segment(part_bbox_[i], a, b)) continue;
        if (seg_hits_poly_interior(poly_[i], a, b, 1e-12 * poly_scale2(poly_[i]))) return false;
    }
    return true;
}

double obstacle::distance_to(vec2 p) const {
    double best = kInf;
    for (std::size_t i = 0; i < parts_.size(); ++i) {
        if (const auto* d = std::get_if<disk>(&parts_[i])) {
            best = std::min(best, std::max(0.0, dist(p, d->center) - d->radius));
        } else {
            const auto& poly = std::get<convex_polygon>(parts_[i]);
            best = std::min(best, poly_distance(poly, p, 1e-12 * poly_scale2(poly)));
        }
        if (best == 0.0) return 0.0;
    }
    return best;
}

// ---------------------------------------------------------------------------
// grid

grid grid::build(const domain& d) { return build_impl(d, true); }
grid grid::build_unchecked(const domain& d) { return build_impl(d, false); }

grid grid::build_impl(const domain& d, bool require_connected) {
    if (d.h <= 0.0) throw validation_error("grid spacing must be positive");
    if (d.dim != 1 && d.dim != 2) throw validation_error("only 1D and 2D grids are supported");
    grid g;
    g.dim_ = d.dim;
    g.h_ = d.h;
    g.xlim_ = d.xlim;
    g.ylim_ = d.dim == 1 ? std::array<double, 2>{0.0, 0.0} : d.ylim;
    g.nx_ = static_cast<int>(std::floor((d.xlim[1] - d.xlim[0]) / d.h + 1e-9));
    g.ny_ = d.dim == 1 ? 1 : static_cast<int>(std::floor((d.ylim[1] - d.ylim[0]) / d.h + 1e-9));
    if (g.nx_ <= 0 || g.ny_ <= 0) throw empty_domain_error("box shorter than one cell");

    g.cell_index_.assign(static_cast<std::size_t>(g.nx_) * g.ny_, -1);
    for (int iy = 0; iy < g.ny_; ++iy) {
        for (int ix = 0; ix < g.nx_; ++ix) {
            const vec2 c = g.lattice_center(ix, iy);
            if (d.obs.contains(c)) continue;
            g.cell_index_[static_cast<std::size_t>(iy) * g.nx_ + ix] =
                static_cast<int>(g.centers_.size());
            g.centers_.push_back(c);
            g.lat_.emplace_back(ix, iy);
        }
    }
    if (g.centers_.empty()) throw empty_domain_error("no active cells");

    // flood fill over the 4-neighborhood (adjacency in 1D)
    std::vector<char> seen(g.centers_.size(), 0);
    int components = 0;
    for (int start = 0; start < g.n(); ++start) {
        if (seen[start]) continue;
        ++components;
        std::queue<int> q;
        q.push(start);
        seen[start] = 1;
        while (!q.empty()) {
            const int i = q.front();
            q.pop();
            const auto [ix, iy] = g.lat_[i];
            const int dxs[4] = {1, -1, 0, 0};
            const int dys[4] = {0, 0, 1, -1};
            for (int k = 0; k < (g.dim_ == 1 ? 2 : 4); ++k) {
                const int j = g.cell_at(ix + dxs[k], iy + dys[k]);
                if (j >= 0 && !seen[j]) {
                    seen[j] = 1;
                    q.push(j);
                }
            }
        }
    }
    g.components_ = components;
    if (require_connected && components > 1)
        throw disconnected_domain_error("active region splits into " +
                                        std::to_string(components) + " components");
    return g;
}

int grid::cell_at(int ix, int iy) const {
    if (ix < 0 || ix >= nx_ || iy < 0 || iy >= ny_) return -1;
    return cell_index_[static_cast<std::size_t>(iy) * nx_ + ix];
}

vec2 grid::lattice_center(int ix, int iy) const {
    const double x = xlim_[0] + (ix + 0.5) * h_;
    const double y = dim_ == 1 ? 0.0 : ylim_[0] + (iy + 0.5) * h_;
    return {x, y};
}

std::vector<int> grid::neighbors_within(int i, double R) const {
    std::vector<int> out;
    const auto [ix, iy] = lat_[i];
    const int w = static_cast<int>(std::ceil(R / h_)) + 1;
    const vec2 p = centers_[i];
    for (int dy = (dim_ == 1 ? 0 : -w); dy <= (dim_ == 1 ? 0 : w); ++dy) {
        for (int dx = -w; dx <= w; ++dx) {
            const int j = cell_at(ix + dx, iy + dy);
            if (j < 0) continue;
            if (dist(p, centers_[j]) <= R) out.push_back(j);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// geodesic engine

geodesic_engine::geodesic_engine(const obstacle& obs) : obs_(&obs) {
    const auto& polys = obs.polygonized();

    std::map<std::pair<double, double>, int> index;
    std::vector<std::vector<std::pair<int, int>>> membership;  // vertex -> (part, pos)
    for (int pi = 0; pi < static_cast<int>(polys.size()); ++pi) {
        for (int k = 0; k < static_cast<int>(polys[pi].v.size()); ++k) {
            const vec2 v = polys[pi].v[k];
            auto [it, inserted] = index.try_emplace({v.x, v.y}, static_cast<int>(verts_.size()));
            if (inserted) {
                verts_.push_back(v);
                membership.emplace_back();
            }
            membership[it->second].emplace_back(pi, k);
        }
    }
    // vertices strictly inside some other part cannot be path corners
    std::vector<char> usable(verts_.size(), 1);
    for (std::size_t vi = 0; vi < verts_.size(); ++vi) {
        for (int pi = 0; pi < static_cast<int>(polys.size()); ++pi) {
            bool own = false;
            for (auto [mp, mk] : membership[vi]) own = own || mp == pi;
            if (own) continue;
            if (poly_contains_strict(polys[pi], verts_[vi], 1e-12 * poly_scale2(polys[pi]))) {
                usable[vi] = 0;
                break;
            }
        }
    }

    const int V = static_cast<int>(verts_.size());
    std::vector<std::vector<std::pair<int, double>>> adj(V);
    auto same_part_relation = [&](int a, int b) -> int {
        // 0: unrelated, 1: adjacent on some shared part, 2: non-adjacent chord
        int rel = 0;
        for (auto [pa, ka] : membership[a]) {
            for (auto [pb, kb] : membership[b]) {
                if (pa != pb) continue;
                const int m = static_cast<int>(polys[pa].v.size());
                const int gap = std::abs(ka - kb);
                if (gap == 1 || gap == m - 1) rel = std::max(rel, 1);
                else return 2;  // chord through the part interior
            }
        }
        return rel;
    };
    for (int a = 0; a < V; ++a) {
        if (!usable[a]) continue;
        for (int b = a + 1; b < V; ++b) {
            if (!usable[b]) continue;
            if (same_part_relation(a, b) == 2) continue;
            if (!obs.segment_clear_poly(verts_[a], verts_[b])) continue;
            const double w = dist(verts_[a], verts_[b]);
            adj[a].emplace_back(b, w);
            adj[b].emplace_back(a, w);
        }
    }

    vdist_.assign(V, std::vector<double>(V, kInf));
    using qitem = std::pair<double, int>;
    for (int s = 0; s < V; ++s) {
        auto& d = vdist_[s];
        d[s] = 0.0;
        std::priority_queue<qitem, std::vector<qitem>, std::greater<>> pq;
        pq.emplace(0.0, s);
        while (!pq.empty()) {
            const auto [du, u] = pq.top();
            pq.pop();
            if (du > d[u]) continue;
            for (const auto& [v, w] : adj[u]) {
                if (du + w < d[v]) {
                    d[v] = du + w;
                    pq.emplace(d[v], v);
                }
            }
        }
    }
}

std::vector<std::pair<int, double>> geodesic_engine::visible_vertices(vec2 p, double range) const {
    std::vector<std::pair<int, double>> out;
    for (int v = 0; v < static_cast<int>(verts_.size()); ++v) {
        const double d = dist(p, verts_[v]);
        if (range >= 0.0 && d > range) continue;
        if (obs_->segment_clear_poly(p, verts_[v])) out.emplace_back(v, d);
    }
    return out;
}

std::optional<double> geodesic_engine::distance(vec2 p, vec2 q) const {
    if (p.x == q.x && p.y == q.y) return 0.0;
    if (obs_->segment_clear_poly(p, q)) return dist(p, q);
    const auto va = visible_vertices(p, -1.0);
    const auto vb = visible_vertices(q, -1.0);
    double best = kInf;
    for (const auto& [a, da] : va) {
        const auto& row = vdist_[a];
        for (const auto& [b, db] : vb) {
            const double through = row[static_cast<std::size_t>(b)];
            if (through == kInf) continue;
            best = std::min(best, da + through + db);
        }
    }
    if (best == kInf) return std::nullopt;
    return best;
}

// ---------------------------------------------------------------------------
// free-function ops

bool visible(vec2 p, vec2 q, const obstacle& obs) { return obs.segment_clear(p, q); }

std::optional<double> geodesic_distance(vec2 p, vec2 q, const obstacle& obs) {
    const geodesic_engine eng(obs);
    return geodesic_distance(p, q, eng);
}

std::optional<double> geodesic_distance(vec2 p, vec2 q, const geodesic_engine& eng) {
    if (eng.obs().contains_interior(p) || eng.obs().contains_interior(q))
        throw point_inside_obstacle_error("geodesic endpoint inside the obstacle");
    return eng.distance(p, q);
}

std::optional<double> metric_distance(const metric& m, vec2 p, vec2 q, const obstacle& obs) {
    switch (m.kind) {
        case metric_kind::euclidean:
            return dist(p, q);
        case metric_kind::geodesic:
            return geodesic_distance(p, q, obs);
        case metric_kind::mix: {
            if (m.mix_weight <= 0.0) return dist(p, q);
            const auto g = geodesic_distance(p, q, obs);
            if (!g) return std::nullopt;
            if (m.mix_weight >= 1.0) return g;
            return m.mix_weight * *g + (1.0 - m.mix_weight) * dist(p, q);
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// cell metric

cell_metric::cell_metric(const grid& g, const obstacle& obs, metric m, double range, int threads)
    : grid_(&g), metric_(m), range_(range) {
    if (range <= 0.0) throw validation_error("metric range must be positive");
    if (metric_.kind == metric_kind::mix && metric_.mix_weight <= 0.0)
        metric_.kind = metric_kind::euclidean;
    if (metric_.kind == metric_kind::mix && metric_.mix_weight >= 1.0)
        metric_.kind = metric_kind::geodesic;
    build(obs, threads);
}

void cell_metric::build(const obstacle& obs, int threads) {
    const grid& g = *grid_;
    const int n = g.n();
    const double R = range_;
    const bool need_geo = metric_.kind != metric_kind::euclidean && !obs.empty();

    std::optional<geodesic_engine> eng;
    std::vector<char> near(n, 0);
    std::vector<std::vector<std::pair<int, double>>> vis(need_geo ? n : 0);
    double vis_range = R;
    if (metric_.kind == metric_kind::mix) vis_range = R / metric_.mix_weight;

    if (need_geo) {
        eng.emplace(obs);
        parallel_for(n, threads, [&](std::size_t i) {
            if (obs.distance_to(g.center(static_cast<int>(i))) <= R) near[i] = 1;
        });
        parallel_for(n, threads, [&](std::size_t i) {
            if (near[i]) vis[i] = eng->visible_vertices(g.center(static_cast<int>(i)), vis_range);
        });
    }

    // pass 1: pairs (i, j >= i) from the lower-index source
    std::vector<std::vector<std::pair<int, double>>> up(n);
    parallel_for(n, threads, [&](std::size_t ii) {
        const int i = static_cast<int>(ii);
        const vec2 p = g.center(i);
        auto& out = up[ii];
        for (int j : g.neighbors_within(i, R)) {
            if (j < i) continue;
            const double eu = dist(p, g.center(j));
            if (metric_.kind == metric_kind::euclidean) {
                out.emplace_back(j, eu);
                continue;
            }
            double geo;
            if (!need_geo || !near[i] || i == j) {
                geo = eu;
            } else if (obs.segment_clear_poly(p, g.center(j))) {
                geo = eu;
            } else {
                geo = kInf;
                for (const auto& [a, da] : vis[ii]) {
                    for (const auto& [b, db] : vis[j]) {
                        const double through = eng->vertex_distance(a, b);
                        if (through == kInf) continue;
                        geo = std::min(geo, da + through + db);
                    }
                }
            }
            double delta;
            if (metric_.kind == metric_kind::geodesic) {
                delta = geo;
            } else {  // mix
                if (geo == kInf) continue;
                delta = metric_.mix_weight * geo + (1.0 - metric_.mix_weight) * eu;
            }
            if (delta <= R) out.emplace_back(j, delta);
        }
    });

    // pass 2: mirror to the upper rows; sequential, keeps ascending order
    lists_.assign(n, {});
    for (int i = 0; i < n; ++i) {
        for (const auto& [j, d] : up[i]) {
            if (j > i) lists_[j].emplace_back(i, d);
        }
    }
    for (int i = 0; i < n; ++i) {
        lists_[i].insert(lists_[i].end(), up[i].begin(), up[i].end());
        up[i].clear();
        up[i].shrink_to_fit();
    }
}

std::optional<double> cell_metric::delta(int i, int j) const {
    const auto& row = lists_[i];
    auto it = std::lower_bound(row.begin(), row.end(), j,
                               [](const std::pair<int, double>& e, int v) { return e.first < v; });
    if (it == row.end() || it->first != j) return std::nullopt;
    return it->second;
}

// ---------------------------------------------------------------------------
// covering

covering_report check_j_covering(const cell_metric& cm,
                                 const std::function<bool(double)>& positive_at,
                                 int x0, int max_rounds) {
    const int n = cm.g().n();
    covering_report rep;
    rep.covered.assign(n, 0);
    rep.covered[x0] = 1;
    std::vector<int> frontier{x0};
    int covered_count = 1;
    int rounds = 0;
    while (!frontier.empty() && rounds < max_rounds) {
        ++rounds;
        std::vector<int> next;
        for (int y : frontier) {
            for (const auto& [z, d] : cm.in_range(y)) {
                if (rep.covered[z] || !positive_at(d)) continue;
                rep.covered[z] = 1;
                ++covered_count;
                next.push_back(z);
            }
        }
        if (next.empty()) break;  // fixed point
        frontier = std::move(next);
    }
    rep.rounds_used = rounds;
    rep.covered_fraction = static_cast<double>(covered_count) / n;
    return rep;
}

// ---------------------------------------------------------------------------
// named obstacles

obstacle make_disk_obstacle(vec2 center, double radius, double boundary_step) {
    return obstacle({disk{center, radius}}, boundary_step);
}

// Documented stand-in for the figure with a cluster of small obstacles: the
// unit disk plus four axis-aligned ellipses.
obstacle make_ellipse_cluster(double boundary_step) {
    std::vector<obstacle_part> parts;
    parts.emplace_back(disk{{0.0, 0.0}, 1.0});
    parts.emplace_back(polygonize_ellipse({-6.0, 5.0}, 3.0, 1.5, boundary_step));
    parts.emplace_back(polygonize_ellipse({-7.0, -4.0}, 2.5, 1.2, boundary_step));
    parts.emplace_back(polygonize_ellipse({5.0, 6.0}, 2.0, 1.0, boundary_step));
    parts.emplace_back(polygonize_ellipse({4.0, -6.0}, 2.0, 1.2, boundary_step));
    return obstacle(std::move(parts), boundary_step);
}

// Ring between r_in and r_out with an angular channel removed, covered by
// convex ring sectors. Adjacent sectors overlap by a small positive angle so
// the union has no cracks or interior seams a path could slide along; the
// overlap lies inside the union, which is therefore unchanged. The channel is
// the wedge of half-angle asin(width/2 / r_in) around channel_angle, so it is
// at least channel_width wide at the inner radius.
obstacle make_annulus_channel(double r_in, double r_out, double channel_width,
                              double channel_angle, double boundary_step) {
    if (!(0.0 < r_in && r_in < r_out)) throw validation_error("need 0 < r_in < r_out");
    const double two_pi = 2.0 * std::numbers::pi;
    double half_chan = 0.0;
    if (channel_width > 0.0)
        half_chan = std::asin(std::min(1.0, 0.5 * channel_width / r_in));
    const bool full_ring = half_chan == 0.0;
    const double a0 = channel_angle + half_chan;
    const double span = two_pi - 2.0 * half_chan;
    const int sectors = std::max(8, static_cast<int>(std::ceil(span / (std::numbers::pi / 12.0))));
    const double sector_span = span / sectors;

    std::vector<obstacle_part> parts;
    for (int s = 0; s < sectors; ++s) {
        const int narc_nom =
            std::max(2, static_cast<int>(std::ceil(r_out * sector_span / boundary_step)));
        const double eps_ang = 0.25 * sector_span / narc_nom;
        double ta = a0 + sector_span * s;
        double tb = ta + sector_span;
        // extend past the shared radial edges; keep the channel edges exact
        if (full_ring || s > 0) ta -= eps_ang;
        if (full_ring || s < sectors - 1) tb += eps_ang;
        const int narc = std::max(2, static_cast<int>(std::ceil(r_out * (tb - ta) / boundary_step)));
        convex_polygon poly;
        for (int k = 0; k <= narc; ++k) {
            const double t = ta + (tb - ta) * k / narc;
            poly.v.push_back({r_out * std::cos(t), r_out * std::sin(t)});
        }
        poly.v.push_back({r_in * std::cos(tb), r_in * std::sin(tb)});
        poly.v.push_back({r_in * std::cos(ta), r_in * std::sin(ta)});
        parts.emplace_back(std::move(poly));
    }
    return obstacle(std::move(parts), boundary_step);
}

// Difference of two axis-parallel squares (half widths half_out > half_in),
// built from four rectangular bars; the bar facing channel_angle is split to
// leave a gap of channel_width. The vertical bars are extended slightly into
// the horizontal ones so the bars overlap with positive measure instead of
// meeting along seams (the union is unchanged).
obstacle make_square_annulus_channel(double half_out, double half_in, double channel_width,
                                     double channel_angle, double boundary_step) {
    if (!(0.0 < half_in && half_in < half_out)) throw validation_error("need 0 < half_in < half_out");
    auto rect = [](double x0, double x1, double y0, double y1) {
        convex_polygon p;
        p.v = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
        return p;
    };
    // side hit by the channel: 0 = +x, 1 = +y, 2 = -x, 3 = -y
    const double a = std::remainder(channel_angle, 2.0 * std::numbers::pi);
    int side;
    if (std::abs(a) <= std::numbers::pi / 4) side = 0;
    else if (std::abs(a - std::numbers::pi / 2) <= std::numbers::pi / 4) side = 1;
    else if (std::abs(a + std::numbers::pi / 2) <= std::numbers::pi / 4) side = 3;
    else side = 2;

    const double w2 = 0.5 * channel_width;
    const double ov = 0.25 * (half_out - half_in);  // seam overlap, inside the frame
    std::vector<obstacle_part> parts;
    // vertical bars (sides 0 and 2), extended by ov at both ends
    for (int bar : {0, 2}) {
        const double x0 = bar == 0 ? half_in : -half_out;
        const double x1 = bar == 0 ? half_out : -half_in;
        if (side == bar && channel_width > 0.0) {
            parts.emplace_back(rect(x0, x1, -half_in - ov, -w2));
            parts.emplace_back(rect(x0, x1, w2, half_in + ov));
        } else {
            parts.emplace_back(rect(x0, x1, -half_in - ov, half_in + ov));
        }
    }
    // horizontal bars (sides 1 and 3)
    for (int bar : {1, 3}) {
        const double y0 = bar == 1 ? half_in : -half_out;
        const double y1 = bar == 1 ? half_out : -half_in;
        if (side == bar && channel_width > 0.0) {
            parts.emplace_back(rect(-half_out, -w2, y0, y1));
            parts.emplace_back(rect(w2, half_out, y0, y1));
        } else {
            parts.emplace_back(rect(-half_out, half_out, y0, y1));
        }
    }
    return obstacle(std::move(parts), boundary_step);
}

}  // namespace nlf
