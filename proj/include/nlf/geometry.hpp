#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <variant>
#include <vector>

#include "nlf/common.hpp"

namespace nlf {

struct vec2 {
    double x = 0.0, y = 0.0;
};

inline vec2 operator+(vec2 a, vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline vec2 operator-(vec2 a, vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline vec2 operator*(double s, vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(vec2 a, vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(vec2 a, vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(vec2 a) { return std::hypot(a.x, a.y); }
inline double dist(vec2 a, vec2 b) { return norm(a - b); }

struct disk {
    vec2 center;
    double radius = 0.0;
};

// Counterclockwise, simple, strictly convex. Checked at construction.
struct convex_polygon {
    std::vector<vec2> v;
};

using obstacle_part = std::variant<disk, convex_polygon>;

// Union of convex primitives. Curved parts are polygonized once, at the
// boundary step fixed at construction; the polygonized view is what geodesic
// paths and graph queries see.
class obstacle {
public:
    obstacle() = default;
    obstacle(std::vector<obstacle_part> parts, double boundary_step);

    bool empty() const { return parts_.empty(); }
    const std::vector<obstacle_part>& parts() const { return parts_; }
    const std::vector<convex_polygon>& polygonized() const { return poly_; }
    double boundary_step() const { return boundary_step_; }

    // Closed membership, exact for disks.
    bool contains(vec2 p) const;
    // Strict interior membership of the exact parts.
    bool contains_interior(vec2 p) const;
    // Strict interior membership of the polygonized union.
    bool poly_contains_interior(vec2 p) const;

    // Open segment (a,b) misses the interior of every exact part.
    bool segment_clear(vec2 a, vec2 b) const;
    // Same test against the polygonized parts.
    bool segment_clear_poly(vec2 a, vec2 b) const;

    // Euclidean distance from p to the union (0 inside).
    double distance_to(vec2 p) const;

    // Axis-aligned bounding box of the union; meaningless when empty.
    std::array<double, 4> bbox() const { return bbox_; }

private:
    std::vector<obstacle_part> parts_;
    std::vector<convex_polygon> poly_;
    std::vector<std::array<double, 4>> part_bbox_;  // of polygonized parts
    std::array<double, 4> bbox_{0, 0, 0, 0};
    double boundary_step_ = 0.25;
};

struct domain {
    std::array<double, 2> xlim{0, 1};
    std::array<double, 2> ylim{0, 1};  // ignored when dim == 1
    double h = 0.1;
    int dim = 2;
    obstacle obs;
};

// Active-cell discretization of box \ K. A lattice cell is active iff its
// center lies outside the (closed) obstacle. Cell areas are uniform h^dim.
class grid {
public:
    static grid build(const domain& d);             // rejects disconnected/empty
    static grid build_unchecked(const domain& d);   // keeps all components

    int n() const { return static_cast<int>(centers_.size()); }
    int dim() const { return dim_; }
    double h() const { return h_; }
    double cell_area() const { return dim_ == 1 ? h_ : h_ * h_; }
    vec2 center(int i) const { return centers_[i]; }
    const std::vector<vec2>& centers() const { return centers_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    std::array<double, 2> xlim() const { return xlim_; }
    std::array<double, 2> ylim() const { return ylim_; }

    // -1 when the lattice site is inactive or out of range.
    int cell_at(int ix, int iy) const;
    std::pair<int, int> lattice_of(int i) const { return lat_[i]; }
    vec2 lattice_center(int ix, int iy) const;

    // Active cells whose centers lie within Euclidean distance R of center(i),
    // including i itself. Ascending cell index.
    std::vector<int> neighbors_within(int i, double R) const;

    bool connected() const { return components_ == 1; }
    int components() const { return components_; }

private:
    static grid build_impl(const domain& d, bool require_connected);

    int dim_ = 2;
    double h_ = 0.1;
    int nx_ = 0, ny_ = 0;
    std::array<double, 2> xlim_{0, 1}, ylim_{0, 1};
    std::vector<vec2> centers_;
    std::vector<std::pair<int, int>> lat_;
    std::vector<int> cell_index_;  // nx*ny lattice -> cell id or -1
    int components_ = 1;
};

enum class metric_kind { euclidean, geodesic, mix };

struct metric {
    metric_kind kind = metric_kind::euclidean;
    double mix_weight = 0.5;  // delta = w*geodesic + (1-w)*euclidean
};

// Visibility-graph geodesic distances around the polygonized obstacle.
// Nodes are the polygon vertices; query points are attached on the fly.
class geodesic_engine {
public:
    explicit geodesic_engine(const obstacle& obs);

    // Shortest path length in the closure of the polygonized exterior;
    // nullopt when p and q lie in different components.
    std::optional<double> distance(vec2 p, vec2 q) const;

    int vertex_count() const { return static_cast<int>(verts_.size()); }
    const std::vector<vec2>& vertices() const { return verts_; }
    // Pairwise vertex distance table (inf = unreachable).
    double vertex_distance(int a, int b) const { return vdist_[a][static_cast<std::size_t>(b)]; }

    // Vertices visible from p, with their Euclidean offsets, restricted to
    // |p - v| <= range (range < 0 means unrestricted).
    std::vector<std::pair<int, double>> visible_vertices(vec2 p, double range) const;

    const obstacle& obs() const { return *obs_; }

private:
    const obstacle* obs_;
    std::vector<vec2> verts_;
    std::vector<std::vector<double>> vdist_;
};

// [geometry ops]

// True iff the open segment (p,q) does not meet the interior of K.
bool visible(vec2 p, vec2 q, const obstacle& obs);

// Geodesic distance via the visibility graph; nullopt = unreachable (+inf).
// Throws point_inside_obstacle_error when an endpoint is interior to K.
std::optional<double> geodesic_distance(vec2 p, vec2 q, const obstacle& obs);
std::optional<double> geodesic_distance(vec2 p, vec2 q, const geodesic_engine& eng);

// Metric dispatch; nullopt = unreachable.
std::optional<double> metric_distance(const metric& m, vec2 p, vec2 q, const obstacle& obs);

// Truncated pairwise distances between grid cells under a metric. Distances
// are produced per unordered pair (from the lower-index source), so
// delta(i,j) == delta(j,i) bitwise.
class cell_metric {
public:
    cell_metric(const grid& g, const obstacle& obs, metric m, double range, int threads);

    // All cells j with delta(i,j) <= range, ascending j, including j == i.
    const std::vector<std::pair<int, double>>& in_range(int i) const { return lists_[i]; }
    std::optional<double> delta(int i, int j) const;

    const grid& g() const { return *grid_; }
    double range() const { return range_; }
    metric m() const { return metric_; }

private:
    void build(const obstacle& obs, int threads);

    const grid* grid_;
    metric metric_;
    double range_;
    std::vector<std::vector<std::pair<int, double>>> lists_;
};

struct covering_report {
    double covered_fraction = 0.0;
    int rounds_used = 0;
    std::vector<char> covered;  // per cell
};

// Iterates the kernel-support covering sets from cell x0 until fixed point
// or max_rounds. positive_at(r) must be the indicator of J(r) > 0.
covering_report check_j_covering(const cell_metric& cm,
                                 const std::function<bool(double)>& positive_at,
                                 int x0, int max_rounds);

// Named obstacle builders used by scenario configs.
obstacle make_disk_obstacle(vec2 center, double radius, double boundary_step);
obstacle make_ellipse_cluster(double boundary_step);
obstacle make_annulus_channel(double r_in, double r_out, double channel_width,
                              double channel_angle, double boundary_step);
obstacle make_square_annulus_channel(double half_out, double half_in, double channel_width,
                                     double channel_angle, double boundary_step);

}  // namespace nlf
