#include "nlf/nonlocal_operator.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace nlf {

nonlocal_operator nonlocal_operator::assemble(const grid& g, const radial_kernel& kernel,
                                              const cell_metric& cm, int threads,
                                              std::uint64_t provenance_hash, bool pad_reflect) {
    const auto t0 = std::chrono::steady_clock::now();
    const int n = g.n();
    const double area = g.cell_area();
    const double R = kernel.radius();

    // reflected ghost contributions per row, merged into the same CSR;
    // the pad weight for a pair depends only on the index sum across the
    // mirror line, so the merged matrix stays symmetric
    std::vector<std::vector<std::pair<int, double>>> pad(pad_reflect ? n : 0);
    if (pad_reflect) {
        const int wdw = static_cast<int>(std::ceil(R / g.h())) + 1;
        auto reflect = [](int i, int m) { return i < 0 ? -1 - i : (i >= m ? 2 * m - 1 - i : i); };
        parallel_for(n, threads, [&](std::size_t ii) {
            const int i = static_cast<int>(ii);
            const auto [ix, iy] = g.lattice_of(i);
            const vec2 p = g.center(i);
            for (int dy = (g.dim() == 1 ? 0 : -wdw); dy <= (g.dim() == 1 ? 0 : wdw); ++dy) {
                for (int dx = -wdw; dx <= wdw; ++dx) {
                    const int gx = ix + dx, gy = iy + dy;
                    const bool outside = gx < 0 || gx >= g.nx() || gy < 0 || gy >= g.ny();
                    if (!outside) continue;
                    const vec2 ghost = {p.x + dx * g.h(),
                                        g.dim() == 1 ? 0.0 : p.y + dy * g.h()};
                    const double d = dist(p, ghost);
                    if (d > R) continue;
                    const int j = g.cell_at(reflect(gx, g.nx()), reflect(gy, g.ny()));
                    if (j < 0) continue;
                    pad[ii].emplace_back(j, area * kernel(d));
                }
            }
        });
    }

    nonlocal_operator op;
    op.n_ = n;
    op.rj_ = R;
    op.hash_ = provenance_hash;
    op.offsets_.assign(n + 1, 0);

    std::vector<std::vector<std::pair<int, double>>> rows(n);
    parallel_for(n, threads, [&](std::size_t i) {
        auto& row = rows[i];
        for (const auto& [j, d] : cm.in_range(static_cast<int>(i)))
            row.emplace_back(j, area * kernel(d));
        if (pad_reflect && !pad[i].empty()) {
            // accumulate ghost weights onto existing or new columns
            for (const auto& [j, w] : pad[i]) {
                auto it = std::lower_bound(row.begin(), row.end(), j,
                                           [](const auto& e, int v) { return e.first < v; });
                if (it != row.end() && it->first == j) it->second += w;
                else row.insert(it, {j, w});
            }
        }
    });
    for (int i = 0; i < n; ++i) op.offsets_[i + 1] = op.offsets_[i] + rows[i].size();
    op.cols_.resize(op.offsets_[n]);
    op.w_.resize(op.offsets_[n]);
    parallel_for(n, threads, [&](std::size_t i) {
        std::uint64_t at = op.offsets_[i];
        for (const auto& [j, w] : rows[i]) {
            op.cols_[at] = static_cast<std::uint32_t>(j);
            op.w_[at] = w;
            ++at;
        }
    });
    op.finalize();
    op.stats.avg_neighbors = static_cast<double>(op.cols_.size()) / n;
    op.stats.build_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return op;
}

void nonlocal_operator::finalize() {
    diag_.assign(n_, 0.0);
    max_diag_ = 0.0;
    for (int i = 0; i < n_; ++i) {
        double acc = 0.0;
        for (std::uint64_t k = offsets_[i]; k < offsets_[i + 1]; ++k) acc += w_[k];
        diag_[i] = acc;
        max_diag_ = std::max(max_diag_, acc);
    }
}

void nonlocal_operator::apply(std::span<const double> u, std::span<double> out,
                              int threads) const {
    if (static_cast<int>(u.size()) != n_ || static_cast<int>(out.size()) != n_)
        throw size_mismatch_error("operator expects fields with " + std::to_string(n_) +
                                  " entries");
    // difference form: constants are annihilated term by term, bitwise
    parallel_for(n_, threads, [&](std::size_t i) {
        const double ui = u[i];
        double acc = 0.0;
        for (std::uint64_t k = offsets_[i]; k < offsets_[i + 1]; ++k)
            acc += w_[k] * (u[cols_[k]] - ui);
        out[i] = acc;
    });
}

std::vector<double> nonlocal_operator::apply(const std::vector<double>& u, int threads) const {
    std::vector<double> out(u.size());
    apply(std::span<const double>(u), std::span<double>(out), threads);
    return out;
}

std::pair<std::span<const std::uint32_t>, std::span<const double>> nonlocal_operator::row(
    int i) const {
    const auto b = offsets_[i], e = offsets_[i + 1];
    return {std::span<const std::uint32_t>(cols_.data() + b, e - b),
            std::span<const double>(w_.data() + b, e - b)};
}

double nonlocal_operator::weight(int i, int j) const {
    const auto [cols, ws] = row(i);
    auto it = std::lower_bound(cols.begin(), cols.end(), static_cast<std::uint32_t>(j));
    if (it == cols.end() || *it != static_cast<std::uint32_t>(j)) return 0.0;
    return ws[it - cols.begin()];
}

namespace {

template <typename T>
void put(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
bool get(std::ifstream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return static_cast<bool>(is);
}

}  // namespace

// Layout (little-endian): u64 n, u64 hash, f64 R_J, u64 row offsets (n+1),
// u32 columns, f64 weights.
void nonlocal_operator::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw error("cannot write cache file " + path);
    put(os, static_cast<std::uint64_t>(n_));
    put(os, hash_);
    put(os, rj_);
    os.write(reinterpret_cast<const char*>(offsets_.data()),
             static_cast<std::streamsize>(offsets_.size() * sizeof(std::uint64_t)));
    os.write(reinterpret_cast<const char*>(cols_.data()),
             static_cast<std::streamsize>(cols_.size() * sizeof(std::uint32_t)));
    os.write(reinterpret_cast<const char*>(w_.data()),
             static_cast<std::streamsize>(w_.size() * sizeof(double)));
}

std::optional<nonlocal_operator> nonlocal_operator::load(const std::string& path, int expect_n,
                                                         std::uint64_t expect_hash,
                                                         double expect_rj) {
    std::ifstream is(path, std::ios::binary);
    if (!is) return std::nullopt;
    std::uint64_t n = 0, hash = 0;
    double rj = 0.0;
    if (!get(is, n) || !get(is, hash) || !get(is, rj)) return std::nullopt;
    if (n != static_cast<std::uint64_t>(expect_n) || hash != expect_hash || rj != expect_rj)
        return std::nullopt;
    nonlocal_operator op;
    op.n_ = expect_n;
    op.hash_ = hash;
    op.rj_ = rj;
    op.offsets_.resize(n + 1);
    is.read(reinterpret_cast<char*>(op.offsets_.data()),
            static_cast<std::streamsize>(op.offsets_.size() * sizeof(std::uint64_t)));
    if (!is) return std::nullopt;
    op.cols_.resize(op.offsets_.back());
    op.w_.resize(op.offsets_.back());
    is.read(reinterpret_cast<char*>(op.cols_.data()),
            static_cast<std::streamsize>(op.cols_.size() * sizeof(std::uint32_t)));
    is.read(reinterpret_cast<char*>(op.w_.data()),
            static_cast<std::streamsize>(op.w_.size() * sizeof(double)));
    if (!is) return std::nullopt;
    op.finalize();
    op.stats.from_cache = true;
    return op;
}

jdelta_stats jdelta_field(const nonlocal_operator& op, const grid& g, double range) {
    jdelta_stats s;
    s.field = op.row_sums();
    s.inf = 1e300;
    s.sup = -1e300;
    s.inf_interior = 1e300;
    const auto xl = g.xlim(), yl = g.ylim();
    for (int i = 0; i < g.n(); ++i) {
        const double v = s.field[i];
        s.inf = std::min(s.inf, v);
        s.sup = std::max(s.sup, v);
        const vec2 c = g.center(i);
        const bool belt = c.x < xl[0] + range || c.x > xl[1] - range ||
                          (g.dim() == 2 && (c.y < yl[0] + range || c.y > yl[1] - range));
        if (!belt) s.inf_interior = std::min(s.inf_interior, v);
    }
    if (s.inf_interior == 1e300) s.inf_interior = s.inf;  // box smaller than the belt
    return s;
}

}  // namespace nlf
