#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace nlf {

// Base class for all library errors. Subclasses name the failed contract so
// the CLI can map them onto exit codes.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct disconnected_domain_error : error { using error::error; };
struct empty_domain_error : error { using error::error; };
struct point_inside_obstacle_error : error { using error::error; };
struct zero_mass_error : error { using error::error; };
struct size_mismatch_error : error { using error::error; };
struct cfl_violation_error : error { using error::error; };
struct linear_solve_divergence_error : error { using error::error; };
struct no_convergence_error : error { using error::error; };
struct degenerate_profile_error : error { using error::error; };
struct root_bracket_failure_error : error { using error::error; };
struct poor_fit_error : error { using error::error; };
struct not_found_error : error { using error::error; };
struct placement_violation_error : error { using error::error; };
struct bound_violation_error : error { using error::error; };
struct validation_error : error { using error::error; };

// Static partition of [0, n) over at most `threads` workers. Each index is
// processed by exactly one worker, so per-index outputs are deterministic
// regardless of the thread count.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t)>& body) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const std::size_t nw = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (std::size_t w = 0; w < nw; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += nw) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

inline int default_threads() {
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// FNV-1a, used for config/provenance hashes and cache keys.
struct fnv1a {
    std::uint64_t state = 1469598103934665603ull;
    void feed(const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            state ^= p[i];
            state *= 1099511628211ull;
        }
    }
    void feed(const std::string& s) { feed(s.data(), s.size()); }
    void feed(double v) { feed(&v, sizeof v); }
    void feed(std::uint64_t v) { feed(&v, sizeof v); }
    std::uint64_t digest() const { return state; }
};

}  // namespace nlf
