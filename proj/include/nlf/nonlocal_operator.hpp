#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "nlf/geometry.hpp"
#include "nlf/kernel.hpp"

namespace nlf {

struct assembly_stats {
    double avg_neighbors = 0.0;
    double build_seconds = 0.0;
    bool from_cache = false;
};

// Discrete nonlocal operator (Lu)_i = sum_j w_ij (u_j - u_i) with
// w_ij = cell_area * J(delta(x_i, x_j)). Weights are produced once per
// unordered pair, so the matrix is symmetric bitwise, and the diagonal
// d_i is the row sum in storage order (the discrete J^delta).
class nonlocal_operator {
public:
    // pad_reflect emulates the unbounded domain at the box edges: lattice
    // sites beyond the box contribute with the value of their mirror cell
    // (exact for planar, axis-aligned states). The padded weights are
    // symmetric, so the operator keeps its SPD and comparison structure.
    static nonlocal_operator assemble(const grid& g, const radial_kernel& kernel,
                                      const cell_metric& cm, int threads,
                                      std::uint64_t provenance_hash = 0,
                                      bool pad_reflect = false);

    // Cache round trip; load returns nullopt on any mismatch with the
    // expected header (n, hash, R_J).
    void save(const std::string& path) const;
    static std::optional<nonlocal_operator> load(const std::string& path, int expect_n,
                                                 std::uint64_t expect_hash, double expect_rj);

    void apply(std::span<const double> u, std::span<double> out, int threads) const;
    std::vector<double> apply(const std::vector<double>& u, int threads) const;

    int n() const { return n_; }
    double rj() const { return rj_; }
    std::uint64_t hash() const { return hash_; }
    const std::vector<double>& row_sums() const { return diag_; }
    double max_diag() const { return max_diag_; }
    std::size_t nnz() const { return cols_.size(); }
    assembly_stats stats;

    // row access for tests
    std::pair<std::span<const std::uint32_t>, std::span<const double>> row(int i) const;
    double weight(int i, int j) const;  // 0 when absent

private:
    int n_ = 0;
    double rj_ = 0.0;
    std::uint64_t hash_ = 0;
    std::vector<std::uint64_t> offsets_;
    std::vector<std::uint32_t> cols_;
    std::vector<double> w_;
    std::vector<double> diag_;
    double max_diag_ = 0.0;

    void finalize();
};

}  // namespace nlf
