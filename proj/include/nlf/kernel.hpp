#pragma once

#include <vector>

#include "nlf/common.hpp"
#include "nlf/geometry.hpp"

namespace nlf {

enum class kernel_profile { gaussian, uniform };

// Radial dispersal kernel, normalized to unit mass over R^N. Built-ins:
// gaussian  exp(-r^2) * 1_{r <= R}
// uniform   1_{r <= R}
class radial_kernel {
public:
    static radial_kernel normalize(kernel_profile profile, double radius, int dim);

    double operator()(double r) const;       // normalized J(r)
    bool positive_at(double r) const { return r >= 0.0 && r <= radius_; }
    double raw_profile(double r) const;      // before normalization

    double radius() const { return radius_; }
    int dim() const { return dim_; }
    double mass_constant() const { return z_; }  // Z = ∫ raw profile over R^N
    kernel_profile profile() const { return profile_; }

private:
    kernel_profile profile_ = kernel_profile::gaussian;
    double radius_ = 1.0;
    int dim_ = 2;
    double z_ = 1.0;
};

// 1D marginal of the radial kernel, sampled on a symmetric uniform grid over
// [-R, R]. The samples are computed for x >= 0 and mirrored, so evenness is
// bitwise. For dim == 1 the marginal is the radial kernel itself.
class marginal_kernel {
public:
    static marginal_kernel marginal(const radial_kernel& k, double step);

    double step() const { return dz_; }
    double radius() const { return R_; }
    const std::vector<double>& samples() const { return val_; }  // z = -R..R
    int half_points() const { return m_; }                       // samples = 2m+1

    double operator()(double x) const;  // linear interpolation of the samples

    // mass of the sampled marginal, integrated with a boundary-resolving
    // change of variables (diagnostic; the exact value is 1 by construction)
    double mass() const;

private:
    std::vector<double> val_;
    double dz_ = 0.0;
    double R_ = 0.0;
    int m_ = 0;
    const radial_kernel* src_ = nullptr;  // for mass(); marginal outlives use sites here
    radial_kernel src_copy_;
};

// J^delta on the grid: row sums of the assembled nonlocal operator (the same
// collocation quadrature, bitwise). Declared here, defined with the operator.
struct jdelta_stats {
    std::vector<double> field;
    double inf = 0.0, sup = 0.0;
    // infimum over cells at least `range` away from the box edge; cells in
    // that belt see a truncated integral that has no counterpart in the
    // unbounded-domain problem
    double inf_interior = 0.0;
};

class nonlocal_operator;
jdelta_stats jdelta_field(const nonlocal_operator& op, const grid& g, double range);

}  // namespace nlf
