#pragma once

#include <vector>

#include "nlf/common.hpp"

namespace nlf {

// Bistable reaction term with stable zeros 0 and 1 and unstable zero theta.
// Outside [0,1] the term is the linear extension with slopes f'(0), f'(1),
// so eval/deriv are defined on all of R.
class bistable {
public:
    static bistable cubic(double theta, double scale = 1.0);
    // samples of (u, f(u), f'(u)) on [0,1]; monotone cubic Hermite between
    static bistable tabulated(std::vector<double> u, std::vector<double> f,
                              std::vector<double> fp);

    double eval(double u) const;
    double deriv(double u) const;

    double theta() const { return theta_; }
    double fp0() const { return fp0_; }
    double fp1() const { return fp1_; }
    double fp_theta() const { return fptheta_; }
    double max_fp_01() const { return max_fp_; }      // max of f' on [0,1]
    double sup_abs_fp() const { return sup_abs_fp_; }  // sup over R of |f~'|
    double integral_01() const { return int01_; }

private:
    double eval_core(double u) const;   // on [0,1]
    double deriv_core(double u) const;
    void cache_derived();

    bool is_cubic_ = true;
    double theta_ = 0.3;
    double scale_ = 1.0;
    std::vector<double> tab_u_, tab_f_, tab_fp_;

    double fp0_ = 0.0, fp1_ = 0.0, fptheta_ = 0.0;
    double max_fp_ = 0.0, sup_abs_fp_ = 0.0, int01_ = 0.0;
};

struct validation_report {
    bool c2_ok = false;            // sign pattern and slopes of the bistable shape
    bool c5_ok = false;            // positive mass integral and max f' < 1
    bool nondegenerate_ok = false; // max f' < inf J^delta
    double omega = 0.0;            // sup|f~'| + 2 sup J^delta
    double integral = 0.0;
    double max_fp = 0.0;
    std::string failure;           // first failed assumption, empty when all pass
};

// jdelta_sup defaults to the continuum bound (J has unit mass, so
// J^delta <= 1 everywhere).
validation_report validate(const bistable& f, double jdelta_inf, double jdelta_sup = 1.0);

}  // namespace nlf
