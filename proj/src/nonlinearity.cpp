#include "nlf/nonlinearity.hpp"

#include <algorithm>
#include <cmath>

namespace nlf {

bistable bistable::cubic(double theta, double scale) {
    if (!(theta > 0.0 && theta < 1.0)) throw validation_error("theta must lie in (0,1)");
    if (!(scale > 0.0)) throw validation_error("scale must be positive");
    bistable f;
    f.is_cubic_ = true;
    f.theta_ = theta;
    f.scale_ = scale;
    f.cache_derived();
    return f;
}

bistable bistable::tabulated(std::vector<double> u, std::vector<double> f,
                             std::vector<double> fp) {
    if (u.size() < 4 || u.size() != f.size() || u.size() != fp.size())
        throw validation_error("tabulated bistable needs matching samples");
    if (u.front() != 0.0 || u.back() != 1.0)
        throw validation_error("tabulated samples must span [0,1]");
    for (std::size_t i = 1; i < u.size(); ++i)
        if (u[i] <= u[i - 1]) throw validation_error("tabulated abscissae must increase");
    // the derivative samples must be Lipschitz at the sampled resolution,
    // otherwise the C^{1,1} requirement cannot hold
    double lip = 0.0;
    for (std::size_t i = 1; i < u.size(); ++i)
        lip = std::max(lip, std::abs(fp[i] - fp[i - 1]) / (u[i] - u[i - 1]));
    double span = 0.0;
    for (double v : fp) span = std::max(span, std::abs(v));
    if (lip > 1e3 * std::max(1.0, span))
        throw validation_error("tabulated derivative is not Lipschitz at the sampled scale");

    bistable b;
    b.is_cubic_ = false;
    b.tab_u_ = std::move(u);
    b.tab_f_ = std::move(f);
    b.tab_fp_ = std::move(fp);
    // theta: interior sign change of f
    b.theta_ = 0.5;
    for (std::size_t i = 1; i + 1 < b.tab_u_.size(); ++i) {
        if (b.tab_f_[i - 1] < 0.0 && b.tab_f_[i] >= 0.0) {
            b.theta_ = b.tab_u_[i];
            break;
        }
    }
    b.cache_derived();
    return b;
}

double bistable::eval_core(double u) const {
    if (is_cubic_) return scale_ * u * (u - theta_) * (1.0 - u);
    // cubic Hermite on the bracketing interval
    auto it = std::upper_bound(tab_u_.begin(), tab_u_.end(), u);
    std::size_t i = std::min<std::size_t>(tab_u_.size() - 2,
                                          it == tab_u_.begin() ? 0 : (it - tab_u_.begin() - 1));
    const double h = tab_u_[i + 1] - tab_u_[i];
    const double t = (u - tab_u_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * tab_f_[i] + (t3 - 2 * t2 + t) * h * tab_fp_[i] +
           (-2 * t3 + 3 * t2) * tab_f_[i + 1] + (t3 - t2) * h * tab_fp_[i + 1];
}

double bistable::deriv_core(double u) const {
    if (is_cubic_) return scale_ * (-3.0 * u * u + 2.0 * (1.0 + theta_) * u - theta_);
    auto it = std::upper_bound(tab_u_.begin(), tab_u_.end(), u);
    std::size_t i = std::min<std::size_t>(tab_u_.size() - 2,
                                          it == tab_u_.begin() ? 0 : (it - tab_u_.begin() - 1));
    const double h = tab_u_[i + 1] - tab_u_[i];
    const double t = (u - tab_u_[i]) / h;
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * tab_f_[i] + (3 * t2 - 4 * t + 1) * h * tab_fp_[i] +
            (-6 * t2 + 6 * t) * tab_f_[i + 1] + (3 * t2 - 2 * t) * h * tab_fp_[i + 1]) / h;
}

double bistable::eval(double u) const {
    if (u < 0.0) return fp0_ * u;
    if (u > 1.0) return fp1_ * (u - 1.0);
    return eval_core(u);
}

double bistable::deriv(double u) const {
    if (u < 0.0) return fp0_;
    if (u > 1.0) return fp1_;
    return deriv_core(u);
}

void bistable::cache_derived() {
    fp0_ = deriv_core(0.0);
    fp1_ = deriv_core(1.0);
    fptheta_ = deriv_core(theta_);
    if (is_cubic_) {
        // vertex of the derivative parabola
        max_fp_ = scale_ * (1.0 - theta_ + theta_ * theta_) / 3.0;
        int01_ = scale_ * (1.0 - 2.0 * theta_) / 12.0;
    } else {
        max_fp_ = -1e300;
        const int n = 10000;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double u = (i + 0.5) / n;
            max_fp_ = std::max(max_fp_, deriv_core(u));
            acc += eval_core(u);
        }
        int01_ = acc / n;
    }
    sup_abs_fp_ = std::max({std::abs(fp0_), std::abs(fp1_), std::abs(max_fp_)});
    if (!is_cubic_) {
        for (int i = 0; i <= 10000; ++i)
            sup_abs_fp_ = std::max(sup_abs_fp_, std::abs(deriv_core(i / 10000.0)));
    }
}

validation_report validate(const bistable& f, double jdelta_inf, double jdelta_sup) {
    validation_report rep;
    rep.integral = f.integral_01();
    rep.max_fp = f.max_fp_01();
    rep.omega = f.sup_abs_fp() + 2.0 * jdelta_sup;

    // sign pattern by dense sampling
    bool c2 = f.eval(0.0) == 0.0 && std::abs(f.eval(f.theta())) < 1e-14 && f.eval(1.0) == 0.0 &&
              f.fp0() < 0.0 && f.fp_theta() > 0.0 && f.fp1() < 0.0;
    const int n = 10000;
    for (int i = 1; c2 && i < n; ++i) {
        const double u = static_cast<double>(i) / n;
        if (std::abs(u - f.theta()) < 1e-9) continue;
        const double v = f.eval(u);
        if (u < f.theta() ? v >= 0.0 : (u < 1.0 && v <= 0.0)) c2 = false;
    }
    rep.c2_ok = c2;
    rep.c5_ok = rep.integral > 0.0 && rep.max_fp < 1.0;
    rep.nondegenerate_ok = rep.max_fp < jdelta_inf;

    if (!rep.c2_ok) rep.failure = "(C2) bistable sign pattern violated";
    else if (rep.integral <= 0.0) rep.failure = "(C5) integral of f over [0,1] is <= 0";
    else if (rep.max_fp >= 1.0) rep.failure = "(C5) max f' on [0,1] is >= 1";
    else if (!rep.nondegenerate_ok) rep.failure = "nondegeneracy: max f' >= inf J^delta";
    return rep;
}

}  // namespace nlf
