#pragma once

#include <optional>
#include <vector>

#include "nlf/kernel.hpp"
#include "nlf/nonlinearity.hpp"

namespace nlf {

struct wave_config {
    double z_max = 0.0;    // 0 = 20 * R_J
    double dz = 0.0;       // 0 = R_J / 40
    double dt = 0.0;       // 0 = 0.4 / (1 + Lip f)
    double t_relax = 300.0;
    double tol = 1e-3;     // drift-rate stabilization tolerance
    double z0 = 0.0;       // initial step position (translation gauge)
};

// Discrete traveling wave: increasing profile on a uniform z-grid with
// phi(0) = theta, plus the measured speed. Evaluation extends the samples
// by the exponential tails once the rates have been attached.
class wave_profile {
public:
    std::vector<double> phi;
    double dz = 0.0;
    double z_max = 0.0;
    double c = 0.0;
    double theta = 0.5;

    int points() const { return static_cast<int>(phi.size()); }
    double z_of(int i) const { return -z_max + i * dz; }

    double operator()(double z) const;   // interpolated, tail-extended
    double deriv(double z) const;        // centered differences, interpolated

    void set_tail_rates(double lambda, double mu_right) {
        lambda_ = lambda;
        mu_right_ = mu_right;
    }
    bool has_tail_rates() const { return lambda_ > 0.0 && mu_right_ > 0.0; }

private:
    double lambda_ = 0.0;
    double mu_right_ = 0.0;  // measured decay rate of 1 - phi at +inf
};

// Discrete convolution weights: trapezoid samples of J1 on the solver grid,
// renormalized to unit sum so constants are exact equilibria.
struct conv_weights {
    std::vector<double> w;  // index k = -m..m stored at k + m
    int m = 0;
    double dz = 0.0;
    double apply(const std::vector<double>& v, int i) const;  // virtual 0 / 1 ends
    double moment(double s) const;   // sum_k w_k exp(s z_k)
    double moment_d(double s) const; // d/ds of the above
};

conv_weights make_conv_weights(const marginal_kernel& j1, double dz);

// Relaxation with per-step recentering; the speed is the measured drift of
// the theta level over the second half of the relaxation window.
wave_profile solve_profile(const radial_kernel& kernel, const bistable& f, wave_config cfg = {});

// sup-norm of c phi' - J1*phi + phi - f(phi) over the interior, with the same
// discrete convolution the solver uses
double profile_residual_inf(const wave_profile& p, const radial_kernel& kernel, const bistable& f);

struct characteristic_roots_result {
    double lambda = 0.0;
    double mu = 0.0;
    double res_lambda = 0.0;
    double res_mu = 0.0;
};

// Positive roots of  m(s) = sum_k w_k e^{s z_k} - 1 - c s + f'(a) = 0
// with a = 0 for lambda and a = 1 for mu; bracketing, bisection, Newton.
characteristic_roots_result characteristic_roots(const conv_weights& w, double c,
                                                 const bistable& f);
double char_equation(const conv_weights& w, double c, double fprime, double s);

struct tail_constants_result {
    double A0 = 0.0;       // limit of e^{-lambda z} phi at -inf (fitted)
    double A1 = 0.0;       // intercept of the +inf fit at the mu rate
    double fit_error = 0.0;  // max relative deviation of e^{-lambda z} phi on the window
    double mu_fit = 0.0;   // freely fitted decay rate of 1 - phi at +inf
    double lambda_fit = 0.0;
    // sandwich constants measured on the fit windows
    double alpha0 = 0.0, beta0 = 0.0, gamma0 = 0.0, delta0 = 0.0;
    double alpha1 = 0.0, beta1 = 0.0, gamma1 = 0.0, delta1 = 0.0;
};

tail_constants_result tail_constants(const wave_profile& p,
                                     const characteristic_roots_result& roots);

// Largest grid point z* such that phi'' >= (lambda/8) phi' for all resolved
// z <= z*; throws not_found_error when even the leftmost resolved point fails.
double convexity_threshold(const wave_profile& p, const characteristic_roots_result& roots);

}  // namespace nlf
