#include "nlf/kernel.hpp"

#include <cmath>
#include <numbers>

namespace nlf {

namespace {

// composite Simpson on [a, b] with n (even) intervals
template <typename F>
double simpson(F&& f, double a, double b, int n) {
    if (b <= a) return 0.0;
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int k = 1; k < n; ++k) acc += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

double raw(kernel_profile p, double r, double R) {
    if (r < 0.0 || r > R) return 0.0;
    switch (p) {
        case kernel_profile::gaussian: return std::exp(-r * r);
        case kernel_profile::uniform: return 1.0;
    }
    return 0.0;
}

}  // namespace

radial_kernel radial_kernel::normalize(kernel_profile profile, double radius, int dim) {
    if (radius <= 0.0) throw validation_error("kernel radius must be positive");
    if (dim != 1 && dim != 2) throw validation_error("kernel dim must be 1 or 2");
    radial_kernel k;
    k.profile_ = profile;
    k.radius_ = radius;
    k.dim_ = dim;
    const double surface = dim == 1 ? 2.0 : 2.0 * std::numbers::pi;
    const double z = surface * simpson(
        [&](double r) { return raw(profile, r, radius) * (dim == 2 ? r : 1.0); },
        0.0, radius, 2048);
    if (!(z > 0.0)) throw zero_mass_error("kernel profile has nonpositive mass");
    k.z_ = z;
    return k;
}

double radial_kernel::operator()(double r) const { return raw(profile_, r, radius_) / z_; }

double radial_kernel::raw_profile(double r) const { return raw(profile_, r, radius_); }

marginal_kernel marginal_kernel::marginal(const radial_kernel& k, double step) {
    if (step <= 0.0) throw validation_error("marginal step must be positive");
    marginal_kernel m;
    m.R_ = k.radius();
    m.m_ = std::max(1, static_cast<int>(std::lround(m.R_ / step)));
    m.dz_ = m.R_ / m.m_;
    m.src_copy_ = k;
    m.src_ = &m.src_copy_;
    m.val_.assign(2 * m.m_ + 1, 0.0);
    for (int i = 0; i <= m.m_; ++i) {
        const double x = i * m.dz_;
        double v;
        if (k.dim() == 1) {
            v = k(x);
        } else {
            const double ymax = std::sqrt(std::max(0.0, m.R_ * m.R_ - x * x));
            v = 2.0 * simpson([&](double y) { return k(std::hypot(x, y)); }, 0.0, ymax, 512);
        }
        m.val_[m.m_ + i] = v;
        m.val_[m.m_ - i] = v;  // evenness is bitwise by mirroring
    }
    return m;
}

double marginal_kernel::operator()(double x) const {
    const double ax = std::abs(x);
    if (ax > R_) return 0.0;
    const double t = ax / dz_;
    const int i = static_cast<int>(t);
    const double fr = t - i;
    const int base = m_ + i;
    if (base + 1 >= static_cast<int>(val_.size())) return val_.back();
    return val_[base] * (1.0 - fr) + val_[base + 1] * fr;
}

double marginal_kernel::mass() const {
    // substitute x = R sin t; the integrand is smooth in t even when the
    // marginal has a square-root edge at |x| = R
    const radial_kernel& k = *src_;
    auto j1 = [&](double x) {
        if (k.dim() == 1) return k(std::abs(x));
        const double ymax = std::sqrt(std::max(0.0, R_ * R_ - x * x));
        return 2.0 * simpson([&](double y) { return k(std::hypot(x, y)); }, 0.0, ymax, 512);
    };
    return simpson(
        [&](double t) { return j1(R_ * std::sin(t)) * R_ * std::cos(t); },
        -std::numbers::pi / 2, std::numbers::pi / 2, 4096);
}

}  // namespace nlf
