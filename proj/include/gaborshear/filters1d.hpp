#pragma once

#include <complex>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

#include "gaborshear/profile.hpp"

namespace gaborshear {

using cplx = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;

enum class FilterFamily { MeyerLow, MeyerHigh, Shannon, Custom };

/// Wrap to the principal branch [-1/2, 1/2).
inline double wrap_half(double xi) {
    double x = xi - std::round(xi);
    if (x == 0.5) x = -0.5;
    return x;
}

/// Meyer scaling function on the frequency axis:
/// 1 on |xi|<=1/3, cos(pi/2 nu(3|xi|-1)) on the transition, 0 beyond 2/3.
inline double meyer_scaling_hat(Profile p, double xi) {
    double a = std::abs(xi);
    if (a <= 1.0 / 3.0) return 1.0;
    if (a >= 2.0 / 3.0) return 0.0;
    return std::cos(kPi / 2.0 * eval_nu(p, 3.0 * a - 1.0));
}

/// Meyer wavelet, supported on 1/3 <= |xi| <= 4/3, with the -e^{-pi i xi}
/// linear phase.
inline cplx meyer_wavelet_hat(Profile p, double xi) {
    double a = std::abs(xi);
    if (a < 1.0 / 3.0 || a > 4.0 / 3.0) return {0.0, 0.0};
    cplx ph = -std::exp(cplx(0.0, -kPi * xi));
    if (a <= 2.0 / 3.0) return ph * std::sin(kPi / 2.0 * eval_nu(p, 3.0 * a - 1.0));
    return ph * std::cos(kPi / 2.0 * eval_nu(p, 1.5 * a - 1.0));
}

/// Meyer low-pass symbol H(e^{-2 pi i xi}), 1-periodic.
inline double meyer_lowpass(Profile p, double xi) {
    double a = std::abs(wrap_half(xi));
    if (a <= 1.0 / 6.0) return 1.0;
    if (a >= 1.0 / 3.0) return 0.0;
    return std::cos(kPi / 2.0 * eval_nu(p, 6.0 * a - 1.0));
}

/// Shannon low-pass: indicator of the half-open arc [-1/4, 1/4). The
/// left-closed convention keeps the derived pair (H, G) exactly
/// complementary at every point, including dyadic band edges.
inline double shannon_lowpass(double xi) {
    double x = wrap_half(xi);
    return (x >= -0.25 && x < 0.25) ? 1.0 : 0.0;
}

inline double shannon_scaling_hat(double xi) {
    return std::abs(xi) <= 0.5 ? 1.0 : 0.0;
}

/// A 1-periodic filter symbol xi -> H(e^{-2 pi i xi}).
struct Filter1D {
    std::function<cplx(double)> symbol;
    FilterFamily family = FilterFamily::Custom;

    cplx operator()(double xi) const { return symbol(wrap_half(xi)); }

    static Filter1D meyer(Profile p = Profile::Poly4) {
        return {[p](double xi) { return cplx(meyer_lowpass(p, xi), 0.0); },
                FilterFamily::MeyerLow};
    }
    static Filter1D shannon() {
        return {[](double xi) { return cplx(shannon_lowpass(xi), 0.0); },
                FilterFamily::Shannon};
    }
};

/// High-pass completion G(z) = -z conj(H(-z)), z = e^{-2 pi i xi}.
inline cplx highpass_from_lowpass(const Filter1D& H, double xi) {
    cplx z = std::exp(cplx(0.0, -2.0 * kPi * xi));
    return -z * std::conj(H(xi + 0.5));
}

/// max over midpoint-sampled xi of | |H(z)|^2 + |H(-z)|^2 - 1 |.
/// Midpoint sampling keeps indicator-band edges off the sample set.
inline double smith_barnwell_residual(const Filter1D& H, int nsamples) {
    if (nsamples < 2) throw std::invalid_argument("smith_barnwell_residual: nsamples >= 2");
    double worst = 0.0;
    for (int k = 0; k < nsamples; ++k) {
        double xi = (k + 0.5) / nsamples - 0.5;
        double s = std::norm(H(xi)) + std::norm(H(xi + 0.5));
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
}

/// Truncated Cohen cascade prod_{j=1..depth} H(e^{-2 pi i xi / 2^j}).
inline cplx cascade_scaling_hat(const Filter1D& H, double xi, int depth) {
    if (depth < 1) throw std::invalid_argument("cascade_scaling_hat: depth >= 1");
    cplx out(1.0, 0.0);
    double arg = xi;
    for (int j = 1; j <= depth; ++j) {
        arg *= 0.5;
        out *= H(arg);
        if (out == cplx(0.0, 0.0)) break;
    }
    return out;
}

} // namespace gaborshear
