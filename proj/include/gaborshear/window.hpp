#pragma once

#include <cmath>
#include <stdexcept>

#include "gaborshear/profile.hpp"

namespace gaborshear {

/// Tight Gabor window w(x) = nu((1/2+eps-|x|)/(2 eps))^{1/2} with support
/// [-1/2-eps, 1/2+eps]; the unit-translate squares form a partition of
/// unity, so {M_{mb} T_n w} with b = (1+2 eps)^{-1} is a b^{-1}-tight frame.
struct Window {
    Profile profile = Profile::Poly4;
    double epsilon = 0.25;

    Window() = default;
    Window(Profile p, double eps) : profile(p), epsilon(eps) {
        if (!(eps > 0.0) || eps > 0.5)
            throw std::invalid_argument("Window: epsilon must lie in (0, 1/2]");
    }

    double b() const { return 1.0 / (1.0 + 2.0 * epsilon); }
    double support_halfwidth() const { return 0.5 + epsilon; }

    double operator()(double x) const {
        double arg = (0.5 + epsilon - std::abs(x)) / (2.0 * epsilon);
        double v = eval_nu(profile, arg);
        return v <= 0.0 ? 0.0 : std::sqrt(v);
    }
};

inline Window build_window(Profile p, double eps) { return Window(p, eps); }

/// Largest epsilon for which the lattice-scaled window still gives an exact
/// N0/tau-tight frame (window supports may touch but not overlap across the
/// Walnut shift 2/tau).
inline double max_tight_epsilon(int N0, int tau) {
    return (static_cast<double>(N0) - tau) / (2.0 * tau);
}

/// Pre-periodization window for the (2/N0, tau/2) lattice and its
/// 2-periodization. The base Example window is rescaled to the translation
/// step alpha = 2/N0 and renormalized to unit L2 norm:
///   w_pre(x) = sqrt(N0/2) * w_base(N0 x / 2),
/// so that sum_k w_pre(x - k alpha)^2 = N0/2 for even N0.
struct PeriodizedWindow {
    Window base;
    int N0 = 4;
    int tau = 3;

    PeriodizedWindow() = default;
    PeriodizedWindow(Window w, int n0, int t) : base(w), N0(n0), tau(t) {
        if (n0 < 2 || n0 % 2 != 0)
            throw std::invalid_argument("PeriodizedWindow: N0 must be even and >= 2");
        if (t < 1 || t >= n0)
            throw std::invalid_argument("PeriodizedWindow: need 1 <= tau < N0");
    }

    double alpha() const { return 2.0 / N0; }
    double redundancy() const { return static_cast<double>(N0) / tau; }
    bool tight() const { return base.epsilon <= max_tight_epsilon(N0, tau) + 1e-12; }

    /// Lattice-scaled window, support [-(1+2eps)/N0, (1+2eps)/N0].
    double pre(double x) const {
        return std::sqrt(N0 / 2.0) * base(N0 * x / 2.0);
    }
    double pre_support_halfwidth() const {
        return (1.0 + 2.0 * base.epsilon) / N0;
    }

    /// w°(xi) = sum_n w_pre(xi - 2n), 2-periodic.
    double circ(double xi) const {
        double x = xi - 2.0 * std::round(xi / 2.0);
        double out = pre(x);
        // the scaled support is well inside one period; neighbors only
        // matter right at the period boundary
        out += pre(x - 2.0);
        out += pre(x + 2.0);
        return out;
    }

    /// 2-periodization of the unscaled base window (the literal formula
    /// w° = sum_n w(. - 2n); equals w on [-1,1] for eps <= 1/2).
    double circ_base(double xi) const {
        double x = xi - 2.0 * std::round(xi / 2.0);
        return base(x) + base(x - 2.0) + base(x + 2.0);
    }
};

inline PeriodizedWindow periodize(const Window& w, int N0, int tau) {
    return PeriodizedWindow(w, N0, tau);
}

} // namespace gaborshear
