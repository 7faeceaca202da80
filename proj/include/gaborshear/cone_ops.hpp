#pragma once

#include <vector>

#include "gaborshear/grid2d.hpp"

namespace gaborshear {

/// Cayley transform zeta(t) = (1 + i t) / (1 - i t), a point on the unit
/// circle; zeta(-1/t) = -zeta(t).
inline cplx cayley(double t) {
    cplx num(1.0, t), den(1.0, -t);
    return num / den;
}

/// Cone filter: a Smith-Barnwell symbol lifted to slopes through the Cayley
/// transform, H~(t) = H(zeta(t)). For the symbol convention
/// H(e^{-2 pi i xi}) this reads H~(t) = H_formula(arctan(t)/pi).
struct ConeFilter {
    Filter1D base;

    explicit ConeFilter(Filter1D f) : base(std::move(f)) {}

    /// H~(t); t = +-inf handled as the limit H(-1) = 0 for Meyer/Shannon.
    cplx lifted(double t) const {
        if (std::isinf(t)) return base(0.5);
        return base(std::atan(t) / kPi);
    }
    /// H~(-1/t) (the complementary cone's multiplier).
    cplx lifted_reflected(double t) const {
        if (t == 0.0) return base(0.5);
        if (std::isinf(t)) return base(0.0);
        return base(std::atan(-1.0 / t) / kPi);
    }
};

inline double cayley_identity_residual(const ConeFilter& cf, int nsamples) {
    double worst = 0.0;
    for (int i = 0; i < nsamples; ++i) {
        // log-spaced slopes covering both sides of 1
        double t = std::pow(10.0, -4.0 + 8.0 * (i + 0.5) / nsamples);
        double s = std::norm(cf.lifted(t)) + std::norm(cf.lifted_reflected(t));
        worst = std::max(worst, std::abs(s - 1.0));
        s = std::norm(cf.lifted(-t)) + std::norm(cf.lifted_reflected(-t));
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
}

/// Grid multipliers for H_+ (value H~(xi2/xi1)) and H_- (value H~(-1/t)).
/// Conventions: on xi1 = 0 (excluding origin) the pair is (0, 1); on
/// xi2 = 0 it is (1, 0); at the origin, a fixed point of the rotation,
/// both are 1/sqrt(2) so that P_h + P_v = I holds there.
inline std::vector<double> hplus_multiplier(const ConeFilter& cf, int N) {
    std::vector<double> out(static_cast<size_t>(N) * N);
    for (int i2 = 0; i2 < N; ++i2)
        for (int i1 = 0; i1 < N; ++i1) {
            double x1 = i1 - N / 2, x2 = i2 - N / 2;
            double v;
            if (x1 == 0.0 && x2 == 0.0) v = 1.0 / std::sqrt(2.0);
            else if (x1 == 0.0) v = 0.0;
            else if (x2 == 0.0) v = 1.0;
            else v = cf.lifted(x2 / x1).real();
            out[static_cast<size_t>(i2) * N + i1] = v;
        }
    return out;
}

inline std::vector<double> hminus_multiplier(const ConeFilter& cf, int N) {
    std::vector<double> out(static_cast<size_t>(N) * N);
    for (int i2 = 0; i2 < N; ++i2)
        for (int i1 = 0; i1 < N; ++i1) {
            double x1 = i1 - N / 2, x2 = i2 - N / 2;
            double v;
            if (x1 == 0.0 && x2 == 0.0) v = 1.0 / std::sqrt(2.0);
            else if (x1 == 0.0) v = 1.0;
            else if (x2 == 0.0) v = 0.0;
            else v = cf.lifted_reflected(x2 / x1).real();
            out[static_cast<size_t>(i2) * N + i1] = v;
        }
    return out;
}

inline GridFn multiply(const GridFn& g, const std::vector<double>& m) {
    GridFn out = g;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= m[i];
    return out;
}

/// Q_+ = I + (1+i)/2 R + (1-i)/2 R^3 and Q_- = I - (1+i)/2 R - (1-i)/2 R^3.
inline GridFn q_symmetrize(const GridFn& g, bool plus) {
    const cplx c(0.5, 0.5);
    GridFn r1 = apply_rotation(g, 1);
    GridFn r3 = apply_rotation(g, 3);
    GridFn out = g;
    double sgn = plus ? 1.0 : -1.0;
    for (size_t i = 0; i < out.data.size(); ++i)
        out.data[i] += sgn * (c * r1.data[i] + std::conj(c) * r3.data[i]);
    return out;
}

/// Cone projections P_h = H_+ Q_+ conj(H_+), P_v = conj(H_-) Q_- H_-
/// (real filters, so the conjugations are trivial).
inline GridFn project_h(const GridFn& g, const ConeFilter& cf) {
    auto hp = hplus_multiplier(cf, g.N);
    return multiply(q_symmetrize(multiply(g, hp), true), hp);
}

inline GridFn project_v(const GridFn& g, const ConeFilter& cf) {
    auto hm = hminus_multiplier(cf, g.N);
    return multiply(q_symmetrize(multiply(g, hm), false), hm);
}

/// Cone masks with weight 1/2 on the diagonals |xi1| = |xi2| (both cones),
/// which keeps the masked reassembly P~_h + P~_v = I exact on the grid.
inline std::vector<double> cone_mask(int N, Orientation o) {
    std::vector<double> out(static_cast<size_t>(N) * N, 0.0);
    for (int i2 = 0; i2 < N; ++i2)
        for (int i1 = 0; i1 < N; ++i1) {
            int a1 = std::abs(i1 - N / 2), a2 = std::abs(i2 - N / 2);
            double v = (a1 == a2) ? 0.5 : ((a2 < a1) == (o == Orientation::H) ? 1.0 : 0.0);
            out[static_cast<size_t>(i2) * N + i1] = v;
        }
    return out;
}

/// Xi_h g = H_+ Q_+ (iota_h g), Xi_v g = conj(H_-) Q_- (iota_v g); the input
/// is expected to be supported on (or weighted to) the relevant cone.
inline GridFn xi_embed(const GridFn& g_on_cone, const ConeFilter& cf, Orientation o) {
    if (o == Orientation::H)
        return multiply(q_symmetrize(g_on_cone, true), hplus_multiplier(cf, g_on_cone.N));
    return multiply(q_symmetrize(g_on_cone, false), hminus_multiplier(cf, g_on_cone.N));
}

/// Xi_iota^* fhat: multiply by the cone filter, symmetrize (Q self-adjoint),
/// leave unrestricted — the warped transform applies the cone restriction
/// through its quadrature domain.
inline GridFn xi_adjoint_unrestricted(const GridFn& fhat, const ConeFilter& cf, Orientation o) {
    if (o == Orientation::H)
        return q_symmetrize(multiply(fhat, hplus_multiplier(cf, fhat.N)), true);
    return q_symmetrize(multiply(fhat, hminus_multiplier(cf, fhat.N)), false);
}

} // namespace gaborshear
