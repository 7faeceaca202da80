#pragma once

#include <stdexcept>
#include <vector>

#include "gaborshear/filters1d.hpp"
#include "gaborshear/window.hpp"

namespace gaborshear {

/// Coefficients of the periodized Gabor frame
/// {M_{m tau/2} T_{k alpha} w° : 0 <= k < N0, |m| <= G/(2 tau)} on a uniform
/// G-point grid of [-1, 1), by Riemann quadrature with weight 2/G.
struct GaborCoeffs {
    int N0 = 0;
    int mmax = 0;                 // m in [-mmax, mmax]
    std::vector<cplx> values;     // index k*(2 mmax+1) + (m + mmax)

    cplx& at(int k, int m) { return values[static_cast<size_t>(k) * (2 * mmax + 1) + (m + mmax)]; }
    const cplx& at(int k, int m) const {
        return values[static_cast<size_t>(k) * (2 * mmax + 1) + (m + mmax)];
    }
};

inline GaborCoeffs gabor_analysis(const std::vector<cplx>& f, const PeriodizedWindow& pw) {
    const int G = static_cast<int>(f.size());
    if (G <= 0 || G % pw.N0 != 0)
        throw std::invalid_argument("gabor_analysis: grid size must be divisible by N0");
    GaborCoeffs out;
    out.N0 = pw.N0;
    out.mmax = G / (2 * pw.tau);
    out.values.assign(static_cast<size_t>(pw.N0) * (2 * out.mmax + 1), cplx(0.0, 0.0));
    const double h = 2.0 / G;
    std::vector<double> xs(static_cast<size_t>(G));
    for (int q = 0; q < G; ++q) xs[static_cast<size_t>(q)] = -1.0 + h * q;
    std::vector<cplx> windowed(static_cast<size_t>(G));
    for (int k = 0; k < pw.N0; ++k) {
        for (int q = 0; q < G; ++q)
            windowed[static_cast<size_t>(q)] =
                f[static_cast<size_t>(q)] * pw.circ(xs[static_cast<size_t>(q)] - k * pw.alpha());
        for (int m = -out.mmax; m <= out.mmax; ++m) {
            cplx sum(0.0, 0.0);
            const double freq = m * pw.tau / 2.0;
            for (int q = 0; q < G; ++q)
                sum += windowed[static_cast<size_t>(q)] *
                       std::exp(cplx(0.0, -2.0 * kPi * freq * xs[static_cast<size_t>(q)]));
            out.at(k, m) = sum * h;
        }
    }
    return out;
}

/// (tau/N0) * sum |c|^2 / ||f||^2 with the same quadrature weight; 1 for a
/// band-limited f under the exact-tightness parameters.
inline double gabor_tightness_ratio(const std::vector<cplx>& f, const PeriodizedWindow& pw) {
    const int G = static_cast<int>(f.size());
    GaborCoeffs c = gabor_analysis(f, pw);
    double num = 0.0;
    for (const cplx& v : c.values) num += std::norm(v);
    double den = 0.0;
    for (const cplx& v : f) den += std::norm(v);
    den *= 2.0 / G;
    if (den == 0.0) throw std::invalid_argument("gabor_tightness_ratio: zero input");
    return (static_cast<double>(pw.tau) / pw.N0) * num / den;
}

/// Explicit frame vectors of the discretized periodized Gabor frame on a
/// G-point grid (rows are atoms), for redundancy computations.
inline std::vector<std::vector<cplx>> gabor_frame_vectors(const PeriodizedWindow& pw, int G) {
    if (G % pw.N0 != 0)
        throw std::invalid_argument("gabor_frame_vectors: grid size must be divisible by N0");
    int mcount = G / pw.tau;           // complete character set when tau | G
    if (G % pw.tau != 0) mcount = 2 * (G / (2 * pw.tau)) + 1;
    const double h = 2.0 / G;
    std::vector<std::vector<cplx>> rows;
    rows.reserve(static_cast<size_t>(pw.N0) * mcount);
    for (int k = 0; k < pw.N0; ++k) {
        for (int mi = 0; mi < mcount; ++mi) {
            int m = mi - mcount / 2;
            std::vector<cplx> v(static_cast<size_t>(G));
            for (int q = 0; q < G; ++q) {
                double x = -1.0 + h * q;
                v[static_cast<size_t>(q)] =
                    std::exp(cplx(0.0, 2.0 * kPi * (m * pw.tau / 2.0) * x)) *
                    pw.circ(x - k * pw.alpha()) * std::sqrt(h);
            }
            rows.push_back(std::move(v));
        }
    }
    return rows;
}

} // namespace gaborshear
