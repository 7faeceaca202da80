#pragma once

#include <stdexcept>
#include <vector>

#include "gaborshear/fft.hpp"
#include "gaborshear/filters1d.hpp"

namespace gaborshear {

/// Centered square frequency grid: xi in {-N/2, ..., N/2-1}^2, integer
/// lattice (cycles per unit for images sampled on [0,1]^2).
struct FreqGrid {
    int N = 0;
    explicit FreqGrid(int n) : N(n) {
        if (n < 4 || (n & (n - 1)) != 0)
            throw std::invalid_argument("FreqGrid: N must be a power of two >= 4");
    }
    int lo() const { return -N / 2; }
    int hi() const { return N / 2 - 1; }
};

/// Complex function sampled on a FreqGrid; data row-major with row = xi2
/// index, column = xi1 index, both offset by N/2.
struct GridFn {
    int N = 0;
    std::vector<cplx> data;

    GridFn() = default;
    explicit GridFn(int n) : N(n), data(static_cast<size_t>(n) * n, cplx(0.0, 0.0)) {}

    cplx& at(int i1, int i2) { return data[static_cast<size_t>(i2) * N + i1]; }
    const cplx& at(int i1, int i2) const { return data[static_cast<size_t>(i2) * N + i1]; }
    /// access by frequency coordinates
    cplx& atf(int xi1, int xi2) { return at(xi1 + N / 2, xi2 + N / 2); }
    const cplx& atf(int xi1, int xi2) const { return at(xi1 + N / 2, xi2 + N / 2); }

    double norm2() const {
        double s = 0.0;
        for (const cplx& v : data) s += std::norm(v);
        return s;
    }
};

/// Centered spectrum of an N x N image on [0,1]^2, scaled by 1/N^2 so that
/// discrete Plancherel reads (1/N^2) sum |f|^2 = sum |fhat|^2.
inline GridFn forward_spectrum(const std::vector<double>& image, int N) {
    if (static_cast<int>(image.size()) != N * N || (N & (N - 1)) != 0)
        throw std::invalid_argument("forward_spectrum: square power-of-two input required");
    std::vector<cplx> buf(image.begin(), image.end());
    fft::forward2d(buf.data(), N);
    GridFn out(N);
    const double scale = 1.0 / (static_cast<double>(N) * N);
    for (int i2 = 0; i2 < N; ++i2)
        for (int i1 = 0; i1 < N; ++i1) {
            int k1 = (i1 + N / 2) % N;  // fftshift
            int k2 = (i2 + N / 2) % N;
            out.at(i1, i2) = buf[static_cast<size_t>(k2) * N + k1] * scale;
        }
    return out;
}

inline std::vector<cplx> inverse_spectrum_complex(const GridFn& g) {
    const int N = g.N;
    std::vector<cplx> buf(static_cast<size_t>(N) * N);
    for (int i2 = 0; i2 < N; ++i2)
        for (int i1 = 0; i1 < N; ++i1) {
            int k1 = (i1 + N / 2) % N;
            int k2 = (i2 + N / 2) % N;
            buf[static_cast<size_t>(k2) * N + k1] = g.at(i1, i2);
        }
    fft::backward2d(buf.data(), N);
    return buf;  // image values at pixel (n1, n2) = buf[n2*N + n1]
}

inline std::vector<double> inverse_spectrum(const GridFn& g) {
    std::vector<cplx> buf = inverse_spectrum_complex(g);
    std::vector<double> out(buf.size());
    for (size_t i = 0; i < buf.size(); ++i) out[i] = buf[i].real();
    return out;
}

enum class Orientation { H, V };

/// gamma^h(xi) = (sgn(xi1) xi1^2 / 2, xi2/xi1); the v variant swaps roles.
/// Throws on the degenerate line (callers map atoms to zero there).
inline std::pair<double, double> warp_points(Orientation o, double x1, double x2) {
    double a = (o == Orientation::H) ? x1 : x2;
    double b = (o == Orientation::H) ? x2 : x1;
    if (a == 0.0) throw std::domain_error("warp_points: degenerate line");
    double g1 = 0.5 * (a > 0 ? 1.0 : -1.0) * a * a;
    return {g1, b / a};
}

inline std::pair<double, double> warp_points_inverse(Orientation o, double g1, double g2) {
    double a = (g1 > 0 ? 1.0 : -1.0) * std::sqrt(2.0 * std::abs(g1));
    double b = g2 * a;
    if (o == Orientation::H) return {a, b};
    return {b, a};
}

namespace detail {

inline double cr_kernel(double t) {
    double a = std::abs(t);
    if (a < 1.0) return 1.5 * a * a * a - 2.5 * a * a + 1.0;
    if (a < 2.0) return -0.5 * a * a * a + 2.5 * a * a - 4.0 * a + 2.0;
    return 0.0;
}

/// Separable Catmull-Rom resampling at frequency coordinates, zero outside
/// the grid. Exact at lattice points.
inline cplx resample(const GridFn& g, double x1, double x2) {
    double u = x1 + g.N / 2, v = x2 + g.N / 2;
    int i = static_cast<int>(std::floor(u)), j = static_cast<int>(std::floor(v));
    double fu = u - i, fv = v - j;
    if (fu == 0.0 && fv == 0.0) {
        if (i < 0 || i >= g.N || j < 0 || j >= g.N) return {0.0, 0.0};
        return g.at(i, j);
    }
    double wu[4], wv[4];
    for (int t = 0; t < 4; ++t) {
        wu[t] = cr_kernel(fu - (t - 1));
        wv[t] = cr_kernel(fv - (t - 1));
    }
    cplx out(0.0, 0.0);
    for (int b = 0; b < 4; ++b) {
        int jj = j + b - 1;
        if (jj < 0 || jj >= g.N || wv[b] == 0.0) continue;
        cplx row(0.0, 0.0);
        for (int a = 0; a < 4; ++a) {
            int ii = i + a - 1;
            if (ii < 0 || ii >= g.N || wu[a] == 0.0) continue;
            row += wu[a] * g.at(ii, jj);
        }
        out += wv[b] * row;
    }
    return out;
}

} // namespace detail

/// S_s: g(xi1, xi2) -> g(xi1, xi2 - s xi1); exact index shift when s*xi1 is
/// integral for every column, cubic resampling along xi2 otherwise.
inline GridFn apply_shear(const GridFn& g, double s, Orientation o = Orientation::H) {
    const int N = g.N;
    GridFn out(N);
    for (int i2 = 0; i2 < N; ++i2)
        for (int i1 = 0; i1 < N; ++i1) {
            double x1 = i1 - N / 2, x2 = i2 - N / 2;
            double y1 = x1, y2 = x2;
            if (o == Orientation::H) y2 = x2 - s * x1; else y1 = x1 - s * x2;
            double shifted = (o == Orientation::H) ? y2 : y1;
            double r = std::round(shifted);
            if (std::abs(shifted - r) < 1e-12) {
                int ri = static_cast<int>(r);
                if (o == Orientation::H) {
                    out.at(i1, i2) = (ri >= -N / 2 && ri < N / 2) ? g.atf(static_cast<int>(x1), ri) : cplx(0, 0);
                } else {
                    out.at(i1, i2) = (ri >= -N / 2 && ri < N / 2) ? g.atf(ri, static_cast<int>(x2)) : cplx(0, 0);
                }
            } else {
                out.at(i1, i2) = detail::resample(g, y1, y2);
            }
        }
    return out;
}

/// Chirp modulation X_beta: multiply by e^{2 pi i (b1 gamma1 + b2 gamma2)};
/// zero on the degenerate line.
inline GridFn apply_chirp(const GridFn& g, double b1, double b2, Orientation o = Orientation::H) {
    const int N = g.N;
    GridFn out(N);
    for (int i2 = 0; i2 < N; ++i2)
        for (int i1 = 0; i1 < N; ++i1) {
            double x1 = i1 - N / 2, x2 = i2 - N / 2;
            double a = (o == Orientation::H) ? x1 : x2;
            if (a == 0.0) continue;
            auto [g1, g2] = warp_points(o, x1, x2);
            // compensated mod-1 reduction: b1*g1 can be large, and the
            // phase must stay accurate to full precision
            double p = b1 * g1;
            double e = std::fma(b1, g1, -p);
            double m = (p - std::round(p)) + e + b2 * g2;
            m -= std::round(m);
            out.at(i1, i2) = g.at(i1, i2) * std::exp(cplx(0.0, 2.0 * kPi * m));
        }
    return out;
}

/// Parabolic dilation A_j: 2^{-3j/2} g(2^{-2j} xi1, 2^{-j} xi2), cubic
/// resampling.
inline GridFn apply_dilation(const GridFn& g, int j, Orientation o = Orientation::H) {
    const int N = g.N;
    GridFn out(N);
    const double a1 = std::pow(2.0, -2.0 * j), a2 = std::pow(2.0, -1.0 * j);
    const double amp = std::pow(2.0, -1.5 * j);
    for (int i2 = 0; i2 < N; ++i2)
        for (int i1 = 0; i1 < N; ++i1) {
            double x1 = i1 - N / 2, x2 = i2 - N / 2;
            double y1, y2;
            if (o == Orientation::H) { y1 = a1 * x1; y2 = a2 * x2; }
            else                      { y1 = a2 * x1; y2 = a1 * x2; }
            out.at(i1, i2) = amp * detail::resample(g, y1, y2);
        }
    return out;
}

/// Quarter rotation R g(xi1, xi2) = g(xi2, -xi1) as an exact modular index
/// permutation; R^4 = identity bit-exactly.
inline GridFn apply_rotation(const GridFn& g, int power = 1) {
    const int N = g.N;
    GridFn cur = g;
    int p = ((power % 4) + 4) % 4;
    for (int t = 0; t < p; ++t) {
        GridFn nxt(N);
        for (int i2 = 0; i2 < N; ++i2)
            for (int i1 = 0; i1 < N; ++i1) {
                int x1 = i1 - N / 2, x2 = i2 - N / 2;
                int l1 = x2;                       // lookup (xi2, -xi1)
                int l2 = -x1;
                l1 = ((l1 + N / 2) % N + N) % N;   // modular wrap into range
                l2 = ((l2 + N / 2) % N + N) % N;
                nxt.at(i1, i2) = cur.data[static_cast<size_t>(l2) * N + l1];
            }
        cur = std::move(nxt);
    }
    return cur;
}

/// Weyl-Heisenberg commutation residual
/// ||S_s X_b g - e^{-2 pi i b2 s} X_b S_s g|| / ||g||.
inline double commutation_residual(double s, double b1, double b2, const GridFn& g) {
    GridFn lhs = apply_shear(apply_chirp(g, b1, b2), s);
    GridFn rhs = apply_chirp(apply_shear(g, s), b1, b2);
    cplx phase = std::exp(cplx(0.0, -2.0 * kPi * b2 * s));
    double num = 0.0, den = g.norm2();
    for (size_t i = 0; i < lhs.data.size(); ++i)
        num += std::norm(lhs.data[i] - phase * rhs.data[i]);
    return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

} // namespace gaborshear
