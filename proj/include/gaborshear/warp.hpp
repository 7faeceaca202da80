#pragma once

#include <vector>

#include "gaborshear/fft.hpp"
#include "gaborshear/grid2d.hpp"

namespace gaborshear {

namespace detail {

inline double catmull_rom(double t) {
    double a = std::abs(t);
    if (a < 1.0) return 1.5 * a * a * a - 2.5 * a * a + 1.0;
    if (a < 2.0) return -0.5 * a * a * a + 2.5 * a * a - 4.0 * a + 2.0;
    return 0.0;
}

/// Centered alias representative of the i-th stored bin of a width-W window.
inline int centered_bin(int i, int W) { return (i <= (W - 1) / 2) ? i : i - W; }

} // namespace detail

/// Frequency-grid data upsampled 2x by Fourier zero-padding, sampled by
/// separable Catmull-Rom at arbitrary frequency coordinates. Interpolation
/// error on the half-step lattice is far below the transform tolerances.
class FineField {
public:
    FineField(const GridFn& g, bool upsample = true) : N_(g.N), up_(upsample) {
        if (!up_) {
            fine_.assign(g.data.begin(), g.data.end());
            M_ = N_;
            return;
        }
        const int N = N_;
        M_ = 2 * N;
        std::vector<cplx> buf = g.data;
        fft::forward2d(buf.data(), N);
        std::vector<cplx> big(static_cast<size_t>(M_) * M_, cplx(0.0, 0.0));
        const double scale = 1.0 / (static_cast<double>(N) * N);
        for (int k2 = 0; k2 < N; ++k2)
            for (int k1 = 0; k1 < N; ++k1) {
                int s1 = (k1 <= N / 2) ? k1 : k1 - N;  // signed index, Nyquist to +
                int s2 = (k2 <= N / 2) ? k2 : k2 - N;
                int d1 = (s1 % M_ + M_) % M_;
                int d2 = (s2 % M_ + M_) % M_;
                cplx v = buf[static_cast<size_t>(k2) * N + k1] * scale;
                if (std::abs(s1) == N / 2) v *= 0.5;
                if (std::abs(s2) == N / 2) v *= 0.5;
                big[static_cast<size_t>(d2) * M_ + d1] += v;
                if (std::abs(s1) == N / 2) {
                    int e1 = ((-s1) % M_ + M_) % M_;
                    big[static_cast<size_t>(d2) * M_ + e1] += v;
                }
                if (std::abs(s2) == N / 2) {
                    int e2 = ((-s2) % M_ + M_) % M_;
                    big[static_cast<size_t>(e2) * M_ + d1] += v;
                    if (std::abs(s1) == N / 2) {
                        int e1 = ((-s1) % M_ + M_) % M_;
                        big[static_cast<size_t>(e2) * M_ + e1] += v;
                    }
                }
            }
        fft::backward2d(big.data(), M_);
        fine_ = std::move(big);
    }

    /// Value at frequency coordinates (x1, x2); zero outside the grid square.
    cplx sample(double x1, double x2) const {
        const double step = up_ ? 0.5 : 1.0;
        double u = (x1 + N_ / 2.0) / step;
        double v = (x2 + N_ / 2.0) / step;
        int i = static_cast<int>(std::floor(u));
        int j = static_cast<int>(std::floor(v));
        double fu = u - i, fv = v - j;
        double wu[4], wv[4];
        for (int t = 0; t < 4; ++t) {
            wu[t] = detail::catmull_rom(fu - (t - 1));
            wv[t] = detail::catmull_rom(fv - (t - 1));
        }
        cplx out(0.0, 0.0);
        for (int b = 0; b < 4; ++b) {
            int jj = j + b - 1;
            if (jj < 0 || jj >= M_ || wv[b] == 0.0) continue;
            cplx row(0.0, 0.0);
            for (int a = 0; a < 4; ++a) {
                int ii = i + a - 1;
                if (ii < 0 || ii >= M_ || wu[a] == 0.0) continue;
                row += wu[a] * fine_[static_cast<size_t>(jj) * M_ + ii];
            }
            out += wv[b] * row;
        }
        return out;
    }

private:
    int N_;
    bool up_;
    int M_ = 0;
    std::vector<cplx> fine_;
};

/// Row-major scratch grid for one (orientation, scale, band): rows are the
/// slope direction, columns the warped radial direction.
struct WarpedPatch {
    int rows = 0, cols = 0;
    std::vector<cplx> v;
    void resize(int r, int c) {
        rows = r;
        cols = c;
        v.assign(static_cast<size_t>(r) * c, cplx(0.0, 0.0));
    }
    cplx& at(int q, int p) { return v[static_cast<size_t>(q) * cols + p]; }
    const cplx& at(int q, int p) const { return v[static_cast<size_t>(q) * cols + p]; }
};

/// Catmull-Rom on a WarpedPatch with zero extension in p and clamped rows
/// (callers pad rows beforehand as the geometry requires).
inline cplx patch_sample(const WarpedPatch& g, double q, double p) {
    int i = static_cast<int>(std::floor(p));
    int j = static_cast<int>(std::floor(q));
    double fu = p - i, fv = q - j;
    double wu[4], wv[4];
    for (int t = 0; t < 4; ++t) {
        wu[t] = detail::catmull_rom(fu - (t - 1));
        wv[t] = detail::catmull_rom(fv - (t - 1));
    }
    cplx out(0.0, 0.0);
    for (int b = 0; b < 4; ++b) {
        int jj = j + b - 1;
        if (jj < 0 || jj >= g.rows || wv[b] == 0.0) continue;
        cplx row(0.0, 0.0);
        for (int a = 0; a < 4; ++a) {
            int ii = i + a - 1;
            if (ii < 0 || ii >= g.cols || wu[a] == 0.0) continue;
            row += wu[a] * g.at(jj, ii);
        }
        out += wv[b] * row;
    }
    return out;
}

} // namespace gaborshear
