#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <vector>

#include "gaborshear/coneshear.hpp"  // AtomKind, parallel_for_blocks, FineField
#include "gaborshear/mband.hpp"
#include "gaborshear/window.hpp"

namespace gaborshear {

struct GroupAtomIndex {
    AtomKind kind = AtomKind::Wavelet;
    int j = 0;
    int l = 1;   // band 1..15; ignored for Scaling
    int k = 0;
    int m1 = 0;  // centered modulation indices
    int m2 = 0;
};

struct GroupSystemParams {
    WaveletBank bank;
    Window window;
    int N = 256;
    int j0 = 0;
    int jmax = 1;
    double osf1 = 8.0;
    double osf2 = 2.0;
    double mpad = 1.25;

    /// Largest j whose outermost band still fits inside the Nyquist square.
    static int fit_jmax(int N, const WaveletBank& bank) {
        double edge = std::sqrt(2.0 * bank.outer_edge());
        int j = 0;
        while (edge * std::pow(2.0, 2.0 * (j + 1)) <= (N / 2.0) * (1.0 + 1e-3)) ++j;
        return j;
    }

    static GroupSystemParams make(int N, double eps = 0.25, int j0 = 0, int jmax = -1,
                                  BankFamily family = BankFamily::Meyer,
                                  Profile profile = Profile::Poly4) {
        GroupSystemParams p{WaveletBank(16, profile, family), Window(profile, eps), N, j0, 0};
        p.jmax = jmax < 0 ? std::max(j0, fit_jmax(N, p.bank)) : jmax;
        if (p.jmax < p.j0) throw std::invalid_argument("GroupSystemParams: jmax >= j0");
        // the modulation lattice must land on the slope grid: 1 + 2 eps
        // needs a small rational numerator
        p.modnum = 0;
        for (int num = 1; num <= 64 && p.modnum == 0; ++num)
            for (int den = 1; den <= 64; ++den)
                if (std::abs((1.0 + 2.0 * eps) - static_cast<double>(num) / den) < 1e-9) {
                    p.modnum = num;
                    break;
                }
        if (p.modnum == 0)
            throw std::invalid_argument("GroupSystemParams: 1+2*eps must be rational (small terms)");
        return p;
    }

    double b() const { return window.b(); }
    double tight_constant() const { return 1.0 + 2.0 * window.epsilon; }
    int modnum = 3;  // numerator of 1+2*eps in lowest terms
};

/// Geometry of one (scale, band) of the group system. Rows run over the
/// slope line, q in [-Q, Q], eta2 = q h2; columns as in the cone system.
struct GroupBandGeom {
    int j = 0, l = 0;
    int P1 = 1;
    double h1 = 1.0;
    int P2 = 1;       // m2-character period in samples
    double h2 = 1.0;  // = (1+2eps) 2^{-j} / P2
    int Q = 0;        // rows are q in [-Q, Q]
    int W1 = 1, W2 = 1;
    int K = 0;        // shears k in [-K, K]
    int kstep = 1;    // translate step in rows
    int sw = 1;       // window half-width in rows, padded
    int pmin = 0, pmax = 0;

    int rows() const { return 2 * Q + 1; }
    double eta2(int q) const { return q * h2; }
    int w2_for(int) const { return W2; }
};

inline GroupBandGeom group_band_geom(const GroupSystemParams& sys, int j, int l) {
    GroupBandGeom g;
    g.j = j;
    g.l = l;
    auto [lo, hi] = sys.bank.band_support(l);
    const double p16 = std::pow(16.0, j), p4 = std::pow(4.0, j), p2 = std::pow(2.0, j);
    const double eps = sys.window.epsilon;
    const double opts = 1.0 + 2.0 * eps;
    const double xi_lo = std::sqrt(2.0 * std::max(lo, 1.0 / 3.0));
    const double xi_hi = std::min(std::sqrt(2.0 * hi) * p4, sys.N / 2.0) / p4;
    g.P1 = static_cast<int>(std::ceil(sys.osf1 * p4 / xi_lo));
    if (l == 0) g.P1 = std::max(g.P1, static_cast<int>(std::ceil(sys.osf1 * p16)));
    g.h1 = p16 / g.P1;
    g.P2 = sys.modnum *
           std::max(1, static_cast<int>(std::ceil(sys.osf2 * p2 * opts * xi_hi / sys.modnum)));
    g.h2 = opts / p2 / g.P2;
    g.kstep = static_cast<int>(std::llround(g.P2 / opts));
    const double xi_min_data = std::max(1.0, xi_lo * p4);
    g.W1 = std::min(g.P1, 2 * static_cast<int>(std::ceil(sys.mpad * p16 / xi_min_data)) + 3);
    // |m2| <= x2 xi1max 2^{-j} / b, x2 <= 1/2
    g.W2 = std::min(g.P2, 2 * static_cast<int>(std::ceil(
                              sys.mpad * 0.5 * xi_hi * p2 * sys.tight_constant())) + 5);
    const double slope_max = (sys.N / 2.0) / xi_min_data;
    g.K = static_cast<int>(std::ceil(p2 * slope_max)) + 1;
    g.sw = static_cast<int>(std::ceil((0.5 + eps) / p2 / g.h2)) + 2;
    g.Q = g.K * g.kstep + g.sw + 4;
    const double e1max = (sys.N / 2.0) * (sys.N / 2.0) / 2.0 * (1.0 + 1e-9);
    g.pmax = static_cast<int>(std::floor(std::min(hi * p16, e1max) / g.h1));
    g.pmin = (l == 0) ? 0 : std::max(1, static_cast<int>(std::ceil(lo * p16 / g.h1)));
    return g;
}

inline std::vector<int> group_bands(const GroupSystemParams& sys, int j) {
    std::vector<int> out;
    if (j == sys.j0) out.push_back(0);
    const double e1max = (sys.N / 2.0) * (sys.N / 2.0) / 2.0 * (1.0 + 1e-9);
    for (int l = 1; l < sys.bank.M(); ++l)
        if (sys.bank.band_support(l).first * std::pow(16.0, j) <= e1max) out.push_back(l);
    return out;
}

struct GroupBlockKey {
    int j, l;
    bool operator<(const GroupBlockKey& o) const {
        if (j != o.j) return j < o.j;
        return l < o.l;
    }
};

struct GroupBlock {
    GroupBandGeom geom;
    std::vector<cplx> values;  // (2K+1) x W2 x W1, iteration (k, m2, m1)

    size_t size() const { return values.size(); }
    cplx& at(int ki, int i2, int i1) {
        return values[(static_cast<size_t>(ki) * geom.W2 + i2) * geom.W1 + i1];
    }
    const cplx& at(int ki, int i2, int i1) const {
        return values[(static_cast<size_t>(ki) * geom.W2 + i2) * geom.W1 + i1];
    }
};

struct GroupCoeffs {
    std::map<GroupBlockKey, GroupBlock> blocks;

    size_t total() const {
        size_t n = 0;
        for (const auto& [k, b] : blocks) n += b.size();
        return n;
    }
    double energy() const {
        double e = 0.0;
        for (const auto& [k, b] : blocks)
            for (const cplx& v : b.values) e += std::norm(v);
        return e;
    }
};

namespace detail {

struct GroupPlist {
    std::vector<int> plist;
};

inline GroupPlist group_plist(const GroupBandGeom& g) {
    GroupPlist lay;
    if (g.l == 0) {
        for (int p = -g.pmax; p <= g.pmax; ++p) lay.plist.push_back(p);
    } else {
        for (int p = -g.pmax; p <= -g.pmin; ++p) lay.plist.push_back(p);
        for (int p = g.pmin; p <= g.pmax; ++p) lay.plist.push_back(p);
    }
    return lay;
}

} // namespace detail

inline GroupBlock group_analyze_block(const GroupSystemParams& sys, int j, int l,
                                      const FineField& W) {
    GroupBandGeom g = group_band_geom(sys, j, l);
    detail::GroupPlist lay = detail::group_plist(g);
    const int cols = static_cast<int>(lay.plist.size());
    const double amp = g.h1 * g.h2 * std::pow(2.0, -1.5 * j);
    const double p16 = std::pow(16.0, j), p2j = std::pow(2.0, j);

    // fold columns, rows kept; rows indexed q + Q
    std::vector<cplx> A(static_cast<size_t>(g.rows()) * g.P1, cplx(0.0, 0.0));
    std::vector<cplx> bandv(static_cast<size_t>(cols));
    for (int c = 0; c < cols; ++c)
        bandv[static_cast<size_t>(c)] =
            std::conj(sys.bank.band_hat(l, lay.plist[static_cast<size_t>(c)] * g.h1 / p16));
    for (int qi = 0; qi < g.rows(); ++qi) {
        double eta2 = g.eta2(qi - g.Q);
        for (int c = 0; c < cols; ++c) {
            int p = lay.plist[static_cast<size_t>(c)];
            if (p == 0) continue;  // degenerate line
            double eta1 = p * g.h1;
            double r = (eta1 > 0 ? 1.0 : -1.0) * std::sqrt(2.0 * std::abs(eta1));
            cplx f = W.sample(r, eta2 * r);
            int rr = ((p % g.P1) + g.P1) % g.P1;
            A[static_cast<size_t>(qi) * g.P1 + rr] += f * bandv[static_cast<size_t>(c)] * amp;
        }
    }
    std::vector<cplx> rowbuf(static_cast<size_t>(g.P1));
    std::vector<cplx> V(static_cast<size_t>(g.rows()) * g.W1);
    for (int qi = 0; qi < g.rows(); ++qi) {
        std::copy_n(A.begin() + static_cast<size_t>(qi) * g.P1, g.P1, rowbuf.begin());
        fft::forward(rowbuf.data(), g.P1);
        for (int i1 = 0; i1 < g.W1; ++i1) {
            int b1 = ((detail::centered_bin(i1, g.W1) % g.P1) + g.P1) % g.P1;
            V[static_cast<size_t>(qi) * g.W1 + i1] = rowbuf[static_cast<size_t>(b1)];
        }
    }

    GroupBlock blk;
    blk.geom = g;
    blk.values.assign(static_cast<size_t>(2 * g.K + 1) * g.W2 * g.W1, cplx(0.0, 0.0));
    std::vector<cplx> buf(static_cast<size_t>(g.P2) * g.W1);
    std::vector<cplx> colbuf(static_cast<size_t>(g.P2));
    for (int ki = 0; ki < 2 * g.K + 1; ++ki) {
        int k = ki - g.K;
        int qc = k * g.kstep;  // window center row (q index)
        std::fill(buf.begin(), buf.end(), cplx(0.0, 0.0));
        bool any = false;
        for (int q = qc - g.sw; q <= qc + g.sw; ++q) {
            if (q < -g.Q || q > g.Q) continue;
            double wv = sys.window(p2j * g.eta2(q) - k);
            if (wv == 0.0) continue;
            any = true;
            int qm = ((q % g.P2) + g.P2) % g.P2;
            for (int i1 = 0; i1 < g.W1; ++i1)
                buf[static_cast<size_t>(qm) * g.W1 + i1] +=
                    wv * V[static_cast<size_t>(q + g.Q) * g.W1 + i1];
        }
        if (!any) continue;
        for (int i1 = 0; i1 < g.W1; ++i1) {
            for (int q = 0; q < g.P2; ++q)
                colbuf[static_cast<size_t>(q)] = buf[static_cast<size_t>(q) * g.W1 + i1];
            fft::forward(colbuf.data(), g.P2);
            for (int i2 = 0; i2 < g.W2; ++i2) {
                int m2 = detail::centered_bin(i2, g.W2);
                int b2 = ((m2 % g.P2) + g.P2) % g.P2;
                blk.at(ki, i2, i1) = colbuf[static_cast<size_t>(b2)];
            }
        }
    }
    return blk;
}

inline void group_synthesize_block(const GroupSystemParams& sys, const GroupBlock& blk,
                                   WarpedPatch& neg, WarpedPatch& pos) {
    const GroupBandGeom& g = blk.geom;
    detail::GroupPlist lay = detail::group_plist(g);
    const double p16 = std::pow(16.0, g.j), p2j = std::pow(2.0, g.j);
    const int nneg = (g.l == 0) ? 2 * g.pmax + 1 : g.pmax - g.pmin + 1;
    neg.resize(g.rows(), nneg);
    if (g.l != 0) pos.resize(g.rows(), nneg);

    std::vector<cplx> V(static_cast<size_t>(g.rows()) * g.W1, cplx(0.0, 0.0));
    std::vector<cplx> colbuf(static_cast<size_t>(g.P2));
    for (int ki = 0; ki < 2 * g.K + 1; ++ki) {
        int k = ki - g.K;
        int qc = k * g.kstep;
        for (int i1 = 0; i1 < g.W1; ++i1) {
            std::fill(colbuf.begin(), colbuf.end(), cplx(0.0, 0.0));
            bool nz = false;
            for (int i2 = 0; i2 < g.W2; ++i2) {
                cplx v = blk.at(ki, i2, i1);
                if (v == cplx(0.0, 0.0)) continue;
                nz = true;
                int m2 = detail::centered_bin(i2, g.W2);
                int b2 = ((m2 % g.P2) + g.P2) % g.P2;
                colbuf[static_cast<size_t>(b2)] += v;
            }
            if (!nz) continue;
            fft::backward(colbuf.data(), g.P2);
            for (int q = qc - g.sw; q <= qc + g.sw; ++q) {
                if (q < -g.Q || q > g.Q) continue;
                double wv = sys.window(p2j * g.eta2(q) - k);
                if (wv == 0.0) continue;
                int qm = ((q % g.P2) + g.P2) % g.P2;
                V[static_cast<size_t>(q + g.Q) * g.W1 + i1] += wv * colbuf[static_cast<size_t>(qm)];
            }
        }
    }
    std::vector<cplx> rowbuf(static_cast<size_t>(g.P1));
    const double amp = std::pow(2.0, -1.5 * g.j);
    std::vector<cplx> bandv(lay.plist.size());
    for (size_t c = 0; c < lay.plist.size(); ++c)
        bandv[c] = sys.bank.band_hat(g.l, lay.plist[c] * g.h1 / p16) * amp;
    for (int qi = 0; qi < g.rows(); ++qi) {
        std::fill(rowbuf.begin(), rowbuf.end(), cplx(0.0, 0.0));
        bool nz = false;
        for (int i1 = 0; i1 < g.W1; ++i1) {
            cplx v = V[static_cast<size_t>(qi) * g.W1 + i1];
            if (v == cplx(0.0, 0.0)) continue;
            nz = true;
            int m1 = detail::centered_bin(i1, g.W1);
            int b1 = ((m1 % g.P1) + g.P1) % g.P1;
            rowbuf[static_cast<size_t>(b1)] += v;
        }
        if (!nz) continue;
        fft::backward(rowbuf.data(), g.P1);
        for (size_t c = 0; c < lay.plist.size(); ++c) {
            int p = lay.plist[c];
            int rr = ((p % g.P1) + g.P1) % g.P1;
            cplx val = rowbuf[static_cast<size_t>(rr)] * bandv[c];
            if (g.l == 0) neg.at(qi, p + g.pmax) = val;
            else if (p < 0) neg.at(qi, p + g.pmax) = val;
            else pos.at(qi, p - g.pmin) = val;
        }
    }
}

class GroupSystem {
public:
    explicit GroupSystem(GroupSystemParams p) : sys_(std::move(p)) {
        for (int j = sys_.j0; j <= sys_.jmax; ++j)
            for (int l : group_bands(sys_, j)) keys_.push_back({j, l});
        std::sort(keys_.begin(), keys_.end());
    }

    const GroupSystemParams& params() const { return sys_; }
    const std::vector<GroupBlockKey>& block_keys() const { return keys_; }

    GroupCoeffs analyze(const GridFn& fhat) const {
        require_size(fhat);
        FineField W(fhat);
        GroupCoeffs out;
        std::vector<GroupBlock> blocks(keys_.size());
        parallel_for_blocks(static_cast<int>(keys_.size()), [&](int i) {
            blocks[static_cast<size_t>(i)] =
                group_analyze_block(sys_, keys_[static_cast<size_t>(i)].j,
                                    keys_[static_cast<size_t>(i)].l, W);
        });
        for (size_t i = 0; i < keys_.size(); ++i)
            out.blocks.emplace(keys_[i], std::move(blocks[i]));
        return out;
    }

    GridFn synthesize(const GroupCoeffs& coeffs) const {
        const int N = sys_.N;
        GridFn out(N);
        std::vector<const GroupBlock*> blks;
        for (const auto& [key, blk] : coeffs.blocks) blks.push_back(&blk);
        std::vector<WarpedPatch> negs(blks.size()), poss(blks.size());
        parallel_for_blocks(static_cast<int>(blks.size()), [&](int i) {
            group_synthesize_block(sys_, *blks[static_cast<size_t>(i)],
                                   negs[static_cast<size_t>(i)], poss[static_cast<size_t>(i)]);
        });
        const double w = 1.0 / sys_.tight_constant();  // = b
        for (size_t bi = 0; bi < blks.size(); ++bi) {
            const GroupBandGeom& g = blks[bi]->geom;
            for (int i2 = 0; i2 < N; ++i2)
                for (int i1 = 0; i1 < N; ++i1) {
                    double x1 = i1 - N / 2, x2 = i2 - N / 2;
                    if (x1 == 0.0) continue;
                    double eta1 = 0.5 * (x1 > 0 ? 1.0 : -1.0) * x1 * x1;
                    double eta2 = x2 / x1;
                    double pco = eta1 / g.h1;
                    double qco = eta2 / g.h2 + g.Q;
                    if (qco < -2.0 || qco > g.rows() + 1.0) continue;
                    cplx val(0.0, 0.0);
                    if (g.l == 0) {
                        if (std::abs(pco) > g.pmax + 2.0) continue;
                        val = patch_sample(negs[bi], qco, pco + g.pmax);
                    } else {
                        if (std::abs(pco) < g.pmin - 2.0 || std::abs(pco) > g.pmax + 2.0) continue;
                        if (pco < 0) val = patch_sample(negs[bi], qco, pco + g.pmax);
                        else val = patch_sample(poss[bi], qco, pco - g.pmin);
                    }
                    out.at(i1, i2) += w * val;
                }
        }
        return out;
    }

    TightnessResult tightness_ratio(const GridFn& fhat) const {
        require_size(fhat);
        GroupCoeffs c = analyze(fhat);
        TightnessResult r;
        double den = fhat.norm2();
        if (den == 0.0) throw std::invalid_argument("tightness_ratio: zero input");
        r.ratio = c.energy() / sys_.tight_constant() / den;
        double cov = 0.0;
        const int N = sys_.N;
        for (int i2 = 0; i2 < N; ++i2)
            for (int i1 = 0; i1 < N; ++i1) {
                double x1 = i1 - N / 2;
                double x2 = i2 - N / 2;
                cov += coverage_at(x1, x2) * std::norm(fhat.at(i1, i2));
            }
        r.coverage = cov / den;
        r.warned = r.coverage < 0.999;
        return r;
    }

    /// Pointwise partition value of the enumerated scales (group systems
    /// never cover the xi1 = 0 line; the scale-j0 scaling layer is part of
    /// the system, so coverage is the jmax+1 low-pass value).
    double coverage_at(double x1, double x2) const {
        (void)x2;
        if (x1 == 0.0) return 0.0;
        double g1 = 0.5 * x1 * x1;
        double hi = sys_.bank.phi_hat(g1 / std::pow(16.0, sys_.jmax + 1));
        return hi * hi;
    }

private:
    void require_size(const GridFn& g) const {
        if (g.N != sys_.N) throw std::invalid_argument("GroupSystem: grid size mismatch");
    }

    GroupSystemParams sys_;
    std::vector<GroupBlockKey> keys_;
};

/// Closed-form group atom value at an arbitrary frequency point (zero on
/// the degenerate line).
inline cplx group_atom_value(const GroupSystemParams& sys, const GroupAtomIndex& idx,
                             double x1, double x2) {
    if (x1 == 0.0) return {0.0, 0.0};
    const double p16 = std::pow(16.0, idx.j), p2j = std::pow(2.0, idx.j);
    double g1 = 0.5 * (x1 > 0 ? 1.0 : -1.0) * x1 * x1;
    double g2 = x2 / x1;
    cplx band = (idx.kind == AtomKind::Scaling) ? cplx(sys.bank.phi_hat(g1 / p16), 0.0)
                                                : sys.bank.band_hat(idx.l, g1 / p16);
    if (band == cplx(0.0, 0.0)) return {0.0, 0.0};
    double wv = sys.window(p2j * g2 - idx.k);
    if (wv == 0.0) return {0.0, 0.0};
    double phase = 2.0 * kPi * (idx.m1 * g1 / p16 + idx.m2 * sys.b() * p2j * g2);
    return std::pow(2.0, -1.5 * idx.j) * band * wv * std::exp(cplx(0.0, phase));
}

/// Closed-form group atom on the frequency grid.
inline GridFn group_atom_hat(const GroupSystemParams& sys, const GroupAtomIndex& idx) {
    const int N = sys.N;
    GridFn out(N);
    for (int i2 = 0; i2 < N; ++i2)
        for (int i1 = 0; i1 < N; ++i1)
            out.at(i1, i2) = group_atom_value(sys, idx, i1 - N / 2, i2 - N / 2);
    return out;
}

inline std::vector<cplx> group_analyze_direct(const GridFn& fhat, const GroupSystemParams& sys,
                                              const std::vector<GroupAtomIndex>& indices) {
    std::vector<cplx> out;
    out.reserve(indices.size());
    for (const GroupAtomIndex& idx : indices) {
        GridFn atom = group_atom_hat(sys, idx);
        cplx c(0.0, 0.0);
        for (size_t i = 0; i < atom.data.size(); ++i)
            c += fhat.data[i] * std::conj(atom.data[i]);
        out.push_back(c);
    }
    return out;
}

/// Finite index enumeration matching the fast path's coefficient layout.
inline std::vector<GroupAtomIndex> enumerate_indices(const GroupSystemParams& sys) {
    std::vector<GroupAtomIndex> out;
    for (int j = sys.j0; j <= sys.jmax; ++j)
        for (int l : group_bands(sys, j)) {
            GroupBandGeom g = group_band_geom(sys, j, l);
            for (int k = -g.K; k <= g.K; ++k)
                for (int i2 = 0; i2 < g.W2; ++i2)
                    for (int i1 = 0; i1 < g.W1; ++i1)
                        out.push_back({l == 0 ? AtomKind::Scaling : AtomKind::Wavelet, j, l, k,
                                       detail::centered_bin(i1, g.W1),
                                       detail::centered_bin(i2, g.W2)});
        }
    return out;
}

/// Residual of re-expanding scale-j0 content through the scale-(j0+1)
/// scaling layer: random fields on the warped patch, restricted to the
/// region where the V_{j0+1} partition is identically one (so they lie in
/// the discretized V oplus W span), are analyzed against the scaling-layer
/// atoms with complete modulation sets; the energy identity
/// b sum|c|^2 = ||f||^2 must hold. Returns the max relative mismatch.
inline double two_scale_residual(const GroupSystemParams& sys, int trials, uint64_t seed = 7) {
    const int j1 = sys.j0 + 1;
    GroupBandGeom g = group_band_geom(sys, j1, 0);
    detail::GroupPlist lay = detail::group_plist(g);
    const int cols = static_cast<int>(lay.plist.size());
    const double p16 = std::pow(16.0, j1), p2j = std::pow(2.0, j1);
    uint64_t state = seed * 0x9e3779b97f4a7c15ull + 1;
    auto next = [&state]() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return static_cast<double>(state >> 11) / 9007199254740992.0 - 0.5;
    };
    // interior restriction: flat band region and full window partition
    const double etamax = (sys.bank.family() == BankFamily::Shannon ? 0.45 : 1.0 / 3.0 - 0.02);
    const int qlim = (g.K - 1) * g.kstep;
    double worst = 0.0;
    std::vector<cplx> colbuf;
    for (int t = 0; t < trials; ++t) {
        WarpedPatch f;
        f.resize(g.rows(), cols);
        for (int qi = 0; qi < g.rows(); ++qi) {
            if (std::abs(qi - g.Q) > qlim) continue;
            for (int c = 0; c < cols; ++c) {
                int p = lay.plist[static_cast<size_t>(c)];
                if (p == 0 || std::abs(p * g.h1 / p16) > etamax) continue;
                f.at(qi, c) = cplx(next(), next());
            }
        }
        // complete-bin analysis energy of the scaling layer on this patch
        double energy = 0.0;
        std::vector<cplx> A(static_cast<size_t>(g.rows()) * g.P1, cplx(0.0, 0.0));
        const double amp = g.h1 * g.h2 * std::pow(2.0, -1.5 * j1);
        for (int qi = 0; qi < g.rows(); ++qi)
            for (int c = 0; c < cols; ++c) {
                int p = lay.plist[static_cast<size_t>(c)];
                double bv = sys.bank.phi_hat(p * g.h1 / p16);
                if (bv == 0.0) continue;
                int rr = ((p % g.P1) + g.P1) % g.P1;
                A[static_cast<size_t>(qi) * g.P1 + rr] += f.at(qi, c) * bv * amp;
            }
        std::vector<cplx> rowbuf(static_cast<size_t>(g.P1));
        std::vector<cplx> V(static_cast<size_t>(g.rows()) * g.P1);
        for (int qi = 0; qi < g.rows(); ++qi) {
            std::copy_n(A.begin() + static_cast<size_t>(qi) * g.P1, g.P1, rowbuf.begin());
            fft::forward(rowbuf.data(), g.P1);
            std::copy_n(rowbuf.begin(), g.P1, V.begin() + static_cast<size_t>(qi) * g.P1);
        }
        colbuf.assign(static_cast<size_t>(g.P2), cplx(0.0, 0.0));
        std::vector<cplx> buf(static_cast<size_t>(g.P2) * g.P1);
        for (int k = -g.K; k <= g.K; ++k) {
            int qc = k * g.kstep;
            std::fill(buf.begin(), buf.end(), cplx(0.0, 0.0));
            bool any = false;
            for (int q = qc - g.sw; q <= qc + g.sw; ++q) {
                if (q < -g.Q || q > g.Q) continue;
                double wv = sys.window(p2j * g.eta2(q) - k);
                if (wv == 0.0) continue;
                any = true;
                int qm = ((q % g.P2) + g.P2) % g.P2;
                for (int i1 = 0; i1 < g.P1; ++i1)
                    buf[static_cast<size_t>(qm) * g.P1 + i1] +=
                        wv * V[static_cast<size_t>(q + g.Q) * g.P1 + i1];
            }
            if (!any) continue;
            for (int i1 = 0; i1 < g.P1; ++i1) {
                for (int q = 0; q < g.P2; ++q)
                    colbuf[static_cast<size_t>(q)] = buf[static_cast<size_t>(q) * g.P1 + i1];
                fft::forward(colbuf.data(), g.P2);
                for (int q = 0; q < g.P2; ++q) energy += std::norm(colbuf[static_cast<size_t>(q)]);
            }
        }
        double nf = 0.0;
        for (const cplx& v : f.v) nf += std::norm(v);
        nf *= g.h1 * g.h2;
        if (nf == 0.0) continue;
        worst = std::max(worst, std::abs(energy * sys.b() / nf - 1.0));
    }
    return worst;
}

} // namespace gaborshear
