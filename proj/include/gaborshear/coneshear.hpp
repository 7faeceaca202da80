#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <future>
#include <map>
#include <stdexcept>
#include <thread>
#include <vector>

#include "gaborshear/cone_ops.hpp"
#include "gaborshear/mband.hpp"
#include "gaborshear/warp.hpp"
#include "gaborshear/window.hpp"

namespace gaborshear {

inline int env_thread_count() {
    if (const char* s = std::getenv("ARTIFACT_THREADS")) {
        int n = std::atoi(s);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 8u));
}

/// Runs fn(i) for i in [0, n) across a few worker threads; the work items
/// write to disjoint outputs, so scheduling cannot affect results.
template <typename Fn>
inline void parallel_for_blocks(int n, Fn&& fn) {
    int threads = std::min(env_thread_count(), n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::future<void>> futs;
    futs.reserve(static_cast<size_t>(threads));
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t)
        futs.push_back(std::async(std::launch::async, [&]() {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        }));
    for (auto& f : futs) f.get();
}

enum class AtomKind : uint8_t { Scaling = 0, Wavelet = 1 };

struct ConeAtomIndex {
    AtomKind kind = AtomKind::Wavelet;
    Orientation orient = Orientation::H;
    int j = 0;
    int l = 1;   // band, 1..M-1 (scaling layer uses l = 0)
    int k = 0;   // shear, |k/N0| <= 2^{j-1}
    int m1 = 0;  // centered modulation indices
    int m2 = 0;
};

/// Coarse-layer atom: a weighted delta pair on the frequency lattice,
/// u1 delta_(a,b) + u2 delta_(-a,-b).
struct DiskAtom {
    int a = 0, b = 0;
    double u1 = 1.0, u2 = 0.0;
};

struct ConeSystemParams {
    WaveletBank bank;
    PeriodizedWindow pwindow;
    ConeFilter filter;
    int N = 256;
    int j0 = 1;
    int jmax = 3;
    // discretization knobs: quadrature oversampling and the stored
    // modulation-window pad
    double osf1 = 8.0;
    double osf2 = 2.0;
    double mpad = 1.25;

    static int cover_jmax(int N) {
        int j = 0;
        while (std::sqrt(2.0 / 3.0) * std::pow(2.0, 2.0 * (j + 1)) <
               (N / 2.0) * std::sqrt(2.0))
            ++j;
        return j;
    }

    static ConeSystemParams make(int N, int N0 = 4, int tau = 3, int j0 = 1,
                                 int jmax = -1, double eps = -1.0,
                                 BankFamily family = BankFamily::Meyer,
                                 Profile profile = Profile::Poly4) {
        if (eps < 0.0) eps = max_tight_epsilon(N0, tau);
        Window w(profile, eps);
        Filter1D H = (family == BankFamily::Meyer) ? Filter1D::meyer(profile)
                                                   : Filter1D::shannon();
        ConeSystemParams p{WaveletBank(16, profile, family),
                           PeriodizedWindow(w, N0, tau), ConeFilter(H), N, j0,
                           jmax < 0 ? cover_jmax(N) : jmax};
        if (j0 > 1 || j0 < 0)
            throw std::invalid_argument(
                "ConeSystemParams: j0 must be 0 or 1 (coarse-layer handoff)");
        if (p.jmax < p.j0) throw std::invalid_argument("ConeSystemParams: jmax >= j0");
        return p;
    }

    int N0() const { return pwindow.N0; }
    int tau() const { return pwindow.tau; }
    double tight_constant() const { return pwindow.redundancy(); }
};

/// Per-(scale, band) discretization geometry shared by analysis and
/// synthesis. Rows run over the slope interval (-1,1) with half-cell
/// offsets; columns over the warped radial variable.
struct ConeBandGeom {
    int j = 0, l = 1;
    int P1 = 1;       // m1-character fold period, in columns
    double h1 = 1.0;  // column spacing; P1 * h1 = 16^j
    int P2 = 1;       // m2-character period, in rows
    int G2 = 1;       // interior rows over (-1,1)
    double h2 = 1.0;  // = 2 / G2
    int W1 = 1, W2 = 1;
    int K = 0;        // shears k in [-K, K]
    int sw = 1;       // window half-width in rows, padded
    int pmin = 0, pmax = 0;

    int shear_count() const { return 2 * K + 1; }
    int w2_for(int k) const { return std::abs(k) == K ? P2 : std::min(W2, P2); }
    double eta2(int q) const { return -1.0 + (q + 0.5) * h2; }
    /// row index nearest the center of window k (center = k alpha 2^{-j})
    int qcenter(int k, int N0) const { return k * (G2 / N0 / (1 << j)) + G2 / 2; }
};

inline ConeBandGeom cone_band_geom(const ConeSystemParams& sys, int j, int l) {
    ConeBandGeom g;
    g.j = j;
    g.l = l;
    auto [lo, hi] = sys.bank.band_support(l);
    const double p16 = std::pow(16.0, j), p4 = std::pow(4.0, j), p2 = std::pow(2.0, j);
    const double eps = sys.pwindow.base.epsilon;
    const double xi_lo = std::sqrt(2.0 * std::max(lo, 1.0 / 3.0));
    const double xi_hi = std::min(std::sqrt(2.0 * hi) * p4, sys.N / 2.0) / p4;
    g.P1 = static_cast<int>(std::ceil(sys.osf1 * p4 / xi_lo));
    g.h1 = p16 / g.P1;
    g.P2 = sys.N0() * std::max(1, static_cast<int>(std::ceil(
                              sys.osf2 * p2 * (1.0 + 2.0 * eps) * xi_hi / sys.N0())));
    g.G2 = sys.tau() * (1 << j) * g.P2;
    g.h2 = 2.0 / g.G2;
    const double xi_min_data = std::max(1.0, xi_lo * p4);
    g.W1 = std::min(g.P1, 2 * static_cast<int>(std::ceil(sys.mpad * p16 / xi_min_data)) + 3);
    g.W2 = std::min(g.P2, 2 * static_cast<int>(std::ceil(sys.mpad * p2 * xi_hi / sys.tau())) + 5);
    g.K = (j >= 1) ? sys.N0() * (1 << (j - 1)) : sys.N0() / 2;
    g.sw = static_cast<int>(std::ceil((1.0 + 2.0 * eps) / (sys.N0() * p2) / g.h2)) + 2;
    const double e1max = (sys.N / 2.0) * (sys.N / 2.0) / 2.0 * (1.0 + 1e-9);
    g.pmax = static_cast<int>(std::floor(std::min(hi * p16, e1max) / g.h1));
    g.pmin = std::max(1, static_cast<int>(std::ceil(lo * p16 / g.h1)));
    return g;
}

/// Bands of scale j whose support meets the grid.
inline std::vector<int> cone_bands(const ConeSystemParams& sys, int j) {
    std::vector<int> out;
    const double e1max = (sys.N / 2.0) * (sys.N / 2.0) / 2.0 * (1.0 + 1e-9);
    for (int l = 1; l < sys.bank.M(); ++l)
        if (sys.bank.band_support(l).first * std::pow(16.0, j) <= e1max) out.push_back(l);
    return out;
}

/// Coarse-layer atoms: deltas on max|xi| < 4^{j0}, one pair atom per {xi,-xi}
/// on the handoff ring max|xi| = 4^{j0}. Deterministic (b, a) scan order.
inline std::vector<DiskAtom> cone_disk_atoms(const ConeSystemParams& sys) {
    std::vector<DiskAtom> out;
    const int ring = 1 << (2 * sys.j0);
    const int half = sys.N / 2;
    const double r = 1.0 / std::sqrt(2.0);
    for (int b = -half; b < half; ++b)
        for (int a = -half; a < half; ++a) {
            int m = std::max(std::abs(a), std::abs(b));
            if (m < ring) out.push_back({a, b, 1.0, 0.0});
            else if (m == ring && (a > 0 || (a == 0 && b > 0))) out.push_back({a, b, r, r});
        }
    return out;
}

struct ConeBlockKey {
    Orientation orient;
    int j, l;
    bool operator<(const ConeBlockKey& o) const {
        if (orient != o.orient) return orient == Orientation::H;
        if (j != o.j) return j < o.j;
        return l < o.l;
    }
};

/// Coefficients of one (orientation, scale, band): stored per shear as a
/// centered W1 x W2k modulation window, iteration order (k, m2, m1).
struct ConeBlock {
    ConeBandGeom geom;
    std::vector<size_t> offset;  // per shear index
    std::vector<cplx> values;

    size_t size() const { return values.size(); }
    cplx& at(int ki, int i2, int i1) {
        return values[offset[static_cast<size_t>(ki)] +
                      static_cast<size_t>(i2) * geom.W1 + i1];
    }
    const cplx& at(int ki, int i2, int i1) const {
        return values[offset[static_cast<size_t>(ki)] +
                      static_cast<size_t>(i2) * geom.W1 + i1];
    }
};

struct ConeCoeffs {
    std::map<ConeBlockKey, ConeBlock> blocks;
    std::vector<cplx> disk;

    size_t total() const {
        size_t n = disk.size();
        for (const auto& [k, b] : blocks) n += b.size();
        return n;
    }
    double energy() const {
        double e = 0.0;
        for (const cplx& v : disk) e += std::norm(v);
        for (const auto& [k, b] : blocks)
            for (const cplx& v : b.values) e += std::norm(v);
        return e;
    }
};

namespace detail {

/// e^{2 pi i (m2 tau / 2) u(q)} = base_phase(m2) * e^{2 pi i m2 q / P2}.
inline cplx m2_base_phase(int m2, int P2, int tau, int j) {
    // e^{pi i m2 / P2} * e^{-2 pi i m2 tau 2^{j-1}}
    double ang = kPi * m2 / P2 - 2.0 * kPi * m2 * tau * std::pow(2.0, j - 1);
    return std::exp(cplx(0.0, ang));
}

inline void cone_warp_row_coords(const ConeSystemParams& sys, Orientation o,
                                 const ConeBandGeom& g, int p, double& x1s,
                                 double& x2s) {
    // radial coordinate of column p; slope applied per row by the caller
    double eta1 = p * g.h1;
    double r = (eta1 > 0 ? 1.0 : -1.0) * std::sqrt(2.0 * std::abs(eta1));
    if (o == Orientation::H) { x1s = r; x2s = 0.0; }
    else                      { x1s = 0.0; x2s = r; }
}

} // namespace detail

/// Warped data patch for one block: rows q in [0, G2), columns the signed
/// p range (negative block then positive block for l > 0).
struct ConePatchLayout {
    std::vector<int> plist;
    int col_of(int p, const ConeBandGeom& g) const {
        // negative block: p in [-pmax, -pmin] -> col 0..; positive block after
        if (p < 0) return p + g.pmax;
        return (g.pmax - g.pmin + 1) + (p - g.pmin);
    }
};

inline ConePatchLayout cone_patch_layout(const ConeBandGeom& g) {
    ConePatchLayout lay;
    for (int p = -g.pmax; p <= -g.pmin; ++p) lay.plist.push_back(p);
    for (int p = g.pmin; p <= g.pmax; ++p) lay.plist.push_back(p);
    return lay;
}

/// Analysis of one block from the fine-sampled symmetrized field.
inline ConeBlock cone_analyze_block(const ConeSystemParams& sys, Orientation o,
                                    int j, int l, const FineField& W) {
    ConeBandGeom g = cone_band_geom(sys, j, l);
    ConePatchLayout lay = cone_patch_layout(g);
    const int cols = static_cast<int>(lay.plist.size());
    const double amp = g.h1 * g.h2 * std::pow(2.0, -1.5 * j);
    const double p16 = std::pow(16.0, j), p2j = std::pow(2.0, j);
    const int tau = sys.tau();

    // fold columns into the P1-periodic buffer, rows kept
    std::vector<cplx> A(static_cast<size_t>(g.G2) * g.P1, cplx(0.0, 0.0));
    std::vector<cplx> bandv(static_cast<size_t>(cols));
    for (int c = 0; c < cols; ++c)
        bandv[static_cast<size_t>(c)] =
            std::conj(sys.bank.band_hat(l, lay.plist[static_cast<size_t>(c)] * g.h1 / p16));
    for (int q = 0; q < g.G2; ++q) {
        double eta2 = g.eta2(q);
        for (int c = 0; c < cols; ++c) {
            int p = lay.plist[static_cast<size_t>(c)];
            double eta1 = p * g.h1;
            double r = (eta1 > 0 ? 1.0 : -1.0) * std::sqrt(2.0 * std::abs(eta1));
            double x1 = (o == Orientation::H) ? r : eta2 * r;
            double x2 = (o == Orientation::H) ? eta2 * r : r;
            cplx f = W.sample(x1, x2);
            int rr = ((p % g.P1) + g.P1) % g.P1;
            A[static_cast<size_t>(q) * g.P1 + rr] += f * bandv[static_cast<size_t>(c)] * amp;
        }
    }
    // m1 DFT per row
    std::vector<cplx> rowbuf(static_cast<size_t>(g.P1));
    std::vector<cplx> V(static_cast<size_t>(g.G2) * g.W1);
    std::vector<int> m1bins(static_cast<size_t>(g.W1));
    for (int i1 = 0; i1 < g.W1; ++i1)
        m1bins[static_cast<size_t>(i1)] =
            ((detail::centered_bin(i1, g.W1) % g.P1) + g.P1) % g.P1;
    for (int q = 0; q < g.G2; ++q) {
        std::copy_n(A.begin() + static_cast<size_t>(q) * g.P1, g.P1, rowbuf.begin());
        fft::forward(rowbuf.data(), g.P1);
        for (int i1 = 0; i1 < g.W1; ++i1)
            V[static_cast<size_t>(q) * g.W1 + i1] = rowbuf[static_cast<size_t>(m1bins[static_cast<size_t>(i1)])];
    }

    ConeBlock blk;
    blk.geom = g;
    blk.offset.resize(static_cast<size_t>(g.shear_count()));
    size_t tot = 0;
    for (int ki = 0; ki < g.shear_count(); ++ki) {
        blk.offset[static_cast<size_t>(ki)] = tot;
        tot += static_cast<size_t>(g.W1) * g.w2_for(ki - g.K);
    }
    blk.values.assign(tot, cplx(0.0, 0.0));

    std::vector<cplx> buf(static_cast<size_t>(g.P2) * g.W1);
    std::vector<cplx> colbuf(static_cast<size_t>(g.P2));
    for (int ki = 0; ki < g.shear_count(); ++ki) {
        int k = ki - g.K;
        int W2k = g.w2_for(k);
        double u0 = k * 2.0 / sys.N0();
        int qc = g.qcenter(k, sys.N0());
        std::fill(buf.begin(), buf.end(), cplx(0.0, 0.0));
        bool any = false;
        for (int q = qc - g.sw; q <= qc + g.sw; ++q) {
            if (q < 0 || q >= g.G2) continue;
            double wv = sys.pwindow.pre(p2j * g.eta2(q) - u0);
            if (wv == 0.0) continue;
            any = true;
            int qm = q % g.P2;
            for (int i1 = 0; i1 < g.W1; ++i1)
                buf[static_cast<size_t>(qm) * g.W1 + i1] +=
                    wv * V[static_cast<size_t>(q) * g.W1 + i1];
        }
        if (!any) continue;
        for (int i1 = 0; i1 < g.W1; ++i1) {
            for (int q = 0; q < g.P2; ++q) colbuf[static_cast<size_t>(q)] = buf[static_cast<size_t>(q) * g.W1 + i1];
            fft::forward(colbuf.data(), g.P2);
            for (int i2 = 0; i2 < W2k; ++i2) {
                int m2 = detail::centered_bin(i2, W2k);
                int b2 = ((m2 % g.P2) + g.P2) % g.P2;
                blk.at(ki, i2, i1) = colbuf[static_cast<size_t>(b2)] *
                                     std::conj(detail::m2_base_phase(m2, g.P2, tau, j));
            }
        }
    }
    return blk;
}

/// Synthesis of one block onto its warped patches (negative / positive
/// column blocks), including the extrapolation pad rows.
inline void cone_synthesize_block(const ConeSystemParams& sys, const ConeBlock& blk,
                                  WarpedPatch& neg, WarpedPatch& pos, int Sx) {
    const ConeBandGeom& g = blk.geom;
    ConePatchLayout lay = cone_patch_layout(g);
    const int tau = sys.tau();
    const double p16 = std::pow(16.0, g.j), p2j = std::pow(2.0, g.j);
    const int nneg = g.pmax - g.pmin + 1;
    neg.resize(g.G2 + 2 * Sx, nneg);
    pos.resize(g.G2 + 2 * Sx, nneg);

    // accumulate rows of the m1-spectrum per interior row, then invert
    std::vector<cplx> V(static_cast<size_t>(g.G2) * g.W1, cplx(0.0, 0.0));
    std::vector<cplx> colbuf(static_cast<size_t>(g.P2));
    for (int ki = 0; ki < g.shear_count(); ++ki) {
        int k = ki - g.K;
        int W2k = g.w2_for(k);
        double u0 = k * 2.0 / sys.N0();
        int qc = g.qcenter(k, sys.N0());
        for (int i1 = 0; i1 < g.W1; ++i1) {
            std::fill(colbuf.begin(), colbuf.end(), cplx(0.0, 0.0));
            for (int i2 = 0; i2 < W2k; ++i2) {
                int m2 = detail::centered_bin(i2, W2k);
                int b2 = ((m2 % g.P2) + g.P2) % g.P2;
                colbuf[static_cast<size_t>(b2)] +=
                    blk.at(ki, i2, i1) * detail::m2_base_phase(m2, g.P2, tau, g.j);
            }
            fft::backward(colbuf.data(), g.P2);  // sum_m c e^{+2 pi i m q / P2}
            for (int q = qc - g.sw; q <= qc + g.sw; ++q) {
                if (q < 0 || q >= g.G2) continue;
                double wv = sys.pwindow.pre(p2j * g.eta2(q) - u0);
                if (wv == 0.0) continue;
                V[static_cast<size_t>(q) * g.W1 + i1] += wv * colbuf[static_cast<size_t>(q % g.P2)];
            }
        }
    }
    // invert m1 and scatter to columns
    std::vector<cplx> rowbuf(static_cast<size_t>(g.P1));
    const double amp = std::pow(2.0, -1.5 * g.j);
    std::vector<cplx> bandv(lay.plist.size());
    for (size_t c = 0; c < lay.plist.size(); ++c)
        bandv[c] = sys.bank.band_hat(g.l, lay.plist[c] * g.h1 / p16) * amp;
    for (int q = 0; q < g.G2; ++q) {
        std::fill(rowbuf.begin(), rowbuf.end(), cplx(0.0, 0.0));
        for (int i1 = 0; i1 < g.W1; ++i1) {
            int m1 = detail::centered_bin(i1, g.W1);
            int b1 = ((m1 % g.P1) + g.P1) % g.P1;
            rowbuf[static_cast<size_t>(b1)] += V[static_cast<size_t>(q) * g.W1 + i1];
        }
        fft::backward(rowbuf.data(), g.P1);
        for (size_t c = 0; c < lay.plist.size(); ++c) {
            int p = lay.plist[c];
            int rr = ((p % g.P1) + g.P1) % g.P1;
            cplx val = rowbuf[static_cast<size_t>(rr)] * bandv[c];
            if (p < 0) neg.at(q + Sx, p + g.pmax) = val;
            else       pos.at(q + Sx, p - g.pmin) = val;
        }
    }
    // linear extrapolation into the pad rows (cone-boundary values)
    auto extrap = [&](WarpedPatch& P) {
        for (int t = 1; t <= Sx; ++t)
            for (int c = 0; c < P.cols; ++c) {
                P.at(Sx - t, c) = 2.0 * P.at(Sx - t + 1, c) - P.at(Sx - t + 2, c);
                P.at(g.G2 + Sx - 1 + t, c) =
                    2.0 * P.at(g.G2 + Sx - 2 + t, c) - P.at(g.G2 + Sx - 3 + t, c);
            }
    };
    extrap(neg);
    extrap(pos);
}

struct TightnessResult {
    double ratio = 0.0;
    double coverage = 1.0;
    bool warned = false;
};

class ConeSystem {
public:
    explicit ConeSystem(ConeSystemParams p) : sys_(std::move(p)) {
        disk_atoms_ = cone_disk_atoms(sys_);
        for (int j = sys_.j0; j <= sys_.jmax; ++j)
            for (int l : cone_bands(sys_, j)) {
                keys_.push_back({Orientation::H, j, l});
                keys_.push_back({Orientation::V, j, l});
            }
        std::sort(keys_.begin(), keys_.end());
    }

    const ConeSystemParams& params() const { return sys_; }
    const std::vector<DiskAtom>& disk_atoms() const { return disk_atoms_; }
    const std::vector<ConeBlockKey>& block_keys() const { return keys_; }

    ConeCoeffs analyze(const GridFn& fhat) const {
        require_size(fhat);
        ConeCoeffs out;
        FineField Wh(xi_adjoint_unrestricted(fhat, sys_.filter, Orientation::H));
        FineField Wv(xi_adjoint_unrestricted(fhat, sys_.filter, Orientation::V));
        std::vector<ConeBlock> blocks(keys_.size());
        parallel_for_blocks(static_cast<int>(keys_.size()), [&](int i) {
            const ConeBlockKey& key = keys_[static_cast<size_t>(i)];
            const FineField& W = key.orient == Orientation::H ? Wh : Wv;
            blocks[static_cast<size_t>(i)] =
                cone_analyze_block(sys_, key.orient, key.j, key.l, W);
        });
        for (size_t i = 0; i < keys_.size(); ++i)
            out.blocks.emplace(keys_[i], std::move(blocks[i]));
        out.disk.resize(disk_atoms_.size());
        const double s = std::sqrt(sys_.tight_constant());
        const int half = sys_.N / 2;
        for (size_t i = 0; i < disk_atoms_.size(); ++i) {
            const DiskAtom& d = disk_atoms_[i];
            cplx v = d.u1 * fhat.atf(d.a, d.b);
            if (d.u2 != 0.0) v += d.u2 * fhat.atf(-d.a, -d.b);
            (void)half;
            out.disk[i] = s * v;
        }
        return out;
    }

    GridFn synthesize(const ConeCoeffs& coeffs) const {
        const int N = sys_.N;
        GridFn sh(N), sv(N);
        const int Sx = 4;
        // per-orientation warped accumulation, then resample at the grid
        for (Orientation o : {Orientation::H, Orientation::V}) {
            GridFn& S = (o == Orientation::H) ? sh : sv;
            std::vector<const ConeBlock*> blks;
            for (const auto& [key, blk] : coeffs.blocks)
                if (key.orient == o) blks.push_back(&blk);
            std::vector<WarpedPatch> negs(blks.size()), poss(blks.size());
            parallel_for_blocks(static_cast<int>(blks.size()), [&](int i) {
                cone_synthesize_block(sys_, *blks[static_cast<size_t>(i)],
                                      negs[static_cast<size_t>(i)], poss[static_cast<size_t>(i)], Sx);
            });
            for (size_t bi = 0; bi < blks.size(); ++bi) {
                const ConeBandGeom& g = blks[bi]->geom;
                for (int i2 = 0; i2 < N; ++i2)
                    for (int i1 = 0; i1 < N; ++i1) {
                        double x1 = i1 - N / 2, x2 = i2 - N / 2;
                        double a = (o == Orientation::H) ? x1 : x2;
                        double bb = (o == Orientation::H) ? x2 : x1;
                        if (a == 0.0) continue;
                        if (std::abs(bb) > std::abs(a)) continue;  // closed cone
                        double eta1 = 0.5 * (a > 0 ? 1.0 : -1.0) * a * a;
                        double eta2 = bb / a;
                        double pco = eta1 / g.h1;
                        if (std::abs(pco) < g.pmin - 2.0 || std::abs(pco) > g.pmax + 2.0) continue;
                        double qco = (eta2 + 1.0) / g.h2 - 0.5 + Sx;
                        cplx val;
                        if (pco < 0)
                            val = patch_sample(negs[bi], qco, pco + g.pmax);
                        else
                            val = patch_sample(poss[bi], qco, pco - g.pmin);
                        S.at(i1, i2) += val;
                    }
            }
        }
        GridFn out(N);
        {
            auto mh = cone_mask(N, Orientation::H);
            auto mv = cone_mask(N, Orientation::V);
            GridFn a = xi_embed(multiply(sh, mh), sys_.filter, Orientation::H);
            GridFn b = xi_embed(multiply(sv, mv), sys_.filter, Orientation::V);
            const double w = 1.0 / sys_.tight_constant();
            for (size_t i = 0; i < out.data.size(); ++i)
                out.data[i] = w * (a.data[i] + b.data[i]);
        }
        const double s = std::sqrt(sys_.tight_constant()) / sys_.tight_constant();
        for (size_t i = 0; i < disk_atoms_.size(); ++i) {
            const DiskAtom& d = disk_atoms_[i];
            out.atf(d.a, d.b) += s * d.u1 * coeffs.disk[i];
            if (d.u2 != 0.0) out.atf(-d.a, -d.b) += s * d.u2 * coeffs.disk[i];
        }
        return out;
    }

    /// Pointwise coverage of the enumerated scales: the low-pass partition
    /// value of scale jmax+1 (bands are clipped to the grid, so this is
    /// exact for grid-supported data).
    double coverage_at(int xi1, int xi2) const {
        double t = 0.5 * std::max(static_cast<double>(xi1) * xi1,
                                  static_cast<double>(xi2) * xi2);
        double v = sys_.bank.phi_hat(t / std::pow(16.0, sys_.jmax + 1));
        return v * v;
    }

    TightnessResult tightness_ratio(const GridFn& fhat) const {
        require_size(fhat);
        ConeCoeffs c = analyze(fhat);
        TightnessResult r;
        double den = fhat.norm2();
        if (den == 0.0) throw std::invalid_argument("tightness_ratio: zero input");
        r.ratio = c.energy() / sys_.tight_constant() / den;
        double cov = 0.0;
        const int N = sys_.N;
        for (int i2 = 0; i2 < N; ++i2)
            for (int i1 = 0; i1 < N; ++i1)
                cov += coverage_at(i1 - N / 2, i2 - N / 2) * std::norm(fhat.at(i1, i2));
        r.coverage = cov / den;
        r.warned = r.coverage < 0.999;
        return r;
    }

private:
    void require_size(const GridFn& g) const {
        if (g.N != sys_.N) throw std::invalid_argument("ConeSystem: grid size mismatch");
    }

    ConeSystemParams sys_;
    std::vector<DiskAtom> disk_atoms_;
    std::vector<ConeBlockKey> keys_;
};

/// Inner warped tensor of a cone atom at an arbitrary frequency point,
/// restricted to the closed cone with half weight on the diagonals.
inline cplx cone_theta_value(const ConeSystemParams& sys, const ConeAtomIndex& idx,
                             double x1, double x2) {
    double a = (idx.orient == Orientation::H) ? x1 : x2;
    double bb = (idx.orient == Orientation::H) ? x2 : x1;
    if (a == 0.0) return {0.0, 0.0};
    double w = (std::abs(bb) > std::abs(a)) ? 0.0 : (std::abs(bb) == std::abs(a) ? 0.5 : 1.0);
    if (w == 0.0) return {0.0, 0.0};
    const double p16 = std::pow(16.0, idx.j), p2j = std::pow(2.0, idx.j);
    double g1 = 0.5 * (a > 0 ? 1.0 : -1.0) * a * a;
    double g2 = bb / a;
    cplx band = (idx.kind == AtomKind::Scaling)
                    ? cplx(sys.bank.phi_hat(g1 / p16), 0.0)
                    : sys.bank.band_hat(idx.l, g1 / p16);
    if (band == cplx(0.0, 0.0)) return {0.0, 0.0};
    // single-bump lattice window: the scale-j shears tile the slope
    // interval, with the two endpoint shears forming the cut wrap pair
    double wv = sys.pwindow.pre(p2j * g2 - idx.k * sys.pwindow.alpha());
    if (wv == 0.0) return {0.0, 0.0};
    double phase = 2.0 * kPi * (idx.m1 * g1 / p16 + (idx.m2 * sys.tau() / 2.0) * p2j * g2);
    return std::pow(2.0, -1.5 * idx.j) * w * band * wv * std::exp(cplx(0.0, phase));
}

/// Closed-form cone atom value: the symmetrizer Xi applied pointwise,
/// Psi(x) = H~_iota(x) [theta(x) +- c theta(Rx) +- conj(c) theta(R^3 x)].
inline cplx cone_atom_value(const ConeSystemParams& sys, const ConeAtomIndex& idx,
                            double x1, double x2) {
    const cplx c(0.5, 0.5);
    cplx t0 = cone_theta_value(sys, idx, x1, x2);
    cplx t1 = cone_theta_value(sys, idx, x2, -x1);
    cplx t3 = cone_theta_value(sys, idx, -x2, x1);
    double sgn = (idx.orient == Orientation::H) ? 1.0 : -1.0;
    cplx combo = t0 + sgn * (c * t1 + std::conj(c) * t3);
    double t = 0.0;
    cplx mult;
    ConeFilter const& cf = sys.filter;
    if (x1 == 0.0 && x2 == 0.0) mult = 1.0 / std::sqrt(2.0);
    else if (idx.orient == Orientation::H)
        mult = (x1 == 0.0) ? cplx(0, 0) : (x2 == 0.0 ? cplx(1, 0) : cf.lifted(x2 / x1));
    else
        mult = (x1 == 0.0) ? cplx(1, 0) : (x2 == 0.0 ? cplx(0, 0) : cf.lifted_reflected(x2 / x1));
    (void)t;
    return mult * combo;
}

/// Closed-form cone atom on the frequency grid.
inline GridFn cone_atom_hat(const ConeSystemParams& sys, const ConeAtomIndex& idx) {
    const int N = sys.N;
    if (std::abs(static_cast<double>(idx.k) / sys.N0()) > std::pow(2.0, idx.j - 1) + 1e-12)
        throw std::invalid_argument("cone_atom_hat: shear out of range");
    GridFn out(N);
    for (int i2 = 0; i2 < N; ++i2)
        for (int i1 = 0; i1 < N; ++i1)
            out.at(i1, i2) = cone_atom_value(sys, idx, i1 - N / 2, i2 - N / 2);
    return out;
}

/// Direct (quadratic-cost) coefficients against closed-form atoms on the
/// frequency grid, for oracle-style comparisons on index subsets.
inline std::vector<cplx> cone_analyze_direct(const GridFn& fhat, const ConeSystemParams& sys,
                                             const std::vector<ConeAtomIndex>& indices) {
    std::vector<cplx> out;
    out.reserve(indices.size());
    for (const ConeAtomIndex& idx : indices) {
        GridFn atom = cone_atom_hat(sys, idx);
        cplx c(0.0, 0.0);
        for (size_t i = 0; i < atom.data.size(); ++i)
            c += fhat.data[i] * std::conj(atom.data[i]);
        out.push_back(c);
    }
    return out;
}

/// Explicit-summation version of cone_analyze_block (no FFT factorization):
/// the two paths share every sample, so they must agree to rounding.
inline ConeBlock cone_analyze_block_direct(const ConeSystemParams& sys, Orientation o,
                                           int j, int l, const FineField& W) {
    ConeBandGeom g = cone_band_geom(sys, j, l);
    ConePatchLayout lay = cone_patch_layout(g);
    const double amp = g.h1 * g.h2 * std::pow(2.0, -1.5 * j);
    const double p16 = std::pow(16.0, j), p2j = std::pow(2.0, j);
    const int tau = sys.tau();

    ConeBlock blk;
    blk.geom = g;
    blk.offset.resize(static_cast<size_t>(g.shear_count()));
    size_t tot = 0;
    for (int ki = 0; ki < g.shear_count(); ++ki) {
        blk.offset[static_cast<size_t>(ki)] = tot;
        tot += static_cast<size_t>(g.W1) * g.w2_for(ki - g.K);
    }
    blk.values.assign(tot, cplx(0.0, 0.0));

    std::vector<cplx> F(static_cast<size_t>(g.G2) * lay.plist.size());
    for (int q = 0; q < g.G2; ++q)
        for (size_t c = 0; c < lay.plist.size(); ++c) {
            int p = lay.plist[c];
            double eta1 = p * g.h1, eta2 = g.eta2(q);
            double r = (eta1 > 0 ? 1.0 : -1.0) * std::sqrt(2.0 * std::abs(eta1));
            double x1 = (o == Orientation::H) ? r : eta2 * r;
            double x2 = (o == Orientation::H) ? eta2 * r : r;
            F[static_cast<size_t>(q) * lay.plist.size() + c] = W.sample(x1, x2);
        }
    for (int ki = 0; ki < g.shear_count(); ++ki) {
        int k = ki - g.K;
        int W2k = g.w2_for(k);
        double u0 = k * 2.0 / sys.N0();
        for (int i2 = 0; i2 < W2k; ++i2)
            for (int i1 = 0; i1 < g.W1; ++i1) {
                int m1 = detail::centered_bin(i1, g.W1);
                int m2 = detail::centered_bin(i2, W2k);
                cplx acc(0.0, 0.0);
                for (int q = 0; q < g.G2; ++q) {
                    double eta2 = g.eta2(q);
                    double wv = sys.pwindow.pre(p2j * eta2 - u0);
                    if (wv == 0.0) continue;
                    cplx ch2 = std::exp(cplx(0.0, 2.0 * kPi * (m2 * tau / 2.0) * p2j * eta2));
                    for (size_t c = 0; c < lay.plist.size(); ++c) {
                        int p = lay.plist[c];
                        cplx band = sys.bank.band_hat(l, p * g.h1 / p16);
                        if (band == cplx(0.0, 0.0)) continue;
                        cplx ch1 = std::exp(cplx(0.0, 2.0 * kPi * m1 * (p * g.h1) / p16));
                        acc += F[static_cast<size_t>(q) * lay.plist.size() + c] *
                               std::conj(band * ch1 * ch2) * wv;
                    }
                }
                blk.at(ki, i2, i1) = acc * amp;
            }
    }
    return blk;
}

} // namespace gaborshear
