#pragma once

#include <stdexcept>
#include <vector>

#include "gaborshear/fft.hpp"
#include "gaborshear/mband.hpp"

namespace gaborshear {

/// Periodic coefficient sequence of length L, L divisible by the band count
/// so the rotation R_M is an exact DFT index shift.
struct CoeffSeq {
    std::vector<cplx> values;
    int size() const { return static_cast<int>(values.size()); }
};

/// Zf(z) at z = e^{-2 pi i xi}, indices 0..L-1.
inline cplx z_transform(const CoeffSeq& seq, double xi) {
    cplx z = std::exp(cplx(0.0, -2.0 * kPi * xi));
    cplx zp(1.0, 0.0), out(0.0, 0.0);
    for (const cplx& c : seq.values) {
        out += c * zp;
        zp *= z;
    }
    return out;
}

/// Subband projection P_{W_{-1,l}} = H_l (sum_j R_M^j) conj(H_l) realized on
/// the length-L DFT grid: multiply the DFT by conj(H_l), periodize over the
/// M rotations (bin k gains bins k + t L/M), multiply by H_l, invert.
inline CoeffSeq project_subband(const WaveletBank& bank, int l, const CoeffSeq& seq) {
    const int L = seq.size();
    const int M = bank.M();
    if (L < M || L % M != 0)
        throw std::invalid_argument("project_subband: sequence length must be a multiple of M");
    std::vector<cplx> spec = seq.values;
    fft::forward(spec);
    std::vector<cplx> u(static_cast<size_t>(L));
    for (int i = 0; i < L; ++i)
        u[static_cast<size_t>(i)] =
            std::conj(bank.filter_symbol(l, static_cast<double>(i) / L)) *
            spec[static_cast<size_t>(i)];
    const int step = L / M;
    std::vector<cplx> v(static_cast<size_t>(L));
    for (int i = 0; i < L; ++i) {
        cplx s(0.0, 0.0);
        for (int t = 0; t < M; ++t) s += u[static_cast<size_t>((i + t * step) % L)];
        v[static_cast<size_t>(i)] = bank.filter_symbol(l, static_cast<double>(i) / L) * s;
    }
    fft::backward(v);
    CoeffSeq out;
    out.values.resize(static_cast<size_t>(L));
    for (int i = 0; i < L; ++i) out.values[static_cast<size_t>(i)] = v[static_cast<size_t>(i)] / static_cast<double>(L);
    return out;
}

/// M=2 projection in the conj(H_-)(I - R_2)H_- form of the proposition,
/// used as the acceptance cross-check against the theorem form.
inline CoeffSeq project_highband_gform(const Filter1D& H, const CoeffSeq& seq) {
    const int L = seq.size();
    if (L % 2 != 0) throw std::invalid_argument("project_highband_gform: even length required");
    std::vector<cplx> spec = seq.values;
    fft::forward(spec);
    std::vector<cplx> v(static_cast<size_t>(L));
    for (int i = 0; i < L; ++i) {
        double xi = static_cast<double>(i) / L;
        cplx a = H(xi + 0.5) * spec[static_cast<size_t>(i)];
        cplx b = H(xi) * spec[static_cast<size_t>((i + L / 2) % L)];
        // conj(H_-) applies after the (I - R_2) combination; R_2 maps the
        // symbol H(-z) to H(z) at the shifted bin.
        v[static_cast<size_t>(i)] = std::conj(H(xi + 0.5)) * (a - b);
    }
    fft::backward(v);
    CoeffSeq out;
    out.values.resize(static_cast<size_t>(L));
    for (int i = 0; i < L; ++i) out.values[static_cast<size_t>(i)] = v[static_cast<size_t>(i)] / static_cast<double>(L);
    return out;
}

inline double l2(const CoeffSeq& a) {
    double s = 0.0;
    for (const cplx& v : a.values) s += std::norm(v);
    return std::sqrt(s);
}

struct ProjectionResiduals {
    double idempotence = 0.0;
    double orthogonality = 0.0;
    double completeness = 0.0;
};

/// Relative residuals of P_l^2 - P_l, P_l P_k (l != k) and sum_l P_l - I
/// applied to one sequence.
inline ProjectionResiduals projection_residuals(const WaveletBank& bank, const CoeffSeq& seq) {
    const int M = bank.M();
    const int L = seq.size();
    double nrm = l2(seq);
    if (nrm == 0.0) return {};
    ProjectionResiduals out;
    std::vector<CoeffSeq> proj;
    proj.reserve(static_cast<size_t>(M));
    for (int l = 0; l < M; ++l) proj.push_back(project_subband(bank, l, seq));

    CoeffSeq sum;
    sum.values.assign(static_cast<size_t>(L), cplx(0.0, 0.0));
    for (int l = 0; l < M; ++l) {
        CoeffSeq pp = project_subband(bank, l, proj[static_cast<size_t>(l)]);
        double r = 0.0;
        for (int i = 0; i < L; ++i) {
            r += std::norm(pp.values[static_cast<size_t>(i)] -
                           proj[static_cast<size_t>(l)].values[static_cast<size_t>(i)]);
            sum.values[static_cast<size_t>(i)] += proj[static_cast<size_t>(l)].values[static_cast<size_t>(i)];
        }
        out.idempotence = std::max(out.idempotence, std::sqrt(r) / nrm);
    }
    for (int l = 0; l < M; ++l)
        for (int k = l + 1; k < M; ++k) {
            CoeffSeq pk = project_subband(bank, l, proj[static_cast<size_t>(k)]);
            out.orthogonality = std::max(out.orthogonality, l2(pk) / nrm);
        }
    double r = 0.0;
    for (int i = 0; i < L; ++i)
        r += std::norm(sum.values[static_cast<size_t>(i)] - seq.values[static_cast<size_t>(i)]);
    out.completeness = std::sqrt(r) / nrm;
    return out;
}

} // namespace gaborshear
