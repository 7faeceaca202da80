#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gaborshear/filters1d.hpp"

namespace gaborshear {

enum class BankFamily { Meyer, Shannon };

namespace detail {

inline bool is_pow2(int m) { return m >= 1 && (m & (m - 1)) == 0; }

/// Stage filters of the packet cascade evaluated at xi: bit 0 of n selects
/// H/G at argument xi, bit s at argument 2^s xi.
inline cplx packet_symbol(const Filter1D& H, int n, int depth, double xi) {
    cplx out(1.0, 0.0);
    double arg = xi;
    for (int s = 0; s < depth; ++s) {
        out *= ((n >> s) & 1) ? highpass_from_lowpass(H, arg) : H(arg);
        if (out == cplx(0.0, 0.0)) return out;
        arg *= 2.0;
    }
    return out;
}

} // namespace detail

/// M-band wavelet bank built as a depth-log2(M) packet cascade of a
/// Smith-Barnwell pair (H, G), relabeled so that band l occupies the
/// frequency cell [l/2, (l+1)/2] in the Shannon limit. Band 0 is the
/// scaling function.
class WaveletBank {
public:
    WaveletBank(int M, Profile profile, BankFamily family)
        : M_(M), profile_(profile), family_(family) {
        if (M < 2) throw std::invalid_argument("WaveletBank: M >= 2");
        if (!detail::is_pow2(M))
            throw std::invalid_argument("WaveletBank: M must be a power of two");
        depth_ = 0;
        while ((1 << depth_) < M) ++depth_;
        H_ = (family == BankFamily::Meyer) ? Filter1D::meyer(profile) : Filter1D::shannon();
        build_band_order();
        scan_supports();
    }

    int M() const { return M_; }
    BankFamily family() const { return family_; }
    const Filter1D& lowpass() const { return H_; }

    /// phi_hat — the scaling function of the M-band MRA (classical Meyer /
    /// Shannon scaling function).
    double phi_hat(double xi) const {
        return family_ == BankFamily::Meyer ? meyer_scaling_hat(profile_, xi)
                                            : shannon_scaling_hat(xi);
    }

    /// Filter symbol H_l(e^{-2 pi i xi}) for band l (l=0 is the low pass).
    cplx filter_symbol(int l, double xi) const {
        check_band(l, true);
        return detail::packet_symbol(H_, order_[l], depth_, xi);
    }

    /// psi_hat_l(eta) = H_l(e^{-2 pi i eta/M}) phi_hat(eta/M); band(0) gives
    /// phi_hat itself.
    cplx band_hat(int l, double eta) const {
        check_band(l, true);
        if (l == 0) return {phi_hat(eta), 0.0};
        double ph = phi_hat(eta / M_);
        if (ph == 0.0) return {0.0, 0.0};
        return detail::packet_symbol(H_, order_[l], depth_, eta / M_) * ph;
    }

    cplx psi_hat(int l, double eta) const {
        check_band(l, false);
        return band_hat(l, eta);
    }

    /// Positive-side support [lo, hi] of band l (scanned; Meyer packets
    /// smear beyond their Shannon cells).
    std::pair<double, double> band_support(int l) const {
        check_band(l, true);
        return supports_[static_cast<size_t>(l)];
    }

    double outer_edge() const { return supports_.back().second; }

private:
    void check_band(int l, bool allow0) const {
        if (l < (allow0 ? 0 : 1) || l >= M_)
            throw std::invalid_argument("WaveletBank: band index out of range");
    }

    void build_band_order() {
        // identify each packet's Shannon band from the indicator cascade
        order_.assign(static_cast<size_t>(M_), -1);
        Filter1D Hs = Filter1D::shannon();
        std::vector<bool> used(static_cast<size_t>(M_), false);
        for (int l = 0; l < M_; ++l) {
            double mid = (l + 0.5) / 2.0 / M_;  // band midpoint / M
            int hit = -1;
            for (int n = 0; n < M_; ++n) {
                if (used[static_cast<size_t>(n)]) continue;
                if (std::abs(detail::packet_symbol(Hs, n, depth_, mid)) > 0.5) {
                    hit = n;
                    break;
                }
            }
            if (hit < 0) throw std::logic_error("WaveletBank: band ordering failed");
            used[static_cast<size_t>(hit)] = true;
            order_[static_cast<size_t>(l)] = hit;
        }
    }

    void scan_supports() {
        supports_.resize(static_cast<size_t>(M_));
        double emax = 2.0 * M_ / 3.0 + 0.01;
        const int n = 20000 * M_ / 2;
        for (int l = 0; l < M_; ++l) {
            double lo = emax, hi = 0.0;
            for (int i = 0; i <= n; ++i) {
                double eta = emax * i / n;
                if (std::abs(band_hat(l, eta)) > 1e-13) {
                    lo = std::min(lo, eta);
                    hi = std::max(hi, eta);
                }
            }
            if (l == 0) lo = 0.0;
            // pad by one scan cell so the interval is a true cover
            double cell = emax / n;
            supports_[static_cast<size_t>(l)] = {std::max(0.0, lo - cell),
                                                 std::min(emax, hi + cell)};
        }
    }

    int M_;
    Profile profile_;
    BankFamily family_;
    int depth_ = 1;
    Filter1D H_;
    std::vector<int> order_;
    std::vector<std::pair<double, double>> supports_;
};

inline WaveletBank build_mband_bank(int M, Profile profile, BankFamily family) {
    return WaveletBank(M, profile, family);
}

/// max over midpoint-sampled z of the max-entry residual of
/// A(z) A(z)^* - I, with A(z)_{n,l} = H_n(omega^l z).
inline double modulation_matrix_residual(const WaveletBank& bank, int nsamples) {
    const int M = bank.M();
    double worst = 0.0;
    std::vector<cplx> A(static_cast<size_t>(M * M));
    for (int k = 0; k < nsamples; ++k) {
        double xi = (k + 0.5) / nsamples - 0.5;
        for (int n = 0; n < M; ++n)
            for (int l = 0; l < M; ++l)
                A[static_cast<size_t>(n * M + l)] =
                    bank.filter_symbol(n, xi + static_cast<double>(l) / M);
        for (int r = 0; r < M; ++r) {
            for (int c = 0; c < M; ++c) {
                cplx dot(0.0, 0.0);
                for (int l = 0; l < M; ++l)
                    dot += A[static_cast<size_t>(r * M + l)] *
                           std::conj(A[static_cast<size_t>(c * M + l)]);
                if (r == c) dot -= 1.0;
                worst = std::max(worst, std::abs(dot));
            }
        }
    }
    return worst;
}

} // namespace gaborshear
