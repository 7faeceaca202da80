#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "gaborshear/filters1d.hpp"

namespace gaborshear {

/// Finite frame: a list of vectors in C^d, none of them zero.
struct FiniteFrame {
    std::vector<std::vector<cplx>> vectors;

    int dim() const { return vectors.empty() ? 0 : static_cast<int>(vectors.front().size()); }

    void validate() const {
        if (vectors.empty()) throw std::invalid_argument("FiniteFrame: empty frame");
        for (const auto& v : vectors) {
            if (static_cast<int>(v.size()) != dim())
                throw std::invalid_argument("FiniteFrame: inconsistent dimensions");
            double n = 0.0;
            for (const cplx& x : v) n += std::norm(x);
            if (n <= 0.0) throw std::invalid_argument("FiniteFrame: zero vector");
        }
    }
};

/// R(x) = sum_i ||phi_i||^{-2} |<x, phi_i>|^2 for unit x (normalized
/// internally otherwise).
inline double redundancy_function(const FiniteFrame& frame, const std::vector<cplx>& x) {
    frame.validate();
    if (static_cast<int>(x.size()) != frame.dim())
        throw std::invalid_argument("redundancy_function: dimension mismatch");
    double nx = 0.0;
    for (const cplx& v : x) nx += std::norm(v);
    if (nx == 0.0) throw std::invalid_argument("redundancy_function: zero vector");
    double out = 0.0;
    for (const auto& phi : frame.vectors) {
        double np = 0.0;
        cplx ip(0.0, 0.0);
        for (size_t i = 0; i < phi.size(); ++i) {
            np += std::norm(phi[i]);
            ip += x[i] * std::conj(phi[i]);
        }
        out += std::norm(ip) / np;
    }
    return out / nx;
}

/// Extreme eigenvalues of the normalized frame operator
/// S = sum_i phi_i phi_i^* / ||phi_i||^2; random trials only cross-check the
/// bracketing R^- <= R(x) <= R^+.
inline std::pair<double, double> redundancy_bounds(const FiniteFrame& frame, int trials = 1) {
    frame.validate();
    if (trials < 1) throw std::invalid_argument("redundancy_bounds: trials >= 1");
    const int d = frame.dim();
    Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(d, d);
    Eigen::VectorXcd v(d);
    for (const auto& phi : frame.vectors) {
        double np = 0.0;
        for (int i = 0; i < d; ++i) {
            v(i) = phi[static_cast<size_t>(i)];
            np += std::norm(phi[static_cast<size_t>(i)]);
        }
        S.noalias() += (v * v.adjoint()) / np;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(S, Eigen::EigenvaluesOnly);
    double lo = es.eigenvalues().minCoeff();
    double hi = es.eigenvalues().maxCoeff();

    // sanity cross-check with deterministic pseudo-random unit vectors
    uint64_t state = 0x9e3779b97f4a7c15ull;
    auto next = [&state]() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return static_cast<double>(state >> 11) / 9007199254740992.0;
    };
    for (int t = 0; t < trials; ++t) {
        std::vector<cplx> x(static_cast<size_t>(d));
        for (int i = 0; i < d; ++i) x[static_cast<size_t>(i)] = cplx(next() - 0.5, next() - 0.5);
        double r = redundancy_function(frame, x);
        if (r < lo - 1e-8 || r > hi + 1e-8)
            throw std::logic_error("redundancy_bounds: sample escaped the eigenvalue bracket");
    }
    return {lo, hi};
}

} // namespace gaborshear
