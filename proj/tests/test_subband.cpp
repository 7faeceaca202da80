#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "gaborshear/subband.hpp"

using namespace gaborshear;

namespace {
CoeffSeq random_seq(int L, uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto u = [&rng]() { return (rng() >> 11) * (1.0 / 9007199254740992.0) - 0.5; };
    CoeffSeq s;
    s.values.resize(static_cast<size_t>(L));
    for (auto& v : s.values) v = cplx(u(), u());
    return s;
}
}  // namespace

TEST_CASE("z transform basics") {
    CoeffSeq delta;
    delta.values.assign(8, cplx(0, 0));
    delta.values[0] = 1.0;
    CHECK(std::abs(z_transform(delta, 0.37) - cplx(1, 0)) < 1e-15);
    CoeffSeq shifted;
    shifted.values.assign(8, cplx(0, 0));
    shifted.values[1] = 1.0;
    CHECK(std::abs(z_transform(shifted, 0.5) - cplx(-1, 0)) < 1e-14);
    // DFT bin as oracle
    CoeffSeq s = random_seq(16, 5);
    std::vector<cplx> spec = s.values;
    fft::forward(spec);
    for (int k = 0; k < 16; ++k)
        REQUIRE(std::abs(z_transform(s, static_cast<double>(k) / 16) - spec[static_cast<size_t>(k)]) < 1e-12);
}

TEST_CASE("length validation") {
    WaveletBank b(16, Profile::Poly4, BankFamily::Meyer);
    CoeffSeq s = random_seq(24, 1);
    CHECK_THROWS_AS(project_subband(b, 0, s), std::invalid_argument);
}

TEST_CASE("shannon band selector at M=2") {
    WaveletBank b(2, Profile::Poly4, BankFamily::Shannon);
    const int L = 64;
    CoeffSeq s;
    s.values.resize(L);
    for (int n = 0; n < L; ++n)
        s.values[static_cast<size_t>(n)] = std::exp(cplx(0, 2.0 * kPi * n / L));
    CoeffSeq p0 = project_subband(b, 0, s);
    CoeffSeq p1 = project_subband(b, 1, s);
    for (int n = 0; n < L; ++n) {
        REQUIRE(std::abs(p0.values[static_cast<size_t>(n)] - s.values[static_cast<size_t>(n)]) < 1e-12);
        REQUIRE(std::abs(p1.values[static_cast<size_t>(n)]) < 1e-12);
    }
    CoeffSeq zero;
    zero.values.assign(L, cplx(0, 0));
    CoeffSeq pz = project_subband(b, 1, zero);
    CHECK(l2(pz) == 0.0);
}

TEST_CASE("meyer M=2 completeness on random data") {
    WaveletBank b(2, Profile::Poly4, BankFamily::Meyer);
    CoeffSeq s = random_seq(256, 11);
    CoeffSeq p0 = project_subband(b, 0, s);
    CoeffSeq p1 = project_subband(b, 1, s);
    double r = 0.0;
    for (int n = 0; n < 256; ++n)
        r += std::norm(p0.values[static_cast<size_t>(n)] + p1.values[static_cast<size_t>(n)] -
                       s.values[static_cast<size_t>(n)]);
    CHECK(std::sqrt(r) / l2(s) < 1e-10);
}

TEST_CASE("projection residual battery") {
    for (int M : {2, 16}) {
        WaveletBank b(M, Profile::Poly4, BankFamily::Meyer);
        int L = (M == 2) ? 256 : 512;
        for (int t = 0; t < 8; ++t) {
            CoeffSeq s = random_seq(L, 100 + static_cast<uint64_t>(t));
            ProjectionResiduals r = projection_residuals(b, s);
            REQUIRE(r.idempotence < 1e-10);
            REQUIRE(r.orthogonality < 1e-10);
            REQUIRE(r.completeness < 1e-10);
        }
    }
    WaveletBank bs(16, Profile::Poly4, BankFamily::Shannon);
    CoeffSeq s = random_seq(512, 3);
    ProjectionResiduals r = projection_residuals(bs, s);
    CHECK(r.idempotence < 1e-12);
    CHECK(r.orthogonality < 1e-12);
    CHECK(r.completeness < 1e-12);
}

TEST_CASE("hermitian symmetry of projections") {
    WaveletBank b(16, Profile::Poly4, BankFamily::Meyer);
    CoeffSeq x = random_seq(256, 21), y = random_seq(256, 22);
    for (int l : {0, 3, 15}) {
        CoeffSeq px = project_subband(b, l, x);
        CoeffSeq py = project_subband(b, l, y);
        cplx a(0, 0), c(0, 0);
        for (int n = 0; n < 256; ++n) {
            a += px.values[static_cast<size_t>(n)] * std::conj(y.values[static_cast<size_t>(n)]);
            c += x.values[static_cast<size_t>(n)] * std::conj(py.values[static_cast<size_t>(n)]);
        }
        REQUIRE(std::abs(a - c) / std::abs(a) < 1e-10);
    }
}

TEST_CASE("M=2 theorem form agrees with the G form") {
    WaveletBank b(2, Profile::Poly4, BankFamily::Meyer);
    Filter1D H = Filter1D::meyer();
    CoeffSeq s = random_seq(256, 33);
    CoeffSeq thm = project_subband(b, 1, s);
    CoeffSeq prop = project_highband_gform(H, s);
    double r = 0.0;
    for (int n = 0; n < 256; ++n)
        r += std::norm(thm.values[static_cast<size_t>(n)] - prop.values[static_cast<size_t>(n)]);
    CHECK(std::sqrt(r) / l2(s) < 1e-12);
}

TEST_CASE("low band data reduction is L/M periodic after symbol division") {
    // DFT of P_{V_{-1}} x divided by the H0 symbol is invariant under the
    // L/M rotation wherever H0 is bounded away from zero
    WaveletBank b(2, Profile::Poly4, BankFamily::Meyer);
    const int L = 256;
    CoeffSeq s = random_seq(L, 44);
    CoeffSeq p0 = project_subband(b, 0, s);
    std::vector<cplx> spec = p0.values;
    fft::forward(spec);
    for (int i = 0; i < L; ++i) {
        double xi = static_cast<double>(i) / L;
        cplx h = b.filter_symbol(0, xi);
        cplx h2 = b.filter_symbol(0, xi + 0.5);
        if (std::abs(h) < 0.3 || std::abs(h2) < 0.3) continue;
        cplx a = spec[static_cast<size_t>(i)] / h;
        cplx c = spec[static_cast<size_t>((i + L / 2) % L)] / h2;
        REQUIRE(std::abs(a - c) < 1e-9 * l2(s));
    }
}
