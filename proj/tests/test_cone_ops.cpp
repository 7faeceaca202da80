#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "gaborshear/cone_ops.hpp"

using namespace gaborshear;

namespace {
GridFn random_grid(int N, uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto u = [&rng]() { return (rng() >> 11) * (1.0 / 9007199254740992.0) - 0.5; };
    GridFn g(N);
    for (auto& v : g.data) v = cplx(u(), u());
    return g;
}
}  // namespace

TEST_CASE("cayley transform") {
    CHECK(std::abs(cayley(0.0) - cplx(1, 0)) < 1e-15);
    CHECK(std::abs(cayley(1.0) - cplx(0, 1)) < 1e-15);
    for (double t : {0.5, 2.0, -3.0}) {
        REQUIRE(std::abs(cayley(-1.0 / t) + cayley(t)) < 1e-14);
        REQUIRE(std::abs(std::abs(cayley(t)) - 1.0) < 1e-15);
    }
}

TEST_CASE("cayley identity residual") {
    ConeFilter meyer(Filter1D::meyer());
    CHECK(cayley_identity_residual(meyer, 4096) < 1e-12);
    ConeFilter shannon(Filter1D::shannon());
    CHECK(cayley_identity_residual(shannon, 4096) < 1e-12);
    ConeFilter broken(Filter1D{[](double) { return cplx(1, 0); }, FilterFamily::Custom});
    CHECK(cayley_identity_residual(broken, 128) == Catch::Approx(1.0));
}

TEST_CASE("cone projection identities") {
    ConeFilter cf(Filter1D::meyer());
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        GridFn g = random_grid(seed <= 10 ? 64 : 256, seed);
        GridFn ph = project_h(g, cf);
        GridFn pv = project_v(g, cf);
        double r_sum = 0.0, r_idem = 0.0, r_cross = 0.0;
        GridFn phh = project_h(ph, cf);
        GridFn phv = project_h(pv, cf);
        for (size_t i = 0; i < g.data.size(); ++i) {
            r_sum = std::max(r_sum, std::abs(ph.data[i] + pv.data[i] - g.data[i]));
            r_idem = std::max(r_idem, std::abs(phh.data[i] - ph.data[i]));
            r_cross = std::max(r_cross, std::abs(phv.data[i]));
        }
        REQUIRE(r_sum < 1e-10);
        REQUIRE(r_idem < 1e-10);
        REQUIRE(r_cross < 1e-10);
    }
}

TEST_CASE("shannon cone projection keeps in-cone data") {
    ConeFilter cf(Filter1D::shannon());
    const int N = 64;
    GridFn g(N);
    // support strictly inside the horizontal cone where H~ = 1
    for (int i2 = 0; i2 < N; ++i2)
        for (int i1 = 0; i1 < N; ++i1) {
            double x1 = i1 - N / 2, x2 = i2 - N / 2;
            if (std::abs(x1) >= 4 && std::abs(x2) < 0.3 * std::abs(x1))
                g.at(i1, i2) = cplx(std::sin(0.1 * i1 + 0.2 * i2), 0.3);
        }
    GridFn ph = project_h(g, cf);
    double r = 0.0;
    for (size_t i = 0; i < g.data.size(); ++i) r = std::max(r, std::abs(ph.data[i] - g.data[i]));
    CHECK(r < 1e-12);
}

TEST_CASE("xi embedding is an isometry on cone functions") {
    ConeFilter cf(Filter1D::meyer());
    const int N = 64;
    for (Orientation o : {Orientation::H, Orientation::V}) {
        GridFn g = random_grid(N, o == Orientation::H ? 31 : 32);
        auto mask = cone_mask(N, o);
        // strictly inside the open cone (skip the diagonal seam)
        for (int i2 = 0; i2 < N; ++i2)
            for (int i1 = 0; i1 < N; ++i1) {
                int a1 = std::abs(i1 - N / 2), a2 = std::abs(i2 - N / 2);
                bool in = (o == Orientation::H) ? (a2 < a1) : (a2 > a1);
                if (!in) g.at(i1, i2) = 0.0;
            }
        (void)mask;
        GridFn e = xi_embed(g, cf, o);
        REQUIRE(std::abs(e.norm2() / g.norm2() - 1.0) < 1e-10);
    }
}

TEST_CASE("half-weight masked reassembly is exact") {
    ConeFilter cf(Filter1D::meyer());
    const int N = 32;
    GridFn g = random_grid(N, 77);
    auto mh = cone_mask(N, Orientation::H);
    auto mv = cone_mask(N, Orientation::V);
    GridFn wh = xi_adjoint_unrestricted(g, cf, Orientation::H);
    GridFn wv = xi_adjoint_unrestricted(g, cf, Orientation::V);
    GridFn rec = xi_embed(multiply(wh, mh), cf, Orientation::H);
    GridFn rv = xi_embed(multiply(wv, mv), cf, Orientation::V);
    double r = 0.0;
    for (size_t i = 0; i < g.data.size(); ++i)
        r = std::max(r, std::abs(rec.data[i] + rv.data[i] - g.data[i]));
    CHECK(r < 1e-12);
}
