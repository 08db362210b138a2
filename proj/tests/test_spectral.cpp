#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "branching/quadrature.hpp"
#include "branching/spectral.hpp"

using namespace branching;

namespace {

SpectralTrace random_trace(double L, int K, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    SpectralTrace g(L, K);
    for (int n2 = -K; n2 <= K; ++n2)
        for (int n1 = -K; n1 <= K; ++n1) {
            if (g.at(n1, n2) != cplx{} || (n1 == 0 && n2 == 0)) continue;
            const cplx v(nd(rng), nd(rng));
            g.at(n1, n2) = v;
            g.at(-n1, -n2) = std::conj(v);
        }
    g.at(0, 0) = 0.3;
    return g;
}

}  // namespace

TEST_CASE("interval transforms match quadrature") {
    for (double k : {0.0, 1e-9, 0.3, 2.0, -7.5, 40.0}) {
        const double x0 = 0.4, x1 = 1.7;
        auto re = [&](double x) { return std::cos(k * x); };
        auto im = [&](double x) { return -std::sin(k * x); };
        const cplx t = interval_transform(k, x0, x1);
        CHECK(t.real() == doctest::Approx(integrate(re, x0, x1, 64)).epsilon(1e-12));
        CHECK(t.imag() == doctest::Approx(integrate(im, x0, x1, 64)).epsilon(1e-12));
        auto mre = [&](double x) { return (x - x0) * std::cos(k * x); };
        auto mim = [&](double x) { return -(x - x0) * std::sin(k * x); };
        const cplx m = interval_moment_transform(k, x0, x1);
        CHECK(m.real() == doctest::Approx(integrate(mre, x0, x1, 64)).epsilon(1e-11));
        CHECK(m.imag() == doctest::Approx(integrate(mim, x0, x1, 64)).epsilon(1e-11));
    }
}

TEST_CASE("H^-1/2 norm of a cosine") {
    const double L = 3.0, c = 0.7;
    SpectralTrace g(L, 2);
    g.at(1, 0) = g.at(-1, 0) = c / 2.0;
    CHECK(hminus12_sq(g) == doctest::Approx(c * c * L * L * L / (4.0 * pi)).epsilon(1e-14));
    // Dilation by lambda scales the energy by lambda^3.
    SpectralTrace g2(2.0 * L, 2);
    g2.at(1, 0) = g2.at(-1, 0) = c / 2.0;
    CHECK(hminus12_sq(g2) == doctest::Approx(8.0 * hminus12_sq(g)).epsilon(1e-14));
}

TEST_CASE("sampling a band-limited trace is exact") {
    const auto g = random_trace(2.0, 5, 3);
    const auto samples = g.sample(16);
    const auto h = SpectralTrace::from_samples(samples, 16, 2.0, 5);
    double err = 0.0;
    for (int n2 = -5; n2 <= 5; ++n2)
        for (int n1 = -5; n1 <= 5; ++n1) err = std::max(err, std::abs(g.at(n1, n2) - h.at(n1, n2)));
    CHECK(err < 1e-12);
}

TEST_CASE("rectangle norm is independent of the split length") {
    const double L = 10.0;
    const std::vector<Rect> rects{{{1.0, 2.0}, {2.0, 1.5}, 0}, {{6.0, 6.5}, {3.0, 3.0}, 0},
                                  {{9.0, 0.5}, {0.9, 1.2}, 0}};
    const std::vector<double> amp{1.0, -0.4, 2.5};
    const double ref = hminus12_sq_rects(rects, amp, L, 0.5);
    for (double s0 : {0.05, 0.2, 1.0, 2.0})
        CHECK(hminus12_sq_rects(rects, amp, L, s0) == doctest::Approx(ref).epsilon(1e-10));
    CHECK(hminus12_sq_rects(rects, amp, L) == doctest::Approx(ref).epsilon(1e-10));

    // Shifting every rectangle (with wrap-around) leaves the norm unchanged.
    auto shifted = rects;
    for (auto& r : shifted) r.origin.x += 0.75;
    CHECK(hminus12_sq_rects(shifted, amp, L) == doctest::Approx(ref).epsilon(1e-10));

    // The truncated Fourier sum converges to it from below like 1/K.
    const double e1 = hminus12_sq(SpectralTrace::from_rects(rects, amp, L, 200));
    const double e2 = hminus12_sq(SpectralTrace::from_rects(rects, amp, L, 400));
    const double extrapolated = 2.0 * e2 - e1;
    CHECK(e1 < e2);
    CHECK(e2 < ref);
    CHECK(extrapolated == doctest::Approx(ref).epsilon(2e-4));
}

TEST_CASE("bucketed neighbour search agrees with the all-pairs path") {
    // Many small rectangles make the automatic split short enough to bucket.
    const double L = 1.0;
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> pos(-0.2, 1.2), side(0.002, 0.02), amp(-1.0, 1.0);
    std::vector<Rect> rects;
    std::vector<double> amps;
    for (int i = 0; i < 400; ++i) {
        rects.push_back({{pos(rng), pos(rng)}, {side(rng), side(rng)}, 0});
        amps.push_back(amp(rng));
    }
    const double bucketed = hminus12_sq_rects(rects, amps, L, 0.004);
    const double brute = hminus12_sq_rects(rects, amps, L, 0.1);
    CHECK(bucketed == doctest::Approx(brute).epsilon(1e-9));
}

TEST_CASE("norm equals the energy of the harmonic extension") {
    const double L = 1.0;
    const auto g = random_trace(L, 3, 11);
    const int n3 = 4001;
    const double depth = 8.0 * L;
    const GridField B = exterior_extension(g, depth, {8, 8, n3});
    const double h = depth / (n3 - 1);
    const double area = L * L / 64.0;
    double energy = 0.0;
    for (int i3 = 0; i3 < n3; ++i3) {
        double plane = 0.0;
        for (int i2 = 0; i2 < 8; ++i2)
            for (int i1 = 0; i1 < 8; ++i1) {
                const double b1 = B(i1, i2, i3, 0), b2 = B(i1, i2, i3, 1), b3 = B(i1, i2, i3, 2) - g.mean();
                plane += (b1 * b1 + b2 * b2 + b3 * b3) * area;
            }
        const double w = (i3 == 0 || i3 == n3 - 1) ? 1.0 : (i3 % 2 == 1 ? 4.0 : 2.0);
        energy += w * plane * h / 3.0;
    }
    CHECK(energy == doctest::Approx(hminus12_sq(g)).epsilon(1e-6));
}

TEST_CASE("vector potential of a vertical cosine field") {
    const double L = 4.0, c = 0.8;
    GridSpec spec{{16, 16, 9}, {0.0, 0.0, 0.0}, {L, L, 2.0}, {true, true, false}};
    GridField B(spec, 3);
    for (int i3 = 0; i3 < 9; ++i3)
        for (int i2 = 0; i2 < 16; ++i2)
            for (int i1 = 0; i1 < 16; ++i1) B(i1, i2, i3, 2) = c * std::cos(2.0 * pi * spec.coord(0, i1) / L);
    PotentialOptions opt;
    opt.tails = TailModel::constant;
    const GridField A = construct_vector_potential(B, 0.0, opt);
    double err = 0.0;
    for (int i3 = 0; i3 < 9; ++i3)
        for (int i2 = 0; i2 < 16; ++i2)
            for (int i1 = 0; i1 < 16; ++i1) {
                const double x1 = spec.coord(0, i1);
                err = std::max({err, std::abs(A(i1, i2, i3, 0)), std::abs(A(i1, i2, i3, 2)),
                                std::abs(A(i1, i2, i3, 1) - c * L / (2.0 * pi) * std::sin(2.0 * pi * x1 / L))});
            }
    CHECK(err < 1e-10);
}

TEST_CASE("uniform field has zero curl residual") {
    GridSpec spec{{8, 8, 5}, {0.0, 0.0, 0.0}, {2.0, 2.0, 1.0}, {true, true, false}};
    GridField B(spec, 3);
    for (int i3 = 0; i3 < 5; ++i3)
        for (int i2 = 0; i2 < 8; ++i2)
            for (int i1 = 0; i1 < 8; ++i1) B(i1, i2, i3, 2) = 0.25;
    const GridField A = construct_vector_potential(B, 0.25);
    CHECK(curl_residual(A, B) < 1e-14);
}

TEST_CASE("curl residual converges for a smooth harmonic field") {
    const auto g = random_trace(1.0, 2, 5);
    double prev = 0.0;
    for (int n : {16, 32, 64}) {
        const GridField B = exterior_extension(g, 0.5, {n, n, n / 2 + 1});
        const GridField A = construct_vector_potential(B, g.mean());
        const double r = curl_residual(A, B);
        if (prev > 0.0) CHECK(prev / r > 3.0);
        prev = r;
    }
}

TEST_CASE("flux mismatch and divergence are detected") {
    GridSpec spec{{8, 8, 5}, {0.0, 0.0, 0.0}, {2.0, 2.0, 1.0}, {true, true, false}};
    GridField B(spec, 3);
    for (int i3 = 0; i3 < 5; ++i3)
        for (int i2 = 0; i2 < 8; ++i2)
            for (int i1 = 0; i1 < 8; ++i1) B(i1, i2, i3, 2) = 0.25 + 0.1 * i3;
    CHECK_THROWS_AS(construct_vector_potential(B, 0.25), NotDivergenceFree);
    PotentialOptions loose;
    loose.divergence_tol = 10.0;
    CHECK_THROWS_AS(construct_vector_potential(B, 0.25, loose), FluxMismatch);
}

TEST_CASE("grid field round trip") {
    GridSpec spec{{3, 4, 5}, {0.0, 0.0, -1.0}, {1.0, 2.0, 1.0}, {true, true, false}};
    GridField f(spec, 2);
    f.linear_gauge_b = 0.125;
    for (std::size_t i = 0; i < f.values().size(); ++i) f.values()[i] = std::sin(1.0 + i);
    const std::string path = "grid_roundtrip.grdf";
    f.save(path);
    const GridField g = GridField::load(path);
    std::remove(path.c_str());
    CHECK(g.spec().dims == spec.dims);
    CHECK(g.linear_gauge_b == 0.125);
    CHECK(std::equal(f.values().begin(), f.values().end(), g.values().begin()));
}
