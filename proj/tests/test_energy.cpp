#include <doctest.h>

#include <cmath>
#include <random>

#include "branching/energy.hpp"
#include "branching/error.hpp"
#include "branching/quadrature.hpp"

using namespace branching;

namespace {

Params params(double kappa, std::int64_t quanta, double L, double T) {
    return validate_params(kappa, quanta, L, T, Mode::upper_bound);
}

SharpPattern straight_tube() {
    const Params p = params(0.5, 4, 16.0, 8.0);
    return build_pattern(p, make_plan(p, 1, 1.0, 0));
}

SharpPattern one_level() {
    const Params p = params(0.5, 16, 32.0, 128.0);
    return build_pattern(p, make_plan(p, 1, 1.0, 1));
}

// H^-1/2 norm of a rectangle trace by extrapolating truncated Fourier sums.
double fourier_oracle(const std::vector<Rect>& rects, double amp, double L) {
    const std::vector<double> a(rects.size(), amp);
    const double e1 = hminus12_sq(SpectralTrace::from_rects(rects, a, L, 200));
    const double e2 = hminus12_sq(SpectralTrace::from_rects(rects, a, L, 400));
    return 2.0 * e2 - e1;
}

}  // namespace

TEST_CASE("straight tube energies") {
    const SharpPattern pat = straight_tube();
    const Params& p = pat.params;
    const double a = pat.plan.rho0;
    const EnergyReport r = total_sharp_energy(pat);
    CHECK(r.surface == doctest::Approx(p.kappa * 4.0 * a * p.T).epsilon(1e-12));
    CHECK(r.junction_area == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.transport == 0.0);
    CHECK(r.coupling == 0.0);
    CHECK(r.exterior_bottom == r.exterior_top);

    const double ext = fourier_oracle(cross_section(pat, 0.0), pat.field_inside(), p.L);
    CHECK(r.exterior_bottom == doctest::Approx(ext).epsilon(2e-4));
    CHECK(r.total == doctest::Approx(r.surface + 2.0 * r.exterior_bottom).epsilon(1e-14));
    CHECK(r.ratio == doctest::Approx(r.total / predicted_bound(p)));
}

TEST_CASE("empty pattern has zero energy") {
    const Params p = validate_params(0.5, 0, 16.0, 8.0, Mode::upper_bound);
    const SharpPattern pat = make_empty_pattern(p);
    const EnergyReport r = gl_energy_grid(pat, {32, 32, 16});
    CHECK(r.total == 0.0);
    REQUIRE(r.gl);
    CHECK(r.gl->total == 0.0);
    CHECK(r.gl->shell == 0.0);
    CHECK(predicted_bound(p) == 0.0);
    CHECK(bulk_split_value(p) == 0.0);
}

TEST_CASE("exterior energy of simple traces") {
    const Params p = params(0.5, 4, 16.0, 8.0);
    const Rect whole{{0.0, 0.0}, {16.0, 16.0}, 4};
    const std::vector<Rect> uniform{whole};
    CHECK(std::abs(exterior_energy(uniform, p, p.b_ext)) < 1e-12);
    CHECK_THROWS_AS(exterior_energy(uniform, p, 2.0 * p.b_ext), FluxMismatch);
}

TEST_CASE("exterior energy of a square scales like a^2 |r|^{3/2}") {
    double ref = 0.0;
    for (double scale : {1.0, 3.0, 10.0}) {
        const double L = 8.0 * scale, side = 2.0 * scale;
        const std::vector<Rect> sq{{{3.0 * scale, 3.0 * scale}, {side, side}, 1}};
        const std::vector<double> amp{1.0};
        const double e = hminus12_sq_rects(sq, amp, L);
        const double c = e / std::pow(side * side, 1.5);
        if (ref == 0.0) ref = c;
        CHECK(c == doctest::Approx(ref).epsilon(1e-9));
    }
    CHECK(ref > 0.0);
    CHECK(ref < 1.0);
}

TEST_CASE("exterior energy does not depend on the split scale") {
    const SharpPattern pat = one_level();
    const auto trace = cross_section(pat, 0.0);
    const std::vector<double> amp(trace.size(), pat.field_inside());
    const double base = hminus12_sq_rects(trace, amp, pat.params.L);
    for (double s : {0.5, 1.0, 2.0, 4.0})
        CHECK(hminus12_sq_rects(trace, amp, pat.params.L, s) == doctest::Approx(base).epsilon(1e-8));
}

TEST_CASE("closed-form transport agrees with tensor Gauss quadrature") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.3, 2.0), shift(-1.0, 1.0);
    const auto& gl = gauss_legendre(32);
    for (int trial = 0; trial < 200; ++trial) {
        const double a = u(rng), b = u(rng), ratio = u(rng) / u(rng);
        const Rect bottom{{shift(rng), shift(rng)}, {a, b}, 1};
        const Rect top{{shift(rng), shift(rng)}, {a * ratio, b / ratio}, 1};
        const double t = 2.0 * std::max({a, b, a * ratio, b / ratio}) + u(rng);
        const double kappa = 0.5;
        const TubeSegment s = build_segment(bottom, top, 0.0, t, kappa);
        double q = 0.0;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            const double z = 0.5 * t * (gl.nodes[i] + 1.0);
            const Rect r = s.rect_at(z);
            for (std::size_t j = 0; j < gl.nodes.size(); ++j)
                for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
                    const double x1 = r.x0() + 0.5 * r.sides.x * (gl.nodes[j] + 1.0);
                    const double x2 = r.y0() + 0.5 * r.sides.y * (gl.nodes[k] + 1.0);
                    const Vec2 f = s.horizontal_field(kappa, x1, x2, z);
                    q += gl.weights[i] * gl.weights[j] * gl.weights[k] * 0.125 * t * r.area() *
                         (f.x * f.x + f.y * f.y);
                }
        }
        CHECK(s.transport_energy(kappa) == doctest::Approx(q).epsilon(1e-10));
    }
}

TEST_CASE("bulk constant and predicted bound") {
    const Params p = params(0.5, 4, 16.0, 8.0);
    const double b = p.b_ext;
    CHECK(bulk_split_value(p) ==
          doctest::Approx((0.5 * std::sqrt(2.0) * b - b * b) * 256.0 * 8.0).epsilon(1e-14));
    const double extreme = b * std::pow(0.5, 3.0 / 7.0) * std::pow(8.0, 3.0 / 7.0) * 256.0;
    const double intermediate = std::pow(b, 2.0 / 3.0) * std::pow(0.5, 2.0 / 3.0) * 2.0 * 256.0;
    CHECK(predicted_bound(p) == doctest::Approx(std::min(extreme, intermediate)).epsilon(1e-14));
}

TEST_CASE("grid GL energy of a straight tube") {
    const SharpPattern pat = straight_tube();
    const Params& p = pat.params;
    CHECK_THROWS_AS(gl_energy_grid(pat, {16, 16, 16}), ResolutionTooCoarse);

    // Offset shell of a square tube of side a: kinetic kappa^2 |shell| and
    // defect kappa^2 int (1 - kappa dist)^2 over edges and corner disks.
    const double a = pat.plan.rho0, k = p.kappa;
    const double shell = p.T * (16.0 / 3.0 * k * a + 7.0 * pi / 6.0);
    std::vector<double> errors;
    for (int n : {32, 64, 128}) {
        const EnergyReport r = gl_energy_grid(pat, {n, n, n / 2});
        REQUIRE(r.gl);
        const GlTerms& g = *r.gl;
        CHECK(g.kinetic_vertical == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(g.shell_constant <= 4.0);
        CHECK(g.total <= 10.0 * r.total);
        CHECK(g.total == doctest::Approx(g.kinetic_planar + g.kinetic_d3 + g.kinetic_vertical + g.coupling_sq +
                                         g.exterior));
        errors.push_back(std::abs(g.shell - shell) / shell);
        MESSAGE("n = " << n << ": shell " << g.shell << " vs " << shell);
    }
    CHECK(errors.back() < 0.02);
    CHECK(errors[2] < errors[0]);
}

TEST_CASE("grid GL energy of a branched pattern") {
    const SharpPattern pat = one_level();
    const EnergyReport coarse = gl_energy_grid(pat, {64, 64, 256});
    const EnergyReport fine = gl_energy_grid(pat, {128, 128, 512});
    REQUIRE(coarse.gl);
    REQUIRE(fine.gl);
    CHECK(fine.gl->total <= 10.0 * fine.total);
    CHECK(fine.gl->shell <= 4.0 * fine.surface);
    CHECK(fine.gl->kinetic_vertical > 0.0);
    CHECK(std::abs(fine.gl->shell - coarse.gl->shell) < 0.05 * fine.gl->shell);
    MESSAGE("shell constant " << fine.gl->shell_constant << ", E/F " << fine.gl->total / fine.total);
}
