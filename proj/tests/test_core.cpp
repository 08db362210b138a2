#include <doctest.h>

#include <cmath>
#include <random>

#include "branching/core.hpp"

using namespace branching;

namespace {

Rect unit_square(std::int64_t q) { return Rect{{0.0, 0.0}, {1.0, 1.0}, q}; }

}  // namespace

TEST_CASE("validate_params snaps b to the flux lattice") {
    const double L = 32768.0;
    const auto q = quanta_for_field(0.06, L);
    const Params p = validate_params(0.5, q, L, 4096.0, Mode::upper_bound);
    CHECK(p.b_ext == doctest::Approx(0.06).epsilon(1e-8));
    CHECK(p.b_ext * L * L / (2.0 * pi) == doctest::Approx(static_cast<double>(q)).epsilon(1e-14));
}

TEST_CASE("validate_params names the violated inequality") {
    CHECK_THROWS_AS(validate_params(0.6, 10, 100.0, 100.0, Mode::upper_bound), ConstraintViolated);
    CHECK_THROWS_AS(validate_params(0.5, 10, 100.0, 1.0, Mode::upper_bound), ConstraintViolated);
    const auto q = quanta_for_field(0.1, 100.0);
    CHECK_NOTHROW(validate_params(0.5, q, 100.0, 10.0, Mode::upper_bound));
    try {
        validate_params(0.5, q, 100.0, 10.0, Mode::lower_bound);
        FAIL("expected ConstraintViolated");
    } catch (const ConstraintViolated& e) {
        CHECK(std::string(e.what()).find("kappa/8") != std::string::npos);
    }
}

TEST_CASE("good rectangles") {
    const double field8 = 8.0 * pi;  // four quanta on the unit square
    CHECK(is_good_rect(unit_square(4), field8));
    CHECK_FALSE(is_good_rect(unit_square(3), field8));
    CHECK_FALSE(is_good_rect(Rect{{0, 0}, {4.0, 0.25}, 4}, field8));
    CHECK(is_good_rect(Rect{}, field8));
}

TEST_CASE("split of the unit square with four quanta") {
    const auto [lo, hi] = split_once(unit_square(4), 8.0 * pi);
    // Ties are cut along the second coordinate.
    CHECK(lo == Rect{{0.0, 0.0}, {1.0, 0.5}, 2});
    CHECK(hi == Rect{{0.0, 0.5}, {1.0, 0.5}, 2});
    const auto quarters = subdivide(unit_square(4), 8.0 * pi, 1);
    REQUIRE(quarters.size() == 4);
    for (const Rect& r : quarters) {
        CHECK(r.area() == doctest::Approx(0.25));
        CHECK(r.quanta == 1);
    }
}

TEST_CASE("three quanta give one empty child") {
    const auto rs = subdivide(unit_square(3), 6.0 * pi, 1);
    REQUIRE(rs.size() == 4);
    const double areas[] = {1.0 / 3.0, 0.0, 1.0 / 3.0, 1.0 / 3.0};
    const std::int64_t quanta[] = {1, 0, 1, 1};
    for (int i = 0; i < 4; ++i) {
        CHECK(rs[i].area() == doctest::Approx(areas[i]).epsilon(1e-14));
        CHECK(rs[i].quanta == quanta[i]);
    }
}

TEST_CASE("splitting a bad rectangle throws") {
    CHECK_THROWS_AS(split_once(Rect{{0, 0}, {4.0, 1.0}, 1}, 2.0 * pi / 4.0), NotGood);
}

TEST_CASE("subdivision properties on random good rectangles") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> aspect(1.0, 3.0);
    std::uniform_int_distribution<std::int64_t> qdist(0, 5000);
    std::uniform_int_distribution<int> kdist(0, 4);
    for (int trial = 0; trial < 1000; ++trial) {
        const double a = aspect(rng);
        const std::int64_t q = qdist(rng);
        const int k = kdist(rng);
        const double field = 1.3;
        // Sides chosen so that the flux condition holds exactly.
        const double area = 2.0 * pi * static_cast<double>(q) / field;
        const double w = q == 0 ? 0.0 : std::sqrt(area * a);
        const double h = q == 0 ? 0.0 : area / w;
        const Rect r{{0.5, -2.0}, {w, h}, q};
        REQUIRE(is_good_rect(r, field));

        const auto levels = subdivide_levels(r, field, k);
        const auto& leaves = levels.back();
        REQUIRE(leaves.size() == (std::size_t{1} << (2 * k)));
        std::int64_t qsum = 0;
        double asum = 0.0;
        for (const Rect& c : leaves) {
            CHECK(is_good_rect(c, field));
            CHECK(std::abs(c.area() - r.area() / std::pow(4.0, k)) <= 4.0 * pi / field * (1 + 1e-12));
            qsum += c.quanta;
            asum += c.area();
        }
        CHECK(qsum == q);
        CHECK(asum == doctest::Approx(r.area()).epsilon(1e-12));
        // Nesting: children of level m element h tile it.
        for (std::size_t m = 0; m + 1 < levels.size(); ++m) {
            for (std::size_t h = 0; h < levels[m].size(); ++h) {
                const Rect& parent = levels[m][h];
                double child_area = 0.0;
                for (std::size_t c = 4 * h; c < 4 * h + 4; ++c) {
                    const Rect& ch = levels[m + 1][c];
                    child_area += ch.area();
                    if (ch.area() > 0.0) {
                        CHECK(ch.x0() >= parent.x0() - 1e-12);
                        CHECK(ch.x1() <= parent.x1() + 1e-12);
                        CHECK(ch.y0() >= parent.y0() - 1e-12);
                        CHECK(ch.y1() <= parent.y1() + 1e-12);
                    }
                }
                CHECK(child_area == doctest::Approx(parent.area()).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("admissible length") {
    const double b = 2.0 * pi * static_cast<double>(quanta_for_field(0.0625, 32768.0)) / (32768.0 * 32768.0);
    CHECK(admissible_length(0.5, b, 4096.0) < 32768.0);
}
