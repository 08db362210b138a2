#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "branching/error.hpp"

namespace branching {

inline constexpr double pi = 3.14159265358979323846;

// Which family of parameter constraints applies: the lower-bound analysis
// needs b <= kappa/8, the explicit construction only b <= kappa/4.
enum class Mode { lower_bound, upper_bound };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct Params {
    double kappa = 0.0;
    double b_ext = 0.0;             // 2*pi*flux_quanta_total / L^2
    double L = 0.0;                 // lateral period
    double T = 0.0;                 // slab thickness
    std::int64_t flux_quanta_total = 0;
    Mode mode = Mode::upper_bound;
};

// Builds a parameter set with b_ext snapped to the flux lattice. Throws
// ConstraintViolated naming the first inequality that fails.
Params validate_params(double kappa, std::int64_t flux_quanta_total, double L, double T,
                       Mode mode);

// Nearest flux-quantum count for a target applied field.
std::int64_t quanta_for_field(double b_target, double L);

// Lower bound on L needed by the explicit construction.
double admissible_length(double kappa, double b_ext, double T);
// Smallest L with N* >= 1 for the regime that b_ext falls in; at least
// admissible_length, larger in the extreme regime.
double construction_length(double kappa, double b_ext, double T);
// b_ext at or above which the intermediate-regime parameters are used.
double regime_threshold(double kappa, double T);
bool length_admissible(const Params& p);

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Vec2&, const Vec2&) = default;
};

// Axis-aligned rectangle [origin, origin + sides] carrying an integer
// number of flux quanta.
struct Rect {
    Vec2 origin;
    Vec2 sides;
    std::int64_t quanta = 0;

    double x0() const { return origin.x; }
    double y0() const { return origin.y; }
    double x1() const { return origin.x + sides.x; }
    double y1() const { return origin.y + sides.y; }
    double area() const { return sides.x * sides.y; }
    double perimeter() const { return 2.0 * (sides.x + sides.y); }
    Vec2 center() const { return {origin.x + 0.5 * sides.x, origin.y + 0.5 * sides.y}; }
    double max_side() const { return sides.x > sides.y ? sides.x : sides.y; }
    double min_side() const { return sides.x < sides.y ? sides.x : sides.y; }
    bool empty() const { return quanta == 0 && area() == 0.0; }

    friend bool operator==(const Rect&, const Rect&) = default;
};

// Rectangle with the same centre scaled by `factor` in both directions.
Rect scaled_about_center(const Rect& r, double factor);

// Rectangle with the same centre and aspect ratio and the given area.
Rect concentric_with_area(const Rect& r, double area);

inline constexpr double max_aspect = 3.0;

bool is_good_rect(const Rect& r, double field);

// Axis along which split_once cuts: 0 = first coordinate, 1 = second.
int split_axis(const Rect& r);

// One balanced cut of a good rectangle along its longer side. The first
// child is the lower/left part and carries floor(q/2) quanta.
std::pair<Rect, Rect> split_once(const Rect& r, double field);

// 2k rounds of split_once, breadth first. Children of element h of level
// m sit at indices 4h..4h+3 of level m+1.
std::vector<Rect> subdivide(const Rect& r, double field, int k);

// All levels 0..k of the same subdivision; levels[m] has 4^m entries.
std::vector<std::vector<Rect>> subdivide_levels(const Rect& r, double field, int k);

}  // namespace branching
