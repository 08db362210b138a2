#include "branching/core.hpp"

#include <algorithm>
#include <cmath>

namespace branching {

std::string to_string(Mode m) {
    return m == Mode::lower_bound ? "lower" : "upper";
}

Mode mode_from_string(const std::string& s) {
    if (s == "lower") return Mode::lower_bound;
    if (s == "upper") return Mode::upper_bound;
    throw ConfigError("mode must be 'lower' or 'upper', got '" + s + "'");
}

Params validate_params(double kappa, std::int64_t flux_quanta_total, double L, double T,
                       Mode mode) {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ConstraintViolated(what);
    };
    require(std::isfinite(kappa) && kappa > 0.0, "kappa > 0");
    require(std::isfinite(L) && L > 0.0, "L > 0");
    require(std::isfinite(T) && T > 0.0, "T > 0");
    require(flux_quanta_total >= 0, "flux quanta >= 0");
    require(kappa <= 0.5, "kappa <= 1/2");
    require(kappa * T >= 1.0, "kappa*T >= 1");

    Params p;
    p.kappa = kappa;
    p.L = L;
    p.T = T;
    p.mode = mode;
    p.flux_quanta_total = flux_quanta_total;
    p.b_ext = 2.0 * pi * static_cast<double>(flux_quanta_total) / (L * L);
    if (mode == Mode::lower_bound)
        require(p.b_ext <= kappa / 8.0, "b_ext <= kappa/8");
    else
        require(p.b_ext <= kappa / 4.0, "b_ext <= kappa/4");
    return p;
}

std::int64_t quanta_for_field(double b_target, double L) {
    return std::llround(b_target * L * L / (2.0 * pi));
}

double admissible_length(double kappa, double b_ext, double T) {
    const double a = 8.0 * std::pow(T, 2.0 / 3.0) / std::pow(kappa * b_ext, 1.0 / 6.0);
    const double c = 8.0 * std::pow(T, 4.0 / 7.0) * std::pow(kappa, 1.0 / 14.0) / std::sqrt(b_ext);
    return std::min(a, c);
}

double regime_threshold(double kappa, double T) {
    return std::pow(kappa, 5.0 / 7.0) / (std::sqrt(2.0) * std::pow(T, 2.0 / 7.0));
}

double construction_length(double kappa, double b_ext, double T) {
    if (b_ext >= regime_threshold(kappa, T))
        return 8.0 * std::pow(T, 2.0 / 3.0) / std::pow(kappa * b_ext, 1.0 / 6.0);
    return 8.0 * std::pow(T, 4.0 / 7.0) * std::pow(kappa, 1.0 / 14.0) / std::sqrt(b_ext);
}

bool length_admissible(const Params& p) {
    return p.b_ext > 0.0 && p.L >= admissible_length(p.kappa, p.b_ext, p.T);
}

Rect scaled_about_center(const Rect& r, double factor) {
    const Vec2 c = r.center();
    Rect out = r;
    out.sides = {r.sides.x * factor, r.sides.y * factor};
    out.origin = {c.x - 0.5 * out.sides.x, c.y - 0.5 * out.sides.y};
    return out;
}

Rect concentric_with_area(const Rect& r, double area) {
    if (r.area() == 0.0) return r;
    return scaled_about_center(r, std::sqrt(area / r.area()));
}

bool is_good_rect(const Rect& r, double field) {
    if (r.quanta < 0 || r.sides.x < 0.0 || r.sides.y < 0.0) return false;
    if (r.area() == 0.0) return r.quanta == 0;
    const double aspect = r.max_side() / r.min_side();
    if (aspect > max_aspect * (1.0 + 1e-12)) return false;
    const double q = static_cast<double>(r.quanta);
    return std::abs(r.area() * field / (2.0 * pi) - q) <= 1e-9 * std::max(1.0, q);
}

int split_axis(const Rect& r) {
    return r.sides.x > r.sides.y ? 0 : 1;
}

std::pair<Rect, Rect> split_once(const Rect& r, double field) {
    if (!is_good_rect(r, field)) throw NotGood("rectangle fails the aspect or flux condition");
    Rect empty;
    empty.origin = r.origin;
    if (r.quanta == 0) return {empty, empty};
    if (r.quanta == 1) return {r, empty};

    const std::int64_t q_low = r.quanta / 2;
    const double frac = static_cast<double>(q_low) / static_cast<double>(r.quanta);
    Rect low = r;
    Rect high = r;
    low.quanta = q_low;
    high.quanta = r.quanta - q_low;
    if (split_axis(r) == 0) {
        low.sides.x = r.sides.x * frac;
        high.origin.x = r.origin.x + low.sides.x;
        high.sides.x = r.sides.x - low.sides.x;
    } else {
        low.sides.y = r.sides.y * frac;
        high.origin.y = r.origin.y + low.sides.y;
        high.sides.y = r.sides.y - low.sides.y;
    }
    return {low, high};
}

std::vector<std::vector<Rect>> subdivide_levels(const Rect& r, double field, int k) {
    if (k < 0) throw ConstraintViolated("subdivision depth >= 0");
    std::vector<std::vector<Rect>> levels{{r}};
    levels.reserve(static_cast<std::size_t>(k) + 1);
    for (int m = 0; m < k; ++m) {
        const auto& prev = levels.back();
        std::vector<Rect> next;
        next.reserve(prev.size() * 4);
        for (const Rect& parent : prev) {
            const auto [lo, hi] = split_once(parent, field);
            const auto [a, b] = split_once(lo, field);
            const auto [c, d] = split_once(hi, field);
            next.insert(next.end(), {a, b, c, d});
        }
        levels.push_back(std::move(next));
    }
    return levels;
}

std::vector<Rect> subdivide(const Rect& r, double field, int k) {
    return std::move(subdivide_levels(r, field, k).back());
}

}  // namespace branching
