#include "branching/branch.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "branching/quadrature.hpp"

namespace branching {

namespace {

constexpr double sqrt2 = 1.41421356237309504880;

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int log2_exact(int n) {
    int k = 0;
    while ((1 << k) < n) ++k;
    return k;
}

void fill_geometry(const Params& p, ConstructionPlan& plan) {
    plan.log2N = log2_exact(plan.N);
    plan.rho0 = p.L / plan.N * std::sqrt(p.b_ext * sqrt2 / p.kappa);
    plan.d0 = plan.gamma * p.L / plan.N;
    plan.b_hat = p.b_ext / (plan.gamma * plan.gamma);
}

void check_scales(const Params& p, const ConstructionPlan& plan) {
    const double gmin = std::sqrt(p.b_ext * sqrt2 / p.kappa);
    if (plan.gamma < gmin * (1.0 - 1e-12)) throw Infeasible("gamma >= (sqrt(2) b / kappa)^(1/2)");
    if (plan.gamma > 1.0 + 1e-12) throw Infeasible("gamma <= 1");
    const double n = plan.N;
    if (n * n > p.b_ext * p.L * p.L / (8.0 * pi) * (1.0 + 1e-12)) throw Infeasible("N^2 <= b L^2 / (8 pi)");
    if (std::sqrt(p.b_ext * p.kappa) * p.L / n < 1.0 - 1e-12) throw Infeasible("(b kappa)^(1/2) L / N >= 1");
}

double level_limit(const Params& p, const ConstructionPlan& plan) {
    return plan.options.level_factor * std::min(p.kappa * plan.rho0, 0.5 * p.T / plan.d0);
}

std::vector<RootTree> build_trees(const Params& p, const ConstructionPlan& plan) {
    const Rect domain{{0.0, 0.0}, {p.L, p.L}, p.flux_quanta_total};
    const auto cells = subdivide(domain, p.b_ext, plan.log2N);
    const double inner_per_quantum = 2.0 * pi * sqrt2 / p.kappa;
    std::vector<RootTree> trees;
    trees.reserve(cells.size());
    for (const Rect& cell : cells) {
        RootTree t;
        t.cell = cell;
        t.shrunk = scaled_about_center(cell, plan.gamma);
        t.levels = subdivide_levels(t.shrunk, plan.b_hat, plan.I);
        t.inner.resize(t.levels.size());
        for (std::size_t i = 0; i < t.levels.size(); ++i) {
            t.inner[i].reserve(t.levels[i].size());
            for (const Rect& r : t.levels[i]) {
                Rect in = concentric_with_area(r, inner_per_quantum * static_cast<double>(r.quanta));
                in.quanta = r.quanta;
                t.inner[i].push_back(in);
            }
        }
        trees.push_back(std::move(t));
    }
    return trees;
}

std::int64_t min_root_quanta(const std::vector<RootTree>& trees) {
    std::int64_t q = std::numeric_limits<std::int64_t>::max();
    for (const auto& t : trees) q = std::min(q, t.cell.quanta);
    return q;
}

// Largest side among the inner rectangles of each level.
std::vector<double> inner_max_side(const std::vector<RootTree>& trees, int levels) {
    std::vector<double> out(static_cast<std::size_t>(levels) + 1, 0.0);
    for (const auto& t : trees)
        for (int i = 0; i <= levels; ++i)
            for (const Rect& r : t.inner[i]) out[i] = std::max(out[i], r.max_side());
    return out;
}

bool levels_fit(const Params& p, const ConstructionPlan& plan, const std::vector<RootTree>& trees) {
    if (plan.I == 0) return true;
    const double quarter = static_cast<double>(min_root_quanta(trees)) / 4.0;
    if (std::pow(4.0, plan.I) > quarter) return false;
    const auto ys = plan.level_heights(p.T);
    const auto sides = inner_max_side(trees, plan.I);
    for (int i = 0; i < plan.I; ++i) {
        const double t = ys[i] - ys[i + 1];
        if (t < plan.options.tube_slope * std::max(sides[i], sides[i + 1])) return false;
    }
    return true;
}

}  // namespace

std::string to_string(Regime r) {
    switch (r) {
        case Regime::intermediate: return "intermediate";
        case Regime::extreme: return "extreme";
        default: return "custom";
    }
}

Regime regime_from_string(const std::string& s) {
    if (s == "intermediate") return Regime::intermediate;
    if (s == "extreme") return Regime::extreme;
    if (s == "custom") return Regime::custom;
    throw ConfigError("unknown regime '" + s + "'");
}

std::vector<double> ConstructionPlan::level_heights(double T) const {
    std::vector<double> ys(static_cast<std::size_t>(I) + 1);
    for (int i = 0; i <= I; ++i) ys[i] = 0.5 * T * std::pow(theta, i);
    return ys;
}

ConstructionPlan select_parameters(const Params& p, const PlanOptions& opt) {
    if (p.flux_quanta_total <= 0) throw Infeasible("b_ext > 0");
    if (!length_admissible(p))
        throw Infeasible("L >= " + std::to_string(admissible_length(p.kappa, p.b_ext, p.T)));
    const double k = p.kappa, b = p.b_ext, T = p.T, L = p.L;
    ConstructionPlan plan;
    plan.options = opt;
    const double threshold = regime_threshold(k, T);
    if (b >= threshold) {
        plan.regime = Regime::intermediate;
        plan.gamma = 1.0;
        plan.N_star = L * std::pow(k * b, 1.0 / 6.0) / (opt.alpha * std::pow(T, 2.0 / 3.0));
    } else {
        plan.regime = Regime::extreme;
        plan.gamma = std::pow(2.0, 0.25) * std::pow(T, 1.0 / 7.0) * std::sqrt(b) * std::pow(k, -5.0 / 14.0);
        plan.N_star = L * std::sqrt(b) / (opt.alpha * std::pow(k, 1.0 / 14.0) * std::pow(T, 4.0 / 7.0));
    }
    if (plan.N_star < 1.0) throw Infeasible("N* >= 1");
    const int log2n = std::max(0, static_cast<int>(std::ceil(std::log2(plan.N_star) - 1e-12)));
    if (log2n > 24) throw Infeasible("N too large");
    plan.N = 1 << log2n;
    fill_geometry(p, plan);
    check_scales(p, plan);

    const double limit = level_limit(p, plan);
    plan.I = limit >= 1.0 ? static_cast<int>(std::floor(std::log2(limit) + 1e-12)) : 0;
    while (plan.I > 0) {
        const auto trees = build_trees(p, plan);
        if (levels_fit(p, plan, trees)) break;
        --plan.I;
    }
    return plan;
}

void validate_plan(const Params& p, const ConstructionPlan& plan) {
    if (p.flux_quanta_total <= 0) throw Infeasible("b_ext > 0");
    if (!is_power_of_two(plan.N)) throw Infeasible("N is a power of two");
    if (plan.I < 0) throw Infeasible("I >= 0");
    if (!(plan.theta > 0.0 && plan.theta < 1.0)) throw Infeasible("0 < theta < 1");
    ConstructionPlan check = plan;
    fill_geometry(p, check);
    check_scales(p, check);
    if (plan.I > 0) {
        if (std::pow(2.0, plan.I) > level_limit(p, check) * (1.0 + 1e-12))
            throw Infeasible("2^I <= C min(kappa rho0, T / (2 d0))");
        const auto trees = build_trees(p, check);
        if (std::pow(4.0, plan.I) > static_cast<double>(min_root_quanta(trees)) / 4.0)
            throw Infeasible("4^I <= kappa |r_j| / (8 sqrt(2) pi)");
    }
}

ConstructionPlan make_plan(const Params& p, int N, double gamma, int I, const PlanOptions& opt) {
    ConstructionPlan plan;
    plan.regime = Regime::custom;
    plan.N = N;
    plan.gamma = gamma;
    plan.I = I;
    plan.options = opt;
    if (!is_power_of_two(N)) throw Infeasible("N is a power of two");
    fill_geometry(p, plan);
    plan.N_star = static_cast<double>(N);
    validate_plan(p, plan);
    return plan;
}

double TubeSegment::lambda() const {
    return std::log(top.sides.x / bottom.sides.x);
}

Rect TubeSegment::rect_at(double z) const {
    const double s = std::clamp((z - z_bottom) / height(), 0.0, 1.0);
    const Vec2 d = drift();
    const double phi = std::exp(lambda() * s);
    Rect r = bottom;
    r.origin = {bottom.origin.x + s * d.x, bottom.origin.y + s * d.y};
    r.sides = {bottom.sides.x * phi, bottom.sides.y / phi};
    return r;
}

Vec2 TubeSegment::horizontal_field(double kappa, double x1, double x2, double z) const {
    const double t = height();
    const double rate = lambda() / t;
    const Rect r = rect_at(z);
    const Vec2 d = drift();
    const double c = kappa / sqrt2;
    return {c * (d.x / t + rate * (x1 - r.origin.x)), c * (d.y / t - rate * (x2 - r.origin.y))};
}

double TubeSegment::lateral_area() const {
    const double t = height();
    const double a = bottom.sides.x, b = bottom.sides.y;
    const double lam = lambda();
    const Vec2 d = drift();
    const double v1 = d.x / t, v2 = d.y / t;
    auto integrand = [&](double z) {
        const double phi = std::exp(lam * z / t);
        const double da = a * lam / t * phi;    // d/dz of a phi
        const double db = -b * lam / t / phi;   // d/dz of b / phi
        return (b / phi) * (std::sqrt(1.0 + v1 * v1) + std::sqrt(1.0 + (v1 + da) * (v1 + da))) +
               (a * phi) * (std::sqrt(1.0 + v2 * v2) + std::sqrt(1.0 + (v2 + db) * (v2 + db)));
    };
    return integrate(integrand, 0.0, t, 32);
}

double TubeSegment::transport_energy(double kappa) const {
    const double t = height();
    const double a = bottom.sides.x, b = bottom.sides.y;
    const double lam = lambda();
    const Vec2 d = drift();
    const double growth = std::expm1(lam);          // phi(t) - 1
    const double shrink = -std::expm1(-lam);        // 1 - 1/phi(t)
    const double up = lam / (2.0 * t) * std::expm1(2.0 * lam);
    const double down = -lam / (2.0 * t) * std::expm1(-2.0 * lam);
    const double sum = (d.x * d.x + d.y * d.y) * a * b / t + d.x / t * a * a * b * growth -
                       d.y / t * a * b * b * shrink + a * a * a * b / 3.0 * up + a * b * b * b / 3.0 * down;
    return 0.5 * kappa * kappa * sum;
}

double TubeSegment::transport_l1(double kappa) const { return transport_l1(kappa, z_bottom, z_top); }

double TubeSegment::transport_l1(double kappa, double z0, double z1) const {
    const double t = height();
    const double lo = std::max(z0, z_bottom) - z_bottom, hi = std::min(z1, z_top) - z_bottom;
    if (!(hi > lo)) return 0.0;
    const double a = bottom.sides.x, b = bottom.sides.y;
    const double rate = lambda() / t;
    const Vec2 d = drift();
    const double c = kappa / sqrt2;
    // Preimage coordinates (u, v, z); the map preserves volume.
    return integrate(
        [&](double z) {
            const double phi = std::exp(rate * z);
            return integrate(
                [&](double v) {
                    return integrate(
                        [&](double u) {
                            const double f1 = d.x / t + rate * u * phi;
                            const double f2 = d.y / t - rate * v / phi;
                            return c * std::hypot(f1, f2);
                        },
                        0.0, a, 16);
                },
                0.0, b, 16);
        },
        lo, hi, 16);
}

double TubeSegment::section_transport(double kappa, double z) const {
    const double t = height();
    const Rect r = rect_at(z);
    const double A = r.sides.x, Bs = r.sides.y;
    const Vec2 d = drift();
    const double a1 = d.x / t, a2 = d.y / t, beta = lambda() / t;
    const double sum = (a1 * a1 + a2 * a2) * A * Bs + a1 * beta * A * A * Bs - a2 * beta * A * Bs * Bs +
                       beta * beta * (A * A * A * Bs + A * Bs * Bs * Bs) / 3.0;
    return 0.5 * kappa * kappa * sum;
}

TubeSegment build_segment(const Rect& bottom, const Rect& top, double z_bottom, double z_top,
                          double kappa, double tube_slope) {
    (void)kappa;
    if (bottom.area() <= 0.0 || top.area() <= 0.0) throw AreaMismatch("tube ends must be nonempty");
    const double scale = std::max(bottom.area(), top.area());
    if (std::abs(bottom.area() - top.area()) > 1e-9 * scale)
        throw AreaMismatch("end areas differ by " + std::to_string(bottom.area() - top.area()));
    const double t = z_top - z_bottom;
    const bool same = bottom.origin == top.origin && bottom.sides == top.sides;
    if (t <= 0.0 || (!same && t < tube_slope * std::max(bottom.max_side(), top.max_side())))
        throw TooShort("height " + std::to_string(t) + " for sides up to " +
                       std::to_string(std::max(bottom.max_side(), top.max_side())));
    TubeSegment s;
    s.bottom = bottom;
    s.top = top;
    s.top.sides.y = bottom.area() / top.sides.x;
    s.top.quanta = bottom.quanta;
    s.z_bottom = z_bottom;
    s.z_top = z_top;
    s.straight = same;
    return s;
}

double SharpPattern::field_inside() const { return params.kappa / sqrt2; }

SharpPattern make_empty_pattern(const Params& p) {
    SharpPattern pat;
    pat.params = p;
    pat.plan.regime = Regime::custom;
    return pat;
}

namespace {

// Cuts `piece` along `axis` in the ratio q_first : (q_total - q_first).
std::pair<Rect, Rect> cut(const Rect& piece, int axis, std::int64_t q_first, std::int64_t q_total) {
    Rect a = piece, b = piece;
    const double f = q_total == 0 ? 0.0 : static_cast<double>(q_first) / static_cast<double>(q_total);
    if (axis == 0) {
        a.sides.x = piece.sides.x * f;
        b.origin.x = piece.origin.x + a.sides.x;
        b.sides.x = piece.sides.x - a.sides.x;
    } else {
        a.sides.y = piece.sides.y * f;
        b.origin.y = piece.origin.y + a.sides.y;
        b.sides.y = piece.sides.y - a.sides.y;
    }
    a.quanta = q_first;
    b.quanta = q_total - q_first;
    return {a, b};
}

// Partition of the inner rectangle of `cell` into four pieces following the
// two split rounds that produce the children of `cell`.
std::array<Rect, 4> feed_partition(const Rect& cell, const Rect& inner, double field) {
    const auto [lo, hi] = split_once(cell, field);
    const auto [p_lo, p_hi] = cut(inner, split_axis(cell), lo.quanta, cell.quanta);
    auto second = [&](const Rect& half, const Rect& piece) {
        if (half.quanta == 0) return std::pair<Rect, Rect>{piece, piece};
        const auto [c0, c1] = split_once(half, field);
        return cut(piece, split_axis(half), c0.quanta, half.quanta);
    };
    const auto [a, b] = second(lo, p_lo);
    const auto [c, d] = second(hi, p_hi);
    return {a, b, c, d};
}

TubeSegment mirrored(const TubeSegment& s, double T, double kappa, double slope) {
    TubeSegment m = build_segment(s.top, s.bottom, T - s.z_top, T - s.z_bottom, kappa, slope);
    m.root = s.root;
    m.level = s.level;
    m.node = s.node;
    m.straight = s.straight;
    m.mirrored = true;
    return m;
}

}  // namespace

SharpPattern build_pattern(const Params& p, const ConstructionPlan& plan) {
    if (p.flux_quanta_total == 0) return make_empty_pattern(p);
    validate_plan(p, plan);
    SharpPattern pat;
    pat.params = p;
    pat.plan = plan;
    fill_geometry(p, pat.plan);
    pat.trees = build_trees(p, pat.plan);
    const auto ys = pat.plan.level_heights(p.T);
    const double slope = plan.options.tube_slope;
    const int I = pat.plan.I;

    for (std::size_t j = 0; j < pat.trees.size(); ++j) {
        const RootTree& tree = pat.trees[j];
        for (int i = 0; i < I; ++i)
            for (std::size_t h = 0; h < tree.levels[i].size(); ++h) {
                const Rect& cell = tree.levels[i][h];
                if (cell.quanta == 0) continue;
                const auto pieces = feed_partition(cell, tree.inner[i][h], pat.plan.b_hat);
                for (int c = 0; c < 4; ++c) {
                    const std::size_t child = 4 * h + c;
                    const Rect& bottom = tree.inner[i + 1][child];
                    if (bottom.quanta == 0) continue;
                    TubeSegment s = build_segment(bottom, pieces[c], ys[i + 1], ys[i], p.kappa, slope);
                    s.root = static_cast<int>(j);
                    s.level = i + 1;
                    s.node = static_cast<int>(child);
                    s.straight = false;
                    pat.segments.push_back(s);
                }
            }
        for (std::size_t h = 0; h < tree.inner[I].size(); ++h) {
            const Rect& leaf = tree.inner[I][h];
            if (leaf.quanta == 0) continue;
            TubeSegment s = build_segment(leaf, leaf, 0.0, ys[I], p.kappa, slope);
            s.root = static_cast<int>(j);
            s.level = I;
            s.node = static_cast<int>(h);
            s.straight = true;
            pat.segments.push_back(s);
        }
    }
    const std::size_t lower = pat.segments.size();
    for (std::size_t i = 0; i < lower; ++i)
        pat.segments.push_back(mirrored(pat.segments[i], p.T, p.kappa, slope));
    return pat;
}

std::vector<SectionPiece> section(const SharpPattern& pat, double z) {
    std::vector<SectionPiece> out;
    if (pat.empty()) return out;
    const double T = pat.params.T;
    const auto ys = pat.plan.level_heights(T);
    const double tol = 1e-12 * T;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        if (std::abs(z - ys[i]) <= tol || std::abs(z - (T - ys[i])) <= tol) {
            for (const auto& tree : pat.trees)
                for (const Rect& r : tree.inner[i])
                    if (r.quanta > 0) out.push_back({r, -1});
            return out;
        }
    }
    for (std::size_t s = 0; s < pat.segments.size(); ++s)
        if (pat.segments[s].contains(z)) out.push_back({pat.segments[s].rect_at(z), static_cast<int>(s)});
    return out;
}

std::vector<Rect> cross_section(const SharpPattern& pat, double z) {
    std::vector<Rect> out;
    for (const auto& piece : section(pat, z)) out.push_back(piece.rect);
    return out;
}

std::vector<Rect> bottom_trace(const SharpPattern& pat) { return cross_section(pat, 0.0); }

namespace {

double overlap_area(const Rect& a, const Rect& b) {
    const double w = std::min(a.x1(), b.x1()) - std::max(a.x0(), b.x0());
    const double h = std::min(a.y1(), b.y1()) - std::max(a.y0(), b.y0());
    return w > 0.0 && h > 0.0 ? w * h : 0.0;
}

}  // namespace

double junction_mismatch(const SharpPattern& pat) {
    // Ends meeting on a plane are grouped by the inner rectangle they share.
    using Key = std::tuple<int, double, int>;
    std::map<Key, std::pair<std::vector<Rect>, std::vector<Rect>>> groups;
    const double T = pat.params.T;
    for (const TubeSegment& s : pat.segments) {
        // The end at the tree-level rectangle and the end at the feeding piece.
        const bool piece_on_top = !s.straight && !s.mirrored;
        const bool piece_on_bottom = !s.straight && s.mirrored;
        const int top_id = piece_on_top ? s.node / 4 : s.node;
        const int bottom_id = piece_on_bottom ? s.node / 4 : s.node;
        if (s.z_top < T) groups[{s.root, s.z_top, top_id}].first.push_back(s.top);
        if (s.z_bottom > 0.0) groups[{s.root, s.z_bottom, bottom_id}].second.push_back(s.bottom);
    }
    double total = 0.0;
    for (const auto& [key, sides] : groups) {
        double sum = 0.0;
        for (const Rect& r : sides.first) sum += r.area();
        for (const Rect& r : sides.second) sum += r.area();
        for (const Rect& a : sides.first)
            for (const Rect& b : sides.second) sum -= 2.0 * overlap_area(a, b);
        total += std::max(0.0, sum);
    }
    return total;
}

}  // namespace branching
