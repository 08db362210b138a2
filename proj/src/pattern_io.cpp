#include <json.hpp>

#include <cmath>

#include "branching/branch.hpp"

namespace branching {

namespace {

using nlohmann::json;

constexpr int pattern_version = 1;

json rect_json(const Rect& r) {
    return json::array({r.origin.x, r.origin.y, r.sides.x, r.sides.y, r.quanta});
}

Rect rect_from(const json& j) {
    return Rect{{j.at(0).get<double>(), j.at(1).get<double>()},
                {j.at(2).get<double>(), j.at(3).get<double>()},
                j.at(4).get<std::int64_t>()};
}

double rect_distance(const Rect& a, const Rect& b) {
    return std::max({std::abs(a.x0() - b.x0()), std::abs(a.y0() - b.y0()), std::abs(a.x1() - b.x1()),
                     std::abs(a.y1() - b.y1())});
}

}  // namespace

std::string pattern_to_json(const SharpPattern& pat) {
    const Params& p = pat.params;
    const ConstructionPlan& plan = pat.plan;
    json j;
    j["format"] = "branching-pattern";
    j["version"] = pattern_version;
    j["params"] = {{"kappa", p.kappa}, {"b_ext", p.b_ext}, {"L", p.L}, {"T", p.T},
                   {"flux_quanta_total", p.flux_quanta_total}, {"mode", to_string(p.mode)}};
    j["plan"] = {{"regime", to_string(plan.regime)}, {"N", plan.N}, {"gamma", plan.gamma},
                 {"I", plan.I}, {"theta", plan.theta}, {"rho0", plan.rho0}, {"d0", plan.d0},
                 {"b_hat", plan.b_hat}, {"N_star", plan.N_star},
                 {"tube_slope", plan.options.tube_slope}, {"level_factor", plan.options.level_factor}};
    json segs = json::array();
    for (const TubeSegment& s : pat.segments)
        segs.push_back({{"bottom", rect_json(s.bottom)}, {"top", rect_json(s.top)},
                        {"z", {s.z_bottom, s.z_top}}, {"root", s.root}, {"level", s.level},
                        {"node", s.node}, {"straight", s.straight}, {"mirrored", s.mirrored}});
    j["segments"] = std::move(segs);
    return j.dump(1);
}

SharpPattern pattern_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("invalid pattern JSON: ") + e.what());
    }
    try {
        if (j.at("format") != "branching-pattern") throw IoError("not a pattern file");
        if (j.at("version").get<int>() != pattern_version) throw IoError("unsupported pattern version");
        const json& jp = j.at("params");
        const Params p = validate_params(jp.at("kappa").get<double>(), jp.at("flux_quanta_total").get<std::int64_t>(),
                                         jp.at("L").get<double>(), jp.at("T").get<double>(),
                                         mode_from_string(jp.at("mode").get<std::string>()));
        if (p.flux_quanta_total == 0) return make_empty_pattern(p);
        const json& jl = j.at("plan");
        ConstructionPlan plan;
        plan.regime = regime_from_string(jl.at("regime").get<std::string>());
        plan.N = jl.at("N").get<int>();
        plan.gamma = jl.at("gamma").get<double>();
        plan.I = jl.at("I").get<int>();
        plan.theta = jl.at("theta").get<double>();
        plan.N_star = jl.at("N_star").get<double>();
        plan.options.tube_slope = jl.at("tube_slope").get<double>();
        plan.options.level_factor = jl.at("level_factor").get<double>();
        SharpPattern pat = build_pattern(p, plan);
        pat.plan.regime = plan.regime;
        pat.plan.N_star = plan.N_star;

        // The stored segments must agree with the rebuilt ones.
        const json& segs = j.at("segments");
        if (segs.size() != pat.segments.size()) throw IoError("segment count does not match the plan");
        for (std::size_t i = 0; i < segs.size(); ++i) {
            const TubeSegment& s = pat.segments[i];
            const double scale = std::max(1.0, p.L);
            if (rect_distance(rect_from(segs[i].at("bottom")), s.bottom) > 1e-9 * scale ||
                rect_distance(rect_from(segs[i].at("top")), s.top) > 1e-9 * scale)
                throw IoError("segment " + std::to_string(i) + " does not match the plan");
        }
        return pat;
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed pattern JSON: ") + e.what());
    }
}

}  // namespace branching
