#include "branching/energy.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "branching/error.hpp"

namespace branching {

namespace {

constexpr double sqrt2 = 1.41421356237309504880;

}  // namespace

double predicted_bound(const Params& p) {
    const double b = p.b_ext, k = p.kappa, T = p.T;
    const double extreme = b * std::pow(k, 3.0 / 7.0) * std::pow(T, 3.0 / 7.0);
    const double intermediate = std::pow(b, 2.0 / 3.0) * std::pow(k, 2.0 / 3.0) * std::cbrt(T);
    return std::min(extreme, intermediate) * p.L * p.L;
}

double bulk_split_value(const Params& p) {
    return (p.kappa * sqrt2 * p.b_ext - p.b_ext * p.b_ext) * p.L * p.L * p.T;
}

EnergyReport interior_energy(const SharpPattern& pat) {
    EnergyReport r;
    for (const TubeSegment& s : pat.segments) {
        r.lateral_area += s.lateral_area();
        r.transport += s.transport_energy(pat.params.kappa);
    }
    r.junction_area = pat.empty() ? 0.0 : junction_mismatch(pat);
    r.surface = pat.params.kappa * (r.lateral_area + r.junction_area);
    // The field on the tubes is exactly kappa / sqrt 2.
    r.coupling = 0.0;
    r.total = r.surface + r.transport + r.coupling;
    return r;
}

double exterior_energy(std::span<const Rect> trace, const Params& p, double field) {
    double flux = 0.0;
    for (const Rect& r : trace) flux += r.area() * field;
    const double expected = p.b_ext * p.L * p.L;
    if (std::abs(flux - expected) > 1e-9 * std::max(expected, 1.0))
        throw FluxMismatch("trace carries " + std::to_string(flux) + ", expected " + std::to_string(expected));
    if (trace.empty()) return 0.0;
    const std::vector<double> amp(trace.size(), field);
    return hminus12_sq_rects(trace, amp, p.L);
}

EnergyReport total_sharp_energy(const SharpPattern& pat) {
    const Params& p = pat.params;
    EnergyReport r = interior_energy(pat);
    if (!pat.empty()) {
        const auto bottom = cross_section(pat, 0.0);
        const auto top = cross_section(pat, p.T);
        r.exterior_bottom = exterior_energy(bottom, p, pat.field_inside());
        r.exterior_top = exterior_energy(top, p, pat.field_inside());
        const double scale = std::max(r.exterior_bottom, r.exterior_top);
        if (std::abs(r.exterior_bottom - r.exterior_top) > 1e-8 * scale)
            throw std::logic_error("exterior energies of the two faces differ");
    }
    r.total = r.surface + r.transport + r.coupling + r.exterior_bottom + r.exterior_top;
    r.predicted_bound = predicted_bound(p);
    r.ratio = r.predicted_bound > 0.0 ? r.total / r.predicted_bound : 0.0;
    return r;
}

EnergyReport gl_energy_grid(const SharpPattern& pat, std::array<int, 3> dims) {
    const Params& p = pat.params;
    const double k = p.kappa;
    const std::array<double, 3> h{p.L / dims[0], p.L / dims[1], p.T / dims[2]};
    const double hmax = std::max({h[0], h[1], h[2]});
    if (hmax > (1.0 + 1e-12) / (4.0 * k))
        throw ResolutionTooCoarse("grid spacing " + std::to_string(hmax) + " exceeds 1/(4 kappa)");

    EnergyReport r = total_sharp_energy(pat);
    GlTerms g;
    g.dims = dims;
    g.exterior = r.transport + r.exterior_bottom + r.exterior_top;
    if (!pat.empty()) {
        const Voxels v = voxelize(pat, dims);
        const std::vector<double> d = distance_to_set(v);
        const double vol = v.cell_volume();
        const double half = 0.5 * hmax;
        // Distance from a cell centre outside omega to the boundary of omega.
        auto dist = [&](std::size_t i) { return v.inside[i] ? 0.0 : std::max(0.0, d[i] - half); };
        auto at = [&](int i1, int i2, int i3) {
            i1 = (i1 + dims[0]) % dims[0];
            i2 = (i2 + dims[1]) % dims[1];
            i3 = std::clamp(i3, 0, dims[2] - 1);
            return d[v.index(i1, i2, i3)];
        };
        double planar = 0.0, vertical = 0.0, defect = 0.0;
        for (int i3 = 0; i3 < dims[2]; ++i3)
            for (int i2 = 0; i2 < dims[1]; ++i2)
                for (int i1 = 0; i1 < dims[0]; ++i1) {
                    const std::size_t i = v.index(i1, i2, i3);
                    if (v.inside[i]) continue;
                    const double root_rho = std::min(1.0, k * dist(i));
                    defect += (1.0 - root_rho) * (1.0 - root_rho);
                    if (root_rho >= 1.0) continue;
                    // |grad rho^{1/2}| = kappa in the shell, directed along grad dist.
                    const double g1 = (at(i1 + 1, i2, i3) - at(i1 - 1, i2, i3)) / (2.0 * h[0]);
                    const double g2 = (at(i1, i2 + 1, i3) - at(i1, i2 - 1, i3)) / (2.0 * h[1]);
                    const int up = std::min(i3 + 1, dims[2] - 1), down = std::max(i3 - 1, 0);
                    const double g3 = up > down ? (at(i1, i2, up) - at(i1, i2, down)) / ((up - down) * h[2]) : 0.0;
                    const double n2 = g1 * g1 + g2 * g2 + g3 * g3;
                    const double planar_share = n2 > 0.0 ? (g1 * g1 + g2 * g2) / n2 : 1.0;
                    planar += planar_share;
                    vertical += 1.0 - planar_share;
                }
        planar *= k * k * vol;
        vertical *= k * k * vol;
        defect *= vol;
        // In omega rho = 0 and B3 = kappa/sqrt 2; outside omega B = 0.
        g.kinetic_planar = (1.0 - k * sqrt2) * planar;
        g.kinetic_d3 = k * sqrt2 * planar;
        g.kinetic_vertical = vertical;
        g.coupling_sq = 0.5 * k * k * defect + r.coupling;
        g.shell = planar + vertical + k * k * defect;
        g.shell_constant = r.surface > 0.0 ? g.shell / r.surface : 0.0;
    }
    g.total = g.kinetic_planar + g.kinetic_d3 + g.kinetic_vertical + g.coupling_sq + g.exterior;
    r.gl = g;
    return r;
}

std::string report_to_json(const EnergyReport& r) {
    nlohmann::ordered_json j;
    j["surface"] = r.surface;
    j["lateral_area"] = r.lateral_area;
    j["junction_area"] = r.junction_area;
    j["transport"] = r.transport;
    j["coupling"] = r.coupling;
    j["exterior_bottom"] = r.exterior_bottom;
    j["exterior_top"] = r.exterior_top;
    j["total"] = r.total;
    j["predicted_bound"] = r.predicted_bound;
    j["ratio"] = r.ratio;
    if (r.gl) {
        const GlTerms& g = *r.gl;
        j["gl_terms"] = {{"kinetic_planar", g.kinetic_planar},
                         {"kinetic_d3", g.kinetic_d3},
                         {"kinetic_vertical", g.kinetic_vertical},
                         {"coupling_sq", g.coupling_sq},
                         {"exterior", g.exterior},
                         {"total", g.total},
                         {"shell", g.shell},
                         {"shell_constant", g.shell_constant},
                         {"dims", g.dims}};
    }
    return j.dump(2);
}

}  // namespace branching
