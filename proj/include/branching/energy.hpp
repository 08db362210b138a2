#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>

#include "branching/branch.hpp"

namespace branching {

// Ginzburg-Landau terms of the construction-induced pair (u, A), with
// u = rho^{1/2} e^{i theta} and rho = min(1, kappa^2 dist^2(x, omega)).
struct GlTerms {
    double kinetic_planar = 0.0;    // (1 - kappa sqrt 2) |grad'_A u|^2
    double kinetic_d3 = 0.0;        // kappa sqrt 2 |D3_A u|^2
    double kinetic_vertical = 0.0;  // |d3 u - i A3 u|^2
    double coupling_sq = 0.0;       // (B3 - kappa/sqrt 2 (1 - rho))^2 in the slab
    double exterior = 0.0;          // |B'|^2 everywhere plus |B3 - b|^2 outside the slab
    double total = 0.0;
    // Shell energy: int |grad rho^{1/2}|^2 + kappa^2 (chi - (1 - rho))^2.
    double shell = 0.0;
    double shell_constant = 0.0;  // shell / surface
    std::array<int, 3> dims{};
};

struct EnergyReport {
    double surface = 0.0;   // kappa times the interface area
    double lateral_area = 0.0;
    double junction_area = 0.0;
    double transport = 0.0;  // int |B'|^2 in the slab
    double coupling = 0.0;   // int chi (B3 - kappa/sqrt 2)^2
    double exterior_bottom = 0.0;
    double exterior_top = 0.0;
    double total = 0.0;
    double predicted_bound = 0.0;
    double ratio = 0.0;  // total / predicted_bound
    std::optional<GlTerms> gl;
};

// Surface, transport and coupling terms inside the slab.
EnergyReport interior_energy(const SharpPattern& pat);

// Energy of the optimal extension of a trace made of rectangles carrying
// `field` into a half space. Throws FluxMismatch if the trace does not
// carry b_ext L^2.
double exterior_energy(std::span<const Rect> trace, const Params& p, double field);

EnergyReport total_sharp_energy(const SharpPattern& pat);

// min{b kappa^{3/7} T^{3/7}, b^{2/3} kappa^{2/3} T^{1/3}} L^2.
double predicted_bound(const Params& p);

// Constant (kappa sqrt 2 b - b^2) L^2 T separating the full GL energy from E.
double bulk_split_value(const Params& p);

// Grid evaluation of E for the pair induced by the pattern. The interior
// and exterior magnetic terms are the exact sharp values. Throws
// ResolutionTooCoarse if a spacing exceeds 1 / (4 kappa).
EnergyReport gl_energy_grid(const SharpPattern& pat, std::array<int, 3> dims);

std::string report_to_json(const EnergyReport& r);

}  // namespace branching
