#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "branching/core.hpp"
#include "branching/spectral.hpp"

namespace branching {

enum class Regime { intermediate, extreme, custom };

std::string to_string(Regime r);
Regime regime_from_string(const std::string& s);

struct PlanOptions {
    // Root count per side is the power of two at or above
    // N* = L (kappa b)^{1/6} / (alpha T^{2/3}) (intermediate regime) or
    // N* = L b^{1/2} / (alpha kappa^{1/14} T^{4/7}) (extreme regime).
    double alpha = 8.0;
    // A tube segment must be at least this many times as tall as the
    // largest side of its end rectangles.
    double tube_slope = 1.0;
    // Levels are limited by 2^I <= level_factor * min(kappa rho0, (T/2) / d0).
    double level_factor = 1.0;
};

struct ConstructionPlan {
    Regime regime = Regime::custom;
    int N = 1;            // roots per side, a power of two
    int log2N = 0;
    double gamma = 1.0;   // shrink factor of the root cells
    int I = 0;            // number of branching levels
    double theta = 1.0 / 3.0;
    double rho0 = 0.0;    // side of a root tube
    double d0 = 0.0;      // spacing of the root tubes
    double b_hat = 0.0;   // effective field on the shrunk cells, b / gamma^2
    double N_star = 0.0;  // unrounded root count per side
    PlanOptions options;

    // Heights of the level planes in the lower half, from T/2 down.
    std::vector<double> level_heights(double T) const;
};

// Regime detection and parameter choice for the explicit construction.
// Throws Infeasible naming the failed condition.
ConstructionPlan select_parameters(const Params& p, const PlanOptions& opt = {});

// Plan with explicitly chosen N, gamma and I, checked against the same
// invariants as an automatically selected one.
ConstructionPlan make_plan(const Params& p, int N, double gamma, int I, const PlanOptions& opt = {});

void validate_plan(const Params& p, const ConstructionPlan& plan);

// Flux tube between two horizontal rectangles of equal area. The cross
// section at relative height s has lower-left corner p + s (p_hat - p) and
// sides (a e^{lambda s}, b e^{-lambda s}); the map is volume preserving.
struct TubeSegment {
    Rect bottom;
    Rect top;
    double z_bottom = 0.0;
    double z_top = 0.0;
    int root = 0;
    int level = 0;  // tree level of the inner-rectangle end
    int node = 0;   // index of that rectangle within its level
    bool straight = false;
    bool mirrored = false;

    double height() const { return z_top - z_bottom; }
    double lambda() const;
    Vec2 drift() const { return {top.origin.x - bottom.origin.x, top.origin.y - bottom.origin.y}; }
    bool contains(double z) const { return z >= z_bottom && z <= z_top; }

    Rect rect_at(double z) const;
    // Horizontal field inside the tube at height z (vertical part is kappa/sqrt 2).
    Vec2 horizontal_field(double kappa, double x1, double x2, double z) const;

    double lateral_area() const;
    // integral over the tube of |B'|^2.
    double transport_energy(double kappa) const;
    // integral over the tube of |B'|.
    double transport_l1(double kappa) const;
    // The same, restricted to heights in [z0, z1].
    double transport_l1(double kappa, double z0, double z1) const;
    // integral over the section at height z of |B'|^2.
    double section_transport(double kappa, double z) const;
};

TubeSegment build_segment(const Rect& bottom, const Rect& top, double z_bottom, double z_top,
                          double kappa, double tube_slope = 1.0);

struct RootTree {
    Rect cell;     // R: cell of the root subdivision
    Rect shrunk;   // r: cell scaled by gamma about its centre
    // levels[i][h]: subdivision of `shrunk` after i rounds; inner[i][h] is
    // the concentric rectangle carrying the tube.
    std::vector<std::vector<Rect>> levels;
    std::vector<std::vector<Rect>> inner;
};

struct SharpPattern {
    Params params;
    ConstructionPlan plan;
    std::vector<RootTree> trees;
    std::vector<TubeSegment> segments;

    bool empty() const { return segments.empty(); }
    double field_inside() const;  // kappa / sqrt 2
};

SharpPattern build_pattern(const Params& p, const ConstructionPlan& plan);
SharpPattern make_empty_pattern(const Params& p);

struct SectionPiece {
    Rect rect;
    int segment = -1;  // -1 exactly on a level plane
};

// Pieces of the superconducting set at height z. On a level plane the
// rectangles of that level are returned.
std::vector<SectionPiece> section(const SharpPattern& pat, double z);
std::vector<Rect> cross_section(const SharpPattern& pat, double z);

// Total area of the symmetric differences between the sections just below
// and just above every level plane.
double junction_mismatch(const SharpPattern& pat);

// Rectangles of the trace on z = 0 (identical to the one on z = T).
std::vector<Rect> bottom_trace(const SharpPattern& pat);

// Cell-centred voxelisation of the slab.
struct Voxels {
    std::array<int, 3> dims{};
    std::array<double, 3> spacing{};
    std::vector<std::uint8_t> inside;  // index (i3 * n2 + i2) * n1 + i1

    std::size_t index(int i1, int i2, int i3) const {
        return (static_cast<std::size_t>(i3) * dims[1] + i2) * dims[0] + i1;
    }
    double cell_volume() const { return spacing[0] * spacing[1] * spacing[2]; }
};

Voxels voxelize(const SharpPattern& pat, std::array<int, 3> dims);

// Euclidean distance from each voxel centre to the nearest inside voxel
// centre, periodic in x1 and x2.
std::vector<double> distance_to_set(const Voxels& v);

// Volume of the points of the slab within distance delta of the pattern but
// outside it, on a grid with spacing about delta / cells_per_delta.
double neighborhood_excess(const SharpPattern& pat, double delta, int cells_per_delta = 4,
                           std::size_t max_voxels = 200'000'000);

// Field of the pattern including its optimal exterior extension, convolved
// with an isotropic Gaussian of standard deviation `width`, sampled on the
// nodes of `spec` (x1, x2 periodic on [0, L), any z range).
GridField smoothed_field(const SharpPattern& pat, const GridSpec& spec, double width);

std::string pattern_to_json(const SharpPattern& pat);
SharpPattern pattern_from_json(const std::string& text);

}  // namespace branching
