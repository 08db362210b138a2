#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "branching/branch.hpp"
#include "config.hpp"

namespace branching::cli {

struct CustomPlan {
    int N = 1;
    double gamma = 1.0;
    int I = 0;
};

struct SweepSettings {
    Mode mode = Mode::upper_bound;
    PlanOptions options;
    std::optional<CustomPlan> custom;
    std::optional<std::array<int, 3>> resolution;  // evaluate E_grid when set
    int threads = 1;
    bool timing = false;  // adds a wall_time column; breaks byte-identical output
};

struct SweepPoint {
    double kappa = 0.0;
    double b_target = 0.0;
    double T = 0.0;
    std::optional<double> L;  // unset: 2 construction lengths, giving N = 2
};

struct SweepRow {
    double kappa = 0.0, b_ext = 0.0, L = 0.0, T = 0.0;
    std::string regime;
    int N = 0;
    double gamma = 0.0;
    int I = 0;
    double F_total = 0.0, F_surface = 0.0, F_transport = 0.0, F_exterior = 0.0;
    std::optional<double> E_grid;
    double ratio_to_bound = 0.0;
    double wall_time = 0.0;
    std::string error;  // empty when the point was evaluated

    double F_per_area() const { return F_total / (L * L); }
};

SweepSettings sweep_settings(const Config& c);
// Cartesian product of the kappa, b_ext, T and L lists in [params], in that
// nesting order.
std::vector<SweepPoint> sweep_points(const Config& c);

double auto_length(double kappa, double b_target, double T);
Params point_params(const SweepPoint& pt, Mode mode);
SharpPattern build_point(const SweepPoint& pt, const SweepSettings& s);
SweepRow evaluate_point(const SweepPoint& pt, const SweepSettings& s);

// Rows in point order; per-point failures are recorded in `error`.
std::vector<SweepRow> run_sweep(std::span<const SweepPoint> points, const SweepSettings& s);

inline constexpr int csv_version = 1;
std::string rows_to_csv(std::span<const SweepRow> rows, bool timing);
std::vector<SweepRow> rows_from_csv(const std::string& text);

// Writes to a sibling temporary file and renames it over `path`.
void write_atomically(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

enum class Axis { T, b_ext };
enum class Quantity { F_total, F_per_area };
Axis axis_from_string(const std::string& s);
Quantity quantity_from_string(const std::string& s);

struct Fit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    int points = 0;
};

// Least-squares line through (log x, log y).
Fit fit_power_law(std::span<const double> x, std::span<const double> y);
// Throws TooFewPoints below four usable rows and MixedRegimes when the
// rows straddle the regime threshold.
Fit fit_scaling(std::span<const SweepRow> rows, Axis axis, Quantity y);

// Section at height z as an SVG 1.1 document, one <rect class="tube"> per
// piece, filled by tree level.
std::string render_svg(const SharpPattern& pat, double z, double pixels = 800.0);

}  // namespace branching::cli
