#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>

#include "branching/audit.hpp"
#include "branching/energy.hpp"
#include "branching/error.hpp"
#include "config.hpp"
#include "sweep.hpp"

using namespace branching;
using namespace branching::cli;
namespace fs = std::filesystem;

namespace {

enum Exit { ok = 0, config_error = 1, infeasible_all = 2, internal = 3 };

struct Flags {
    std::string config;
    std::string out = ".";
    std::string pattern;
    std::string csv;
    std::string resolution;
    std::string axis;
    std::string quantity;
    int threads = 0;
    std::uint64_t seed = 1;
};

Config load_config(const Flags& f) {
    return f.config.empty() ? Config{} : Config::load(f.config);
}

std::string out_path(const Flags& f, const std::string& name) { return (fs::path(f.out) / name).string(); }

// The single instance named by --pattern or by a one-point [params] section.
SharpPattern instance(const Flags& f, const Config& c) {
    if (!f.pattern.empty()) return pattern_from_json(read_file(f.pattern));
    const auto pts = sweep_points(c);
    if (pts.size() != 1) throw ConfigError("this command needs exactly one parameter point, got " + std::to_string(pts.size()));
    return build_point(pts.front(), sweep_settings(c));
}

std::array<int, 3> resolution(const Flags& f, const Config& c, std::array<int, 3> fallback) {
    if (!f.resolution.empty()) return parse_resolution(f.resolution);
    if (c.has("sweep", "resolution")) return parse_resolution(c.text("sweep", "resolution", ""));
    return fallback;
}

int cmd_build(const Flags& f) {
    const SharpPattern pat = instance(f, load_config(f));
    write_atomically(out_path(f, "pattern.json"), pattern_to_json(pat));
    std::printf("N = %d, gamma = %.6g, I = %d, %zu segments\n", pat.plan.N, pat.plan.gamma, pat.plan.I,
                pat.segments.size());
    return ok;
}

int cmd_energy(const Flags& f, bool grid) {
    const Config c = load_config(f);
    const SharpPattern pat = instance(f, c);
    const EnergyReport r = grid ? gl_energy_grid(pat, resolution(f, c, {64, 64, 64})) : total_sharp_energy(pat);
    const std::string json = report_to_json(r);
    write_atomically(out_path(f, grid ? "gl_energy.json" : "energy.json"), json + "\n");
    std::cout << json << "\n";
    return ok;
}

int cmd_sweep(const Flags& f) {
    const Config c = load_config(f);
    SweepSettings s = sweep_settings(c);
    if (f.threads > 0) s.threads = f.threads;
    if (!f.resolution.empty()) s.resolution = parse_resolution(f.resolution);
    const auto pts = sweep_points(c);
    const auto rows = run_sweep(pts, s);
    write_atomically(out_path(f, "sweep.csv"), rows_to_csv(rows, s.timing));
    std::size_t failed = 0;
    for (const SweepRow& r : rows) {
        if (r.error.empty()) {
            std::printf("T = %-10.6g b = %-10.6g N = %-3d I = %-2d F = %.6g  F/bound = %.4g\n", r.T, r.b_ext, r.N,
                        r.I, r.F_total, r.ratio_to_bound);
        } else {
            ++failed;
            std::printf("T = %-10.6g b = %-10.6g %s\n", r.T, r.b_ext, r.error.c_str());
        }
    }
    return failed == rows.size() ? infeasible_all : ok;
}

int cmd_fit(const Flags& f) {
    const Config c = load_config(f);
    const std::string csv = f.csv.empty() ? out_path(f, "sweep.csv") : f.csv;
    const auto rows = rows_from_csv(read_file(csv));
    const Axis axis = axis_from_string(f.axis.empty() ? c.text("fit", "axis", "T") : f.axis);
    const Quantity y = quantity_from_string(f.quantity.empty() ? c.text("fit", "y", "F_total") : f.quantity);
    const Fit fit = fit_scaling(rows, axis, y);
    std::printf("slope %.6f  stderr %.6f  points %d\n", fit.slope, fit.stderr_slope, fit.points);
    return ok;
}

nlohmann::ordered_json random_identities(std::uint64_t seed, int count) {
    std::mt19937_64 rng(seed);
    const double L = 2.0 * pi;
    double worst_refinement = 0.0;
    int violations = 0;
    for (int i = 0; i < count; ++i) {
        const auto u = random_smooth_field(rng(), L, 3, 1.0);
        const auto a1 = random_smooth_field(rng(), L, 3, 1.0);
        const auto a2 = random_smooth_field(rng(), L, 3, 1.0);
        const double coarse = bogomolnyi_residual(u.sample(32), a1.sample_real(32), a2.sample_real(32));
        const double fine = bogomolnyi_residual(u.sample(64), a1.sample_real(64), a2.sample_real(64));
        worst_refinement = std::max(worst_refinement, fine / coarse);
        const ComplexGrid big = random_smooth_field(rng(), L, 4, 3.0).sample(32);
        const RealGrid b1 = a1.sample_real(32), b2 = a2.sample_real(32);
        if (lattice_gl_energy(truncate_density(big), b1, b2, 0.5, 0.1) > lattice_gl_energy(big, b1, b2, 0.5, 0.1))
            ++violations;
    }
    return {{"seed", seed},
            {"fields", count},
            {"bogomolnyi_worst_refinement_ratio", worst_refinement},
            {"truncation_violations", violations}};
}

int cmd_audit(const Flags& f) {
    const Config c = load_config(f);
    const SharpPattern pat = instance(f, c);
    const auto [ell0, r0] = paper_scales(pat.params.kappa, pat.params.T);
    const double ell = c.text("audit", "ell", "auto") == "auto" ? ell0 : c.number("audit", "ell", ell0);
    const double r = c.text("audit", "r", "auto") == "auto" ? r0 : c.number("audit", "r", r0);
    AuditOptions opt;
    opt.grid = c.integer("audit", "grid", 0);
    opt.identity_tol = c.number("audit", "identity_tol", opt.identity_tol);
    std::vector<double> fractions = c.numbers("audit", "z_fraction");
    if (fractions.empty()) fractions = {0.1, 0.25, 0.5};

    nlohmann::ordered_json out;
    auto& sections = out["sections"] = nlohmann::ordered_json::array();
    for (double t : fractions) {
        const AuditReport rep = audit_lower_bound_chain(pat, t * pat.params.T, ell, r, opt);
        std::cout << rep.to_table() << "\n";
        sections.push_back(nlohmann::ordered_json::parse(rep.to_json()));
    }
    const int count = c.integer("audit", "random_fields", 20);
    if (count > 0) {
        out["identities"] = random_identities(f.seed, count);
        std::cout << "random identities: " << out["identities"].dump() << "\n";
    }
    write_atomically(out_path(f, "audit.json"), out.dump(2) + "\n");
    return ok;
}

int cmd_render(const Flags& f) {
    const Config c = load_config(f);
    const SharpPattern pat = instance(f, c);
    const double z = c.number("render", "z_fraction", 0.0) * pat.params.T;
    write_atomically(out_path(f, "section.svg"), render_svg(pat, z));
    return ok;
}

int cmd_export(const Flags& f) {
    const Config c = load_config(f);
    const SharpPattern pat = instance(f, c);
    const Params& p = pat.params;
    const auto dims = resolution(f, c, {64, 64, 64});
    GridSpec spec;
    spec.dims = dims;
    const double depth = c.number("export", "depth", 0.25 * p.T);
    spec.lo = {0.0, 0.0, -depth};
    spec.hi = {p.L, p.L, p.T + depth};
    const double width = c.number("export", "width", 2.0 * std::max(p.L / dims[0], spec.spacing(2)));
    const GridField B = smoothed_field(pat, spec, width);
    const GridField A = construct_vector_potential(B, p.b_ext);
    B.save(out_path(f, "field.bin"));
    A.save(out_path(f, "potential.bin"));
    std::printf("curl residual %.3e, relative divergence %.3e\n", curl_residual(A, B), relative_divergence(B));
    return ok;
}

int classify(const Error& e) {
    static const char* const input[] = {"ConfigError", "MixedRegimes", "TooFewPoints", "ResolutionTooCoarse",
                                        "ScalesInadmissible", "BadScales", "DimMismatch", "IoError"};
    static const char* const infeasible[] = {"Infeasible", "ConstraintViolated", "TooShort", "AreaMismatch"};
    for (const char* k : input)
        if (e.kind() == k) return config_error;
    for (const char* k : infeasible)
        if (e.kind() == k) return infeasible_all;
    return internal;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Branched flux-tube constructions for type-I superconductors"};
    app.require_subcommand(1);
    Flags f;
    auto common = [&f](CLI::App* sub, bool instance_input) {
        sub->add_option("--config", f.config, "configuration file");
        sub->add_option("--out", f.out, "output directory");
        sub->add_option("--threads", f.threads, "worker threads");
        sub->add_option("--seed", f.seed, "seed for randomized audits");
        sub->add_option("--resolution", f.resolution, "grid size n1,n2,n3");
        if (instance_input) sub->add_option("--pattern", f.pattern, "pattern JSON written by build");
    };
    auto* build = app.add_subcommand("build", "construct a pattern and write pattern.json");
    auto* energy = app.add_subcommand("energy", "sharp-interface energy of one instance");
    auto* gl = app.add_subcommand("gl-energy", "grid GL energy of the induced pair");
    auto* sweep = app.add_subcommand("sweep", "evaluate every parameter point, write sweep.csv");
    auto* fit = app.add_subcommand("fit", "fit a scaling exponent to sweep.csv");
    auto* audit = app.add_subcommand("audit", "lower-bound chain and identity audits");
    auto* render = app.add_subcommand("render", "draw a cross-section as SVG");
    auto* exp = app.add_subcommand("export-grid", "write the smoothed field and its vector potential");
    for (auto* s : {build, energy, gl, audit, render, exp}) common(s, true);
    common(sweep, false);
    common(fit, false);
    fit->add_option("--csv", f.csv, "sweep csv (default OUT/sweep.csv)");
    fit->add_option("--axis", f.axis, "T or b_ext");
    fit->add_option("--y", f.quantity, "F_total or F_per_area");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        if (*build) return cmd_build(f);
        if (*energy) return cmd_energy(f, false);
        if (*gl) return cmd_energy(f, true);
        if (*sweep) return cmd_sweep(f);
        if (*fit) return cmd_fit(f);
        if (*audit) return cmd_audit(f);
        if (*render) return cmd_render(f);
        if (*exp) return cmd_export(f);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return classify(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return internal;
    }
    return internal;
}
