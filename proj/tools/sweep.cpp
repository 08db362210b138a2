#include "sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "branching/energy.hpp"
#include "branching/error.hpp"

namespace branching::cli {

namespace {

const char* const columns[] = {"kappa",     "b_ext",       "L",          "T",          "regime",
                               "N",         "gamma",       "I",          "F_total",    "F_surface",
                               "F_transport", "F_exterior", "E_grid",    "ratio_to_bound", "F_per_area"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cell += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(cell);
            cell.clear();
        } else {
            cell += ch;
        }
    }
    out.push_back(cell);
    return out;
}

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch == '\n' ? ' ' : ch;
    }
    return q + "\"";
}

}  // namespace

SweepSettings sweep_settings(const Config& c) {
    SweepSettings s;
    s.mode = mode_from_string(c.text("params", "mode", "upper"));
    s.options.alpha = c.number("plan", "alpha", s.options.alpha);
    s.options.tube_slope = c.number("plan", "tube_slope", s.options.tube_slope);
    s.options.level_factor = c.number("plan", "level_factor", s.options.level_factor);
    const bool any = c.has("plan", "N") || c.has("plan", "gamma") || c.has("plan", "I");
    if (any) {
        if (!(c.has("plan", "N") && c.has("plan", "I")))
            throw ConfigError("a custom plan needs both plan.N and plan.I");
        s.custom = CustomPlan{c.integer("plan", "N", 1), c.number("plan", "gamma", 1.0), c.integer("plan", "I", 0)};
    }
    if (c.has("sweep", "resolution")) s.resolution = parse_resolution(c.text("sweep", "resolution", ""));
    s.threads = c.integer("sweep", "threads", 1);
    if (s.threads < 1) throw ConfigError("sweep.threads must be at least 1");
    s.timing = c.flag("sweep", "timing", false);
    return s;
}

std::vector<SweepPoint> sweep_points(const Config& c) {
    const std::vector<double> kappas = c.numbers("params", "kappa");
    const std::vector<double> fields = c.numbers("params", "b_ext");
    const std::vector<double> heights = c.numbers("params", "T");
    if (kappas.empty() || fields.empty() || heights.empty())
        throw ConfigError("[params] needs kappa, b_ext and T");
    std::vector<std::optional<double>> lengths;
    const std::string l = c.text("params", "L", "auto");
    if (l == "auto") {
        lengths.push_back(std::nullopt);
    } else {
        for (double v : c.numbers("params", "L")) lengths.push_back(v);
    }
    std::vector<SweepPoint> pts;
    for (double k : kappas)
        for (double b : fields)
            for (double T : heights)
                for (const auto& L : lengths) pts.push_back({k, b, T, L});
    return pts;
}

double auto_length(double kappa, double b_target, double T) {
    return 2.0 * construction_length(kappa, b_target, T) * (1.0 - 1e-3);
}

Params point_params(const SweepPoint& pt, Mode mode) {
    const double L = pt.L ? *pt.L : auto_length(pt.kappa, pt.b_target, pt.T);
    return validate_params(pt.kappa, quanta_for_field(pt.b_target, L), L, pt.T, mode);
}

SharpPattern build_point(const SweepPoint& pt, const SweepSettings& s) {
    const Params p = point_params(pt, s.mode);
    const ConstructionPlan plan = s.custom ? make_plan(p, s.custom->N, s.custom->gamma, s.custom->I, s.options)
                                           : select_parameters(p, s.options);
    return build_pattern(p, plan);
}

SweepRow evaluate_point(const SweepPoint& pt, const SweepSettings& s) {
    const auto start = std::chrono::steady_clock::now();
    SweepRow row;
    row.kappa = pt.kappa;
    row.b_ext = pt.b_target;
    row.T = pt.T;
    try {
        const SharpPattern pat = build_point(pt, s);
        const Params& p = pat.params;
        row.b_ext = p.b_ext;
        row.L = p.L;
        row.regime = to_string(p.b_ext >= regime_threshold(p.kappa, p.T) ? Regime::intermediate : Regime::extreme);
        row.N = pat.plan.N;
        row.gamma = pat.plan.gamma;
        row.I = pat.plan.I;
        const EnergyReport e = s.resolution ? gl_energy_grid(pat, *s.resolution) : total_sharp_energy(pat);
        row.F_total = e.total;
        row.F_surface = e.surface;
        row.F_transport = e.transport;
        row.F_exterior = e.exterior_bottom + e.exterior_top;
        if (e.gl) row.E_grid = e.gl->total;
        row.ratio_to_bound = e.ratio;
    } catch (const Error& err) {
        row.error = err.what();
    }
    row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return row;
}

std::vector<SweepRow> run_sweep(std::span<const SweepPoint> points, const SweepSettings& s) {
    std::vector<SweepRow> rows(points.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++) rows[i] = evaluate_point(points[i], s);
    };
    const int n = std::min<int>(s.threads, static_cast<int>(points.size()));
    std::vector<std::jthread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(work);
    work();
    return rows;
}

std::string rows_to_csv(std::span<const SweepRow> rows, bool timing) {
    std::ostringstream os;
    os << "# sweep csv v" << csv_version << "\n";
    for (const char* c : columns) os << c << ",";
    if (timing) os << "wall_time,";
    os << "error\n";
    for (const SweepRow& r : rows) {
        const bool ok = r.error.empty();
        auto value = [&](double v) { return ok ? num(v) : std::string(); };
        os << num(r.kappa) << "," << num(r.b_ext) << "," << value(r.L) << "," << num(r.T) << "," << r.regime << ","
           << (ok ? std::to_string(r.N) : "") << "," << value(r.gamma) << "," << (ok ? std::to_string(r.I) : "")
           << "," << value(r.F_total) << "," << value(r.F_surface) << "," << value(r.F_transport) << ","
           << value(r.F_exterior) << "," << (r.E_grid ? num(*r.E_grid) : "") << "," << value(r.ratio_to_bound)
           << "," << (ok ? num(r.F_per_area()) : "") << ",";
        if (timing) os << num(r.wall_time) << ",";
        os << quote(r.error) << "\n";
    }
    return os.str();
}

std::vector<SweepRow> rows_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> header;
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (line != "# sweep csv v" + std::to_string(csv_version))
                throw ConfigError("unsupported sweep csv version: " + line);
            continue;
        }
        const auto cells = split_csv(line);
        if (header.empty()) {
            header = cells;
            continue;
        }
        if (cells.size() != header.size()) throw ConfigError("malformed sweep csv row: " + line);
        SweepRow r;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const std::string& h = header[i];
            const std::string& v = cells[i];
            if (h == "error") {
                r.error = v;
                continue;
            }
            if (h == "regime") {
                r.regime = v;
                continue;
            }
            if (v.empty()) continue;
            const double x = std::stod(v);
            if (h == "kappa") r.kappa = x;
            else if (h == "b_ext") r.b_ext = x;
            else if (h == "L") r.L = x;
            else if (h == "T") r.T = x;
            else if (h == "N") r.N = static_cast<int>(x);
            else if (h == "gamma") r.gamma = x;
            else if (h == "I") r.I = static_cast<int>(x);
            else if (h == "F_total") r.F_total = x;
            else if (h == "F_surface") r.F_surface = x;
            else if (h == "F_transport") r.F_transport = x;
            else if (h == "F_exterior") r.F_exterior = x;
            else if (h == "E_grid") r.E_grid = x;
            else if (h == "ratio_to_bound") r.ratio_to_bound = x;
            else if (h == "wall_time") r.wall_time = x;
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_atomically(const std::string& path, const std::string& content) {
    const std::filesystem::path target(path);
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    const std::filesystem::path tmp = target.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot write " + tmp.string());
        f << content;
        if (!f.flush()) throw IoError("short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) throw IoError("cannot rename onto " + path + ": " + ec.message());
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read " + path);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

Axis axis_from_string(const std::string& s) {
    if (s == "T") return Axis::T;
    if (s == "b_ext") return Axis::b_ext;
    throw ConfigError("fit axis must be T or b_ext, got " + s);
}

Quantity quantity_from_string(const std::string& s) {
    if (s == "F_total") return Quantity::F_total;
    if (s == "F_per_area") return Quantity::F_per_area;
    throw ConfigError("fit quantity must be F_total or F_per_area, got " + s);
}

Fit fit_power_law(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw TooFewPoints("need at least two points of equal count");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(x[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y[i]) - my);
    }
    Fit f;
    f.points = static_cast<int>(n);
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = std::log(y[i]) - f.intercept - f.slope * std::log(x[i]);
        ssr += e * e;
    }
    f.stderr_slope = n > 2 ? std::sqrt(ssr / (n - 2) / sxx) : 0.0;
    return f;
}

Fit fit_scaling(std::span<const SweepRow> rows, Axis axis, Quantity y) {
    std::vector<double> xs, ys;
    std::string regime;
    for (const SweepRow& r : rows) {
        if (!r.error.empty()) continue;
        if (regime.empty()) regime = r.regime;
        if (r.regime != regime) throw MixedRegimes("rows span " + regime + " and " + r.regime);
        xs.push_back(axis == Axis::T ? r.T : r.b_ext);
        ys.push_back(y == Quantity::F_total ? r.F_total : r.F_per_area());
    }
    if (xs.size() < 4) throw TooFewPoints("need at least 4 rows, have " + std::to_string(xs.size()));
    return fit_power_law(xs, ys);
}

std::string render_svg(const SharpPattern& pat, double z, double pixels) {
    static const char* const palette[] = {"#1b4f72", "#2874a6", "#3498db", "#85c1e9",
                                          "#d6eaf8", "#f5b041", "#dc7633", "#a04000"};
    const double L = pat.params.L, s = pixels / L;
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(pixels) << "\" height=\""
       << num(pixels) << "\" viewBox=\"0 0 " << num(pixels) << " " << num(pixels) << "\">\n"
       << "<title>section at z = " << num(z) << "</title>\n"
       << "<rect class=\"domain\" x=\"0\" y=\"0\" width=\"" << num(pixels) << "\" height=\"" << num(pixels)
       << "\" fill=\"white\" stroke=\"black\"/>\n";
    if (!pat.empty()) {
        for (const SectionPiece& piece : section(pat, z)) {
            const int level = piece.segment >= 0 ? pat.segments[piece.segment].level : 0;
            const Rect& r = piece.rect;
            // SVG y grows downwards.
            os << "<rect class=\"tube\" data-level=\"" << level << "\" x=\"" << num(r.x0() * s) << "\" y=\""
               << num((L - r.y1()) * s) << "\" width=\"" << num(r.sides.x * s) << "\" height=\""
               << num(r.sides.y * s) << "\" fill=\"" << palette[level % 8] << "\"/>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace branching::cli
