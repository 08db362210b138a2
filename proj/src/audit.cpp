#include "branching/audit.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "branching/energy.hpp"
#include "branching/error.hpp"
#include "fft.hpp"

namespace branching {

namespace {

using cplx = std::complex<double>;

// Area of {0 <= s <= x, 0 <= t <= y, s^2 + t^2 <= R^2} for x, y >= 0.
double quarter_area(double R, double x, double y) {
    x = std::min(x, R);
    y = std::min(y, R);
    const double knee = std::sqrt(std::max(0.0, R * R - y * y));
    const double m = std::min(x, knee);
    auto primitive = [R](double s) {
        const double c = std::clamp(s / R, -1.0, 1.0);
        return 0.5 * (s * std::sqrt(std::max(0.0, R * R - s * s)) + R * R * std::asin(c));
    };
    return y * m + primitive(x) - primitive(m);
}

double signed_corner(double R, double x, double y) {
    const double s = (x < 0.0 ? -1.0 : 1.0) * (y < 0.0 ? -1.0 : 1.0);
    return s * quarter_area(R, std::abs(x), std::abs(y));
}

struct GradientStats {
    double sup = 0.0;
    double l1 = 0.0;
};

GradientStats gradient_stats(const RealGrid& f) {
    const double h = f.h();
    GradientStats g;
    for (int i2 = 0; i2 < f.n; ++i2)
        for (int i1 = 0; i1 < f.n; ++i1) {
            const double g1 = (f(i1 + 1, i2) - f(i1 - 1, i2)) / (2.0 * h);
            const double g2 = (f(i1, i2 + 1) - f(i1, i2 - 1)) / (2.0 * h);
            const double m = std::hypot(g1, g2);
            g.sup = std::max(g.sup, m);
            g.l1 += m;
        }
    g.l1 *= h * h;
    return g;
}

// L^2 sum_k |k| |f_hat|^2 with f_hat the discrete Fourier coefficients.
double hplus12_sq(const RealGrid& f) {
    detail::Fft2 fft(f.n, f.n);
    auto data = fft.data();
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = f.values[i];
    fft.forward();
    const double norm = 1.0 / (static_cast<double>(f.n) * f.n);
    double s = 0.0;
    for (int j2 = 0; j2 < f.n; ++j2)
        for (int j1 = 0; j1 < f.n; ++j1) {
            const double k = 2.0 * pi / f.L *
                             std::hypot(detail::Fft2::freq(j1, f.n), detail::Fft2::freq(j2, f.n));
            s += k * std::norm(data[static_cast<std::size_t>(j2) * f.n + j1] * norm);
        }
    return f.L * f.L * s;
}

double safe_ratio(double lhs, double rhs) {
    if (rhs > 0.0) return lhs / rhs;
    return lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

}  // namespace

double integral(const RealGrid& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return s * f.h() * f.h();
}

double sup(const RealGrid& f) {
    return f.values.empty() ? 0.0 : *std::max_element(f.values.begin(), f.values.end());
}

double disk_box_area(double R, double x0, double x1, double y0, double y1) {
    if (x1 <= x0 || y1 <= y0 || R <= 0.0) return 0.0;
    const double a = signed_corner(R, x1, y1) - signed_corner(R, x0, y1) - signed_corner(R, x1, y0) +
                     signed_corner(R, x0, y0);
    return std::max(0.0, a);
}

RealGrid ball_average(const RealGrid& f, double radius) {
    const int n = f.n;
    const double h = f.h();
    const int ext = static_cast<int>(std::ceil(radius / h + 0.5));
    const double disk = pi * radius * radius;

    detail::Fft2 kernel(n, n), signal(n, n);
    auto kd = kernel.data();
    std::fill(kd.begin(), kd.end(), cplx{});
    for (int d2 = -ext; d2 <= ext; ++d2)
        for (int d1 = -ext; d1 <= ext; ++d1) {
            const double w = disk_box_area(radius, (d1 - 0.5) * h, (d1 + 0.5) * h, (d2 - 0.5) * h,
                                           (d2 + 0.5) * h);
            if (w > 0.0) kd[f.idx(d1, d2)] += w / disk;
        }
    auto sd = signal.data();
    for (std::size_t i = 0; i < sd.size(); ++i) sd[i] = f.values[i];
    kernel.forward();
    signal.forward();
    for (std::size_t i = 0; i < sd.size(); ++i) sd[i] *= kd[i];
    signal.backward();

    const auto [lo, hi] = std::minmax_element(f.values.begin(), f.values.end());
    RealGrid out(n, f.L);
    const double norm = 1.0 / (static_cast<double>(n) * n);
    for (std::size_t i = 0; i < sd.size(); ++i) out.values[i] = std::clamp(sd[i].real() * norm, *lo, *hi);
    return out;
}

RealGrid rasterize(std::span<const Rect> rects, int n, double L, double amplitude) {
    RealGrid g(n, L);
    const double h = g.h();
    for (const Rect& r : rects)
        for (int s2 = -1; s2 <= 1; ++s2)
            for (int s1 = -1; s1 <= 1; ++s1) {
                const double x0 = std::max(0.0, r.x0() + s1 * L), x1 = std::min(L, r.x1() + s1 * L);
                const double y0 = std::max(0.0, r.y0() + s2 * L), y1 = std::min(L, r.y1() + s2 * L);
                if (x1 <= x0 || y1 <= y0) continue;
                const int i0 = static_cast<int>(std::floor(x0 / h));
                const int i1 = std::min(n - 1, static_cast<int>(std::ceil(x1 / h)) - 1);
                const int j0 = static_cast<int>(std::floor(y0 / h));
                const int j1 = std::min(n - 1, static_cast<int>(std::ceil(y1 / h)) - 1);
                for (int j = j0; j <= j1; ++j) {
                    const double wy = std::min(y1, (j + 1) * h) - std::max(y0, j * h);
                    if (wy <= 0.0) continue;
                    for (int i = i0; i <= i1; ++i) {
                        const double wx = std::min(x1, (i + 1) * h) - std::max(x0, i * h);
                        if (wx > 0.0) g(i, j) += amplitude * wx * wy / (h * h);
                    }
                }
            }
    return g;
}

RealGrid build_test_function(const RealGrid& chi, double ell, double r) {
    if (!(ell > 0.0) || ell > r)
        throw BadScales("need 0 < ell <= r, got ell = " + std::to_string(ell) + ", r = " + std::to_string(r));
    const double cap = sup(chi);
    const double gain = (2.0 * r / ell) * (2.0 * r / ell);
    RealGrid inner = ball_average(chi, 2.0 * r);
    for (double& v : inner.values) v = std::min(gain * v, cap);
    return ball_average(inner, r);
}

TestFunctionCheck check_test_function(const RealGrid& chi, const RealGrid& psi, double ell, double r) {
    TestFunctionCheck c;
    const RealGrid avg = ball_average(chi, ell);
    c.min_excess = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < psi.values.size(); ++i)
        c.min_excess = std::min(c.min_excess, psi.values[i] - avg.values[i]);

    const double top = sup(chi), mass = integral(chi);
    const GradientStats g = gradient_stats(psi);
    c.sup_ratio = safe_ratio(sup(psi), top);
    c.integral_ratio = safe_ratio(integral(psi), (2.0 * r / ell) * (2.0 * r / ell) * mass);
    c.grad_sup_const = safe_ratio(r * g.sup, top);
    c.grad_l1_const = safe_ratio(r * g.l1, (r / ell) * (r / ell) * mass);
    return c;
}

double bogomolnyi_residual(const ComplexGrid& u, const RealGrid& A1, const RealGrid& A2) {
    const int n = u.n;
    const double h = u.h();
    const cplx i_unit{0.0, 1.0};
    std::vector<cplx> w1(u.values.size()), w2(u.values.size());
    RealGrid j1(n, u.L), j2(n, u.L);
    for (int b = 0; b < n; ++b)
        for (int a = 0; a < n; ++a) {
            const std::size_t k = u.idx(a, b);
            w1[k] = (u(a + 1, b) - u(a - 1, b)) / (2.0 * h) - i_unit * A1(a, b) * u(a, b);
            w2[k] = (u(a, b + 1) - u(a, b - 1)) / (2.0 * h) - i_unit * A2(a, b) * u(a, b);
            j1.values[k] = (-i_unit * std::conj(u.values[k]) * w1[k]).real();
            j2.values[k] = (-i_unit * std::conj(u.values[k]) * w2[k]).real();
        }
    double worst = 0.0;
    for (int b = 0; b < n; ++b)
        for (int a = 0; a < n; ++a) {
            const std::size_t k = u.idx(a, b);
            const double lhs = std::norm(w1[k]) + std::norm(w2[k]);
            const double d3 = std::norm(w2[k] - i_unit * w1[k]);
            const double b3 = (A2(a + 1, b) - A2(a - 1, b) - A1(a, b + 1) + A1(a, b - 1)) / (2.0 * h);
            const double curl_j = (j2(a + 1, b) - j2(a - 1, b) - j1(a, b + 1) + j1(a, b - 1)) / (2.0 * h);
            worst = std::max(worst, std::abs(lhs - d3 - std::norm(u.values[k]) * b3 - curl_j));
        }
    return worst;
}

double flux_constancy(const GridField& B, const Params& p) {
    const GridSpec& s = B.spec();
    const double cell = s.spacing(0) * s.spacing(1);
    const double expected = p.b_ext * (s.hi[0] - s.lo[0]) * (s.hi[1] - s.lo[1]);
    double worst = 0.0;
    for (int i3 = 0; i3 < s.dims[2]; ++i3) {
        double flux = 0.0;
        for (int i2 = 0; i2 < s.dims[1]; ++i2)
            for (int i1 = 0; i1 < s.dims[0]; ++i1) flux += B(i1, i2, i3, 2);
        worst = std::max(worst, std::abs(flux * cell - expected));
    }
    return worst;
}

ComplexGrid truncate_density(const ComplexGrid& u) {
    ComplexGrid out = u;
    for (cplx& v : out.values) {
        const double m = std::abs(v);
        if (m > 1.0) v /= m;
    }
    return out;
}

double lattice_gl_energy(const ComplexGrid& u, const RealGrid& A1, const RealGrid& A2, double kappa,
                         double b) {
    const int n = u.n;
    const double h = u.h();
    const cplx i_unit{0.0, 1.0};
    double kinetic = 0.0, potential = 0.0, magnetic = 0.0;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            const double a1 = 0.5 * (A1(x, y) + A1(x + 1, y));
            const double a2 = 0.5 * (A2(x, y) + A2(x, y + 1));
            kinetic += std::norm(u(x + 1, y) * std::exp(-i_unit * h * a1) - u(x, y));
            kinetic += std::norm(u(x, y + 1) * std::exp(-i_unit * h * a2) - u(x, y));
            const double rho = std::norm(u(x, y));
            potential += 0.5 * kappa * kappa * (1.0 - rho) * (1.0 - rho) * h * h;
            const double a1_top = 0.5 * (A1(x, y + 1) + A1(x + 1, y + 1));
            const double a2_right = 0.5 * (A2(x + 1, y) + A2(x + 1, y + 1));
            const double curl = (a2_right - a2 - a1_top + a1) / h;
            magnetic += (curl - b) * (curl - b) * h * h;
        }
    return kinetic + potential + magnetic;
}

cplx SmoothField2D::operator()(double x1, double x2) const {
    cplx s{};
    const double k = 2.0 * pi / L;
    for (const auto& [m, c] : modes) s += c * std::polar(1.0, k * (m[0] * x1 + m[1] * x2));
    return s;
}

ComplexGrid SmoothField2D::sample(int n) const {
    ComplexGrid g(n, L);
    const double h = g.h();
    for (int b = 0; b < n; ++b)
        for (int a = 0; a < n; ++a) g(a, b) = (*this)((a + 0.5) * h, (b + 0.5) * h);
    return g;
}

RealGrid SmoothField2D::sample_real(int n) const {
    const ComplexGrid c = sample(n);
    RealGrid g(n, L);
    for (std::size_t i = 0; i < c.values.size(); ++i) g.values[i] = c.values[i].real();
    return g;
}

SmoothField2D random_smooth_field(std::uint64_t seed, double L, int max_mode, double amplitude) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    SmoothField2D f;
    f.L = L;
    double total = 0.0;
    for (int m2 = -max_mode; m2 <= max_mode; ++m2)
        for (int m1 = -max_mode; m1 <= max_mode; ++m1) {
            const cplx c = cplx{normal(rng), normal(rng)} / (1.0 + m1 * m1 + m2 * m2);
            f.modes.push_back({{m1, m2}, c});
            total += std::abs(c);
        }
    for (auto& m : f.modes) m.second *= amplitude / total;
    return f;
}

std::pair<double, double> paper_scales(double kappa, double T) {
    return {std::pow(T, 4.0 / 7.0) * std::pow(kappa, -3.0 / 7.0),
            std::pow(T, 5.0 / 7.0) * std::pow(kappa, -2.0 / 7.0)};
}

const AuditEntry& AuditReport::entry(const std::string& name) const {
    for (const AuditEntry& e : entries)
        if (e.name == name) return e;
    throw std::out_of_range("no audit entry " + name);
}

std::string AuditReport::to_json() const {
    nlohmann::ordered_json j;
    j["z"] = z;
    j["ell"] = ell;
    j["r"] = r;
    j["grid"] = grid;
    j["F_total"] = F_total;
    j["F_section"] = F_section;
    j["all_good"] = all_good;
    j["section_good"] = section_good;
    j["equidistribution"] = equidistribution;
    j["equidistribution_ok"] = equidistribution_ok;
    j["test_function"] = {{"min_excess", test_function.min_excess},
                          {"sup_ratio", test_function.sup_ratio},
                          {"integral_ratio", test_function.integral_ratio},
                          {"grad_sup_const", test_function.grad_sup_const},
                          {"grad_l1_const", test_function.grad_l1_const}};
    auto& list = j["entries"] = nlohmann::ordered_json::array();
    for (const AuditEntry& e : entries) {
        nlohmann::ordered_json x;
        x["name"] = e.name;
        x["lhs"] = e.lhs;
        x["rhs"] = e.rhs;
        x["ratio"] = std::isfinite(e.ratio) ? nlohmann::ordered_json(e.ratio) : nlohmann::ordered_json("inf");
        x["constant_form"] = e.constant_form;
        x["exact"] = e.exact;
        x["pass"] = e.pass;
        list.push_back(std::move(x));
    }
    return j.dump(2);
}

std::string AuditReport::to_table() const {
    std::ostringstream os;
    os << "section z = " << z << ", ell = " << ell << ", r = " << r << ", grid " << grid << "\n";
    os << "F = " << F_total << (all_good ? " (good)" : " (not good)") << ", F(z) = " << F_section
       << (section_good ? " (good)" : " (not good)") << ", equidistribution " << equidistribution << "\n";
    os << std::left << std::setw(16) << "inequality" << std::right << std::setw(14) << "lhs" << " " << std::setw(14)
       << "rhs" << " " << std::setw(12) << "ratio" << "  check\n";
    os << std::setprecision(6);
    for (const AuditEntry& e : entries) {
        os << std::left << std::setw(16) << e.name << std::right << std::setw(14) << e.lhs << " " << std::setw(14)
           << e.rhs << " " << std::setw(12) << e.ratio << "  " << (e.exact ? (e.pass ? "pass" : "FAIL") : "-")
           << "\n";
    }
    return os.str();
}

AuditReport audit_lower_bound_chain(const SharpPattern& pat, double z, double ell, double r,
                                    const AuditOptions& opt) {
    const Params& p = pat.params;
    const double k = p.kappa, b = p.b_ext, L = p.L, T = p.T;
    if (!(ell > 0.0) || ell > r || r > std::sqrt(k / (8.0 * b)) * ell * (1.0 + 1e-12))
        throw ScalesInadmissible("need 0 < ell <= r <= (kappa/(8b))^{1/2} ell, got ell = " +
                                 std::to_string(ell) + ", r = " + std::to_string(r));
    if (z < 0.0 || z > T) throw ConstraintViolated("section height outside [0, T]");

    AuditReport rep;
    rep.z = z;
    rep.ell = ell;
    rep.r = r;
    int n = opt.grid;
    const double inside = pat.field_inside();
    const std::vector<Rect> here = cross_section(pat, z);
    if (n <= 0) {
        double finest = L;
        for (const Rect& x : here) finest = std::min(finest, x.min_side());
        n = 64;
        while (n < 2048 && (n * ell < 8.0 * L || n * finest < 2.0 * L)) n *= 2;
    }
    rep.grid = n;

    const std::vector<Rect> face = cross_section(pat, 0.0);
    const RealGrid chi = rasterize(here, n, L);
    const RealGrid chi0 = rasterize(face, n, L);
    const RealGrid psi = build_test_function(chi, ell, r);
    rep.test_function = check_test_function(chi, psi, ell, r);
    const double h2 = chi.h() * chi.h();

    const EnergyReport energy = total_sharp_energy(pat);
    rep.F_total = energy.total;
    double perimeter = 0.0, area = 0.0;
    for (const Rect& x : here) {
        perimeter += x.perimeter();
        area += x.area();
    }
    double transport = 0.0, moved = 0.0;
    for (const TubeSegment& s : pat.segments) {
        const bool in = (z >= s.z_bottom && z < s.z_top) || (z == T && s.z_top == T);
        if (in) transport += s.section_transport(k, z);
        moved += s.transport_l1(k, 0.0, z);
    }
    rep.F_section = k * perimeter + transport;
    rep.all_good = rep.F_total <= k * b * L * L * T / 8.0;
    rep.section_good = rep.F_section <= k * b * L * L / 8.0;
    rep.equidistribution = safe_ratio(inside * area, b * L * L);
    rep.equidistribution_ok =
        !rep.section_good || (rep.equidistribution >= 0.75 && rep.equidistribution <= 1.25);

    // Pairings below this are roundoff of a flux-sized sum.
    const double floor = 1e-10 * b * L * L;
    auto add = [&](std::string name, double lhs, double rhs, std::string form, bool exact) {
        if (lhs < floor) lhs = 0.0;
        AuditEntry e{std::move(name), lhs, rhs, safe_ratio(lhs, rhs), std::move(form), exact, true};
        if (exact) e.pass = e.ratio <= 1.0 + opt.identity_tol;
        rep.entries.push_back(std::move(e));
    };

    double unused = 0.0, shift = 0.0, ext_pair = 0.0;
    for (std::size_t i = 0; i < psi.values.size(); ++i) {
        unused += chi.values[i] * (1.0 - psi.values[i]);
        shift += (chi.values[i] - chi0.values[i]) * psi.values[i];
        ext_pair += (inside * chi0.values[i] - b) * psi.values[i];
    }
    unused = std::max(0.0, unused * inside * h2);
    shift = std::abs(shift * inside * h2);
    ext_pair = std::abs(ext_pair * h2);
    const double Fz = rep.F_section, F = rep.F_total;

    add("interior", unused, ell * Fz + std::sqrt(r * r * b * L * L / (ell * ell * k) * Fz),
        "ell F(z) + (r^2 b L^2 / (ell^2 kappa))^{1/2} F(z)^{1/2}", false);
    add("kantorovich", shift, gradient_stats(psi).sup * moved, "sup|grad psi| int_0^z int |B'|", true);
    add("transport", shift, std::sqrt(b * L * L * T / k * F) / r, "(1/r) (b L^2 T / kappa)^{1/2} F^{1/2}",
        false);
    add("exterior_dual", ext_pair, std::sqrt(hplus12_sq(psi) * energy.exterior_bottom),
        "||psi||_{H^{1/2}} (exterior energy)^{1/2}", true);
    add("exterior", ext_pair, std::sqrt(r * b * L * L / (ell * ell * k) * F),
        "(r b L^2 / (ell^2 kappa))^{1/2} F^{1/2}", false);
    const double m = std::min({r * r / (T * T), ell * ell / (r * T), 1.0 / (k * ell), ell * ell / (r * r)});
    add("final", k * b * L * L * T * m, F, "kappa b L^2 T min{r^2/T^2, ell^2/(r T), 1/(kappa ell), ell^2/r^2}",
        false);
    return rep;
}

}  // namespace branching
