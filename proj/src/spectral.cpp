#include "branching/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "branching/quadrature.hpp"
#include "fft.hpp"

namespace branching {

using detail::Fft2;

SpectralTrace::SpectralTrace(double L, int K)
    : L_(L), K_(K), coeffs_(static_cast<std::size_t>(2 * K + 1) * (2 * K + 1)) {}

SpectralTrace SpectralTrace::from_samples(std::span<const double> samples, int n, double L, int K) {
    if (samples.size() != static_cast<std::size_t>(n) * n) throw DimMismatch("sample count != n^2");
    if (2 * K >= n) throw DimMismatch("cutoff K must satisfy 2K < n");
    Fft2 fft(n, n);
    auto buf = fft.data();
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = samples[i];
    fft.forward();
    SpectralTrace g(L, K);
    const double norm = 1.0 / (static_cast<double>(n) * n);
    for (int n2 = -K; n2 <= K; ++n2)
        for (int n1 = -K; n1 <= K; ++n1) {
            const int i1 = (n1 + n) % n, i2 = (n2 + n) % n;
            g.at(n1, n2) = buf[static_cast<std::size_t>(i2) * n + i1] * norm;
        }
    return g;
}

SpectralTrace SpectralTrace::from_rects(std::span<const Rect> rects, std::span<const double> amplitude,
                                        double L, int K) {
    if (rects.size() != amplitude.size()) throw DimMismatch("one amplitude per rectangle");
    SpectralTrace g(L, K);
    const int m = 2 * K + 1;
    std::vector<cplx> xs(m), ys(m);
    for (std::size_t r = 0; r < rects.size(); ++r) {
        if (rects[r].area() == 0.0) continue;
        for (int n = -K; n <= K; ++n) {
            const double k = 2.0 * pi * n / L;
            xs[n + K] = interval_transform(k, rects[r].x0(), rects[r].x1());
            ys[n + K] = interval_transform(k, rects[r].y0(), rects[r].y1());
        }
        const double c = amplitude[r] / (L * L);
        for (int n2 = -K; n2 <= K; ++n2)
            for (int n1 = -K; n1 <= K; ++n1) g.at(n1, n2) += c * xs[n1 + K] * ys[n2 + K];
    }
    return g;
}

std::vector<double> SpectralTrace::sample(int n) const {
    if (2 * K_ >= n) throw DimMismatch("grid too coarse for the stored modes");
    Fft2 fft(n, n);
    auto buf = fft.data();
    std::fill(buf.begin(), buf.end(), cplx{});
    for (int n2 = -K_; n2 <= K_; ++n2)
        for (int n1 = -K_; n1 <= K_; ++n1)
            buf[static_cast<std::size_t>((n2 + n) % n) * n + (n1 + n) % n] = at(n1, n2);
    fft.backward();
    std::vector<double> out(buf.size());
    for (std::size_t i = 0; i < buf.size(); ++i) out[i] = buf[i].real();
    return out;
}

cplx interval_transform(double k, double x0, double x1) {
    const double len = x1 - x0;
    const double c = 0.5 * (x0 + x1);
    const double h = 0.5 * k * len;
    const double sinc = std::abs(h) < 1e-8 ? 1.0 - h * h / 6.0 : std::sin(h) / h;
    return std::polar(len * sinc, -k * c);
}

cplx interval_moment_transform(double k, double x0, double x1) {
    const double len = x1 - x0;
    const double kl = k * len;
    cplx j;
    if (std::abs(kl) < 0.5) {
        // sum_m (-i k)^m len^(m+2) / (m! (m+2))
        cplx term = len * len;  // (-ik)^m len^(m+2) / m!
        for (int m = 0; m < 30; ++m) {
            j += term / static_cast<double>(m + 2);
            term *= cplx(0.0, -kl) / static_cast<double>(m + 1);
        }
    } else {
        const cplx e = std::polar(1.0, -kl);
        j = cplx(0.0, 1.0) * len * e / k + (e - 1.0) / (k * k);
    }
    return std::polar(1.0, -k * x0) * j;
}

double hminus12_sq(const SpectralTrace& g) {
    const int K = g.cutoff();
    const double L = g.period();
    double sum = 0.0;
    for (int n2 = -K; n2 <= K; ++n2)
        for (int n1 = -K; n1 <= K; ++n1) {
            if (n1 == 0 && n2 == 0) continue;
            const double k = 2.0 * pi / L * std::hypot(n1, n2);
            sum += std::norm(g.at(n1, n2)) / k;
        }
    return L * L * sum;
}

namespace {

// Periodised 1D heat-kernel overlap of [a, b] and [c, d] minus the plain
// overlap is a sum of corner terms xi(u) with
// xi(u) = s/sqrt(pi) exp(-u^2/4s^2) - |u|/2 erfc(|u|/2s).
struct AxisPair {
    double overlap = 0.0;
    std::vector<std::pair<double, double>> corners;  // (u, sign)
    double min_abs_u = 0.0;
};

double periodic_gap(double a, double b, double c, double d, double L) {
    double best = L;
    for (int m = -1; m <= 1; ++m) {
        const double cc = c + m * L, dd = d + m * L;
        best = std::min(best, std::max({0.0, cc - b, a - dd}));
    }
    return best;
}

AxisPair make_axis_pair(double a, double b, double c, double d, double L, double reach) {
    AxisPair p;
    p.min_abs_u = std::numeric_limits<double>::infinity();
    const int mlo = static_cast<int>(std::floor((a - d - reach) / L));
    const int mhi = static_cast<int>(std::ceil((b - c + reach) / L));
    for (int m = mlo; m <= mhi; ++m) {
        const double cc = c + m * L, dd = d + m * L;
        p.overlap += std::max(0.0, std::min(b, dd) - std::max(a, cc));
        const double us[4] = {b - cc, a - cc, b - dd, a - dd};
        const double sg[4] = {1.0, -1.0, -1.0, 1.0};
        for (int i = 0; i < 4; ++i) {
            if (std::abs(us[i]) > reach) continue;
            p.corners.emplace_back(us[i], sg[i]);
            p.min_abs_u = std::min(p.min_abs_u, std::abs(us[i]));
        }
    }
    return p;
}

double axis_value(const AxisPair& p, double s) {
    double w = p.overlap;
    const double inv = 1.0 / (2.0 * s);
    for (const auto& [u, sign] : p.corners) {
        const double x = std::abs(u) * inv;
        if (x > 7.0) continue;
        w += sign * (s / std::sqrt(pi) * std::exp(-x * x) - 0.5 * std::abs(u) * std::erfc(x));
    }
    return w;
}

}  // namespace

double hminus12_sq_rects(std::span<const Rect> rects, std::span<const double> amplitude, double L,
                         double split) {
    if (rects.size() != amplitude.size()) throw DimMismatch("one amplitude per rectangle");
    std::vector<Rect> rs;
    std::vector<double> cs;
    double total = 0.0;
    for (std::size_t i = 0; i < rects.size(); ++i) {
        if (rects[i].area() == 0.0 || amplitude[i] == 0.0) continue;
        rs.push_back(rects[i]);
        cs.push_back(amplitude[i]);
        total += amplitude[i] * rects[i].area();
    }
    const std::size_t M = rs.size();
    if (M == 0) return 0.0;

    double s0 = split;
    if (s0 <= 0.0) {
        const double x = std::pow(3e-6 / static_cast<double>(M), 0.25);
        s0 = L * std::clamp(x, 1.0 / 4096.0, 1.0 / 8.0);
    }

    // Fourier part: L^2 sum |g_hat|^2 erfc(|k| s0) / |k|.
    const double kmax = 6.2 / s0;
    const int K = static_cast<int>(std::ceil(kmax * L / (2.0 * pi)));
    const int m = 2 * K + 1;
    Eigen::MatrixXcd X(m, static_cast<Eigen::Index>(M)), Y(m, static_cast<Eigen::Index>(M));
    for (std::size_t r = 0; r < M; ++r)
        for (int n = -K; n <= K; ++n) {
            const double k = 2.0 * pi * n / L;
            X(n + K, r) = interval_transform(k, rs[r].x0(), rs[r].x1()) * cs[r];
            Y(n + K, r) = interval_transform(k, rs[r].y0(), rs[r].y1());
        }
    const Eigen::MatrixXcd G = X * Y.transpose();
    double far = 0.0;
    for (int n2 = -K; n2 <= K; ++n2)
        for (int n1 = -K; n1 <= K; ++n1) {
            if (n1 == 0 && n2 == 0) continue;
            const double k = 2.0 * pi / L * std::hypot(n1, n2);
            if (k > kmax) continue;
            far += std::norm(G(n1 + K, n2 + K)) * std::erfc(k * s0) / k;
        }
    far /= L * L;  // L^2 * |G / L^2|^2

    // Real-space part: (2/sqrt(pi)) int_0^s0 [sum c c' Wx Wy - total^2/L^2] ds.
    const double reach = 14.0 * s0;
    struct Pair {
        double weight;
        AxisPair x, y;
    };
    std::vector<Pair> pairs;
    auto consider = [&](std::size_t i, std::size_t j) {
        if (periodic_gap(rs[i].x0(), rs[i].x1(), rs[j].x0(), rs[j].x1(), L) > reach) return;
        if (periodic_gap(rs[i].y0(), rs[i].y1(), rs[j].y0(), rs[j].y1(), L) > reach) return;
        pairs.push_back({(i == j ? 1.0 : 2.0) * cs[i] * cs[j],
                         make_axis_pair(rs[i].x0(), rs[i].x1(), rs[j].x0(), rs[j].x1(), L, reach),
                         make_axis_pair(rs[i].y0(), rs[i].y1(), rs[j].y0(), rs[j].y1(), L, reach)});
    };
    // Bucket by origin; rectangles two buckets apart are farther than reach.
    double max_side = 0.0;
    for (const Rect& r : rs) max_side = std::max(max_side, r.max_side());
    const int nb = static_cast<int>(std::floor(L / (reach + max_side)));
    if (nb < 3) {
        for (std::size_t i = 0; i < M; ++i)
            for (std::size_t j = i; j < M; ++j) consider(i, j);
    } else {
        auto bucket = [&](double v) {
            const double w = v - L * std::floor(v / L);
            return std::min(nb - 1, static_cast<int>(w / L * nb));
        };
        std::vector<std::vector<std::size_t>> cells(static_cast<std::size_t>(nb) * nb);
        std::vector<int> bx(M), by(M);
        for (std::size_t i = 0; i < M; ++i) {
            bx[i] = bucket(rs[i].x0());
            by[i] = bucket(rs[i].y0());
            cells[static_cast<std::size_t>(by[i]) * nb + bx[i]].push_back(i);
        }
        for (std::size_t i = 0; i < M; ++i)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int cx = (bx[i] + dx + nb) % nb, cy = (by[i] + dy + nb) % nb;
                    for (std::size_t j : cells[static_cast<std::size_t>(cy) * nb + cx])
                        if (j >= i) consider(i, j);
                }
    }
    const double mean_term = total * total / (L * L);
    auto integrand = [&](double s) {
        double acc = 0.0;
        for (const Pair& p : pairs) {
            const double wx = axis_value(p.x, s);
            if (wx == 0.0) continue;
            acc += p.weight * wx * axis_value(p.y, s);
        }
        return acc - mean_term;
    };
    // Dyadic panels resolve features at every scale between 0 and s0.
    double near = 0.0;
    double hi = s0;
    for (int level = 0; level < 48; ++level) {
        const double lo = 0.5 * hi;
        near += integrate(integrand, lo, hi, 12);
        hi = lo;
    }
    near += integrand(0.5 * hi) * hi;
    near *= 2.0 / std::sqrt(pi);
    return far + near;
}

double GridSpec::spacing(int axis) const {
    const int n = dims[axis];
    if (periodic[axis]) return (hi[axis] - lo[axis]) / n;
    return n > 1 ? (hi[axis] - lo[axis]) / (n - 1) : 0.0;
}

GridField::GridField(GridSpec spec, int ncomp)
    : spec_(spec), ncomp_(ncomp), data_(spec.nodes() * static_cast<std::size_t>(ncomp), 0.0) {}

double GridField::full(int i1, int i2, int i3, int c) const {
    double v = (*this)(i1, i2, i3, c);
    if (linear_gauge_b != 0.0 && c < 2) {
        const double x1 = spec_.coord(0, i1), x2 = spec_.coord(1, i2);
        v += c == 0 ? -0.5 * linear_gauge_b * x2 : 0.5 * linear_gauge_b * x1;
    }
    return v;
}

namespace {
constexpr char grid_magic[4] = {'G', 'R', 'D', 'F'};
constexpr std::uint32_t grid_version = 1;

template <class T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw IoError("truncated grid file");
    return v;
}
}  // namespace

void GridField::save(const std::string& path) const {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot open " + tmp);
        out.write(grid_magic, 4);
        put(out, grid_version);
        for (int a = 0; a < 3; ++a) put(out, static_cast<std::int32_t>(spec_.dims[a]));
        put(out, static_cast<std::int32_t>(ncomp_));
        for (int a = 0; a < 3; ++a) put(out, spec_.spacing(a));
        for (int a = 0; a < 3; ++a) put(out, spec_.lo[a]);
        for (int a = 0; a < 3; ++a) put(out, spec_.hi[a]);
        for (int a = 0; a < 3; ++a) put(out, static_cast<std::uint8_t>(spec_.periodic[a]));
        put(out, linear_gauge_b);
        out.write(reinterpret_cast<const char*>(data_.data()),
                  static_cast<std::streamsize>(data_.size() * sizeof(double)));
        if (!out) throw IoError("write failed for " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw IoError("cannot rename to " + path);
}

GridField GridField::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, grid_magic, 4) != 0) throw IoError("not a grid file: " + path);
    if (get<std::uint32_t>(in) != grid_version) throw IoError("unsupported grid file version");
    GridSpec spec;
    for (int a = 0; a < 3; ++a) spec.dims[a] = get<std::int32_t>(in);
    const int ncomp = get<std::int32_t>(in);
    for (int a = 0; a < 3; ++a) (void)get<double>(in);
    for (int a = 0; a < 3; ++a) spec.lo[a] = get<double>(in);
    for (int a = 0; a < 3; ++a) spec.hi[a] = get<double>(in);
    for (int a = 0; a < 3; ++a) spec.periodic[a] = get<std::uint8_t>(in) != 0;
    const double gauge = get<double>(in);
    GridField f(spec, ncomp);
    f.linear_gauge_b = gauge;
    in.read(reinterpret_cast<char*>(f.data_.data()),
            static_cast<std::streamsize>(f.data_.size() * sizeof(double)));
    if (!in) throw IoError("truncated grid data in " + path);
    return f;
}

GridField exterior_extension(const SpectralTrace& g, double depth, std::array<int, 3> dims) {
    const double L = g.period();
    const int K = g.cutoff();
    const int n1 = dims[0], n2 = dims[1];
    if (2 * K >= std::min(n1, n2)) throw DimMismatch("grid too coarse for the trace");
    if (dims[2] < 2) throw DimMismatch("need at least two planes");
    GridSpec spec{dims, {0.0, 0.0, -depth}, {L, L, 0.0}, {true, true, false}};
    GridField B(spec, 3);
    Fft2 fft(n1, n2);
    auto buf = fft.data();
    for (int i3 = 0; i3 < dims[2]; ++i3) {
        const double z = spec.coord(2, i3);
        for (int c = 0; c < 3; ++c) {
            std::fill(buf.begin(), buf.end(), cplx{});
            for (int m2 = -K; m2 <= K; ++m2)
                for (int m1 = -K; m1 <= K; ++m1) {
                    if (m1 == 0 && m2 == 0) continue;
                    const double k1 = 2.0 * pi * m1 / L, k2 = 2.0 * pi * m2 / L;
                    const double k = std::hypot(k1, k2);
                    const cplx v = g.at(m1, m2) * std::exp(k * z);
                    const cplx val = c == 2 ? v : cplx(0.0, (c == 0 ? k1 : k2) / k) * v;
                    buf[static_cast<std::size_t>((m2 + n2) % n2) * n1 + (m1 + n1) % n1] = val;
                }
            fft.backward();
            for (int i2 = 0; i2 < n2; ++i2)
                for (int i1 = 0; i1 < n1; ++i1)
                    B(i1, i2, i3, c) = buf[static_cast<std::size_t>(i2) * n1 + i1].real() +
                                       (c == 2 ? g.mean() : 0.0);
        }
    }
    return B;
}

namespace {

// Centred difference along `axis` of component `c`, second-order one-sided at
// the ends of a non-periodic axis. Uses the periodic part only.
double derivative(const GridField& f, int axis, int c, int i1, int i2, int i3) {
    const GridSpec& s = f.spec();
    const int n = s.dims[axis];
    const double h = s.spacing(axis);
    int idx[3] = {i1, i2, i3};
    auto at = [&](int i) {
        int j[3] = {idx[0], idx[1], idx[2]};
        j[axis] = i;
        return f(j[0], j[1], j[2], c);
    };
    const int i = idx[axis];
    if (s.periodic[axis]) return (at((i + 1) % n) - at((i - 1 + n) % n)) / (2.0 * h);
    if (i == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
    if (i == n - 1) return (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h);
    return (at(i + 1) - at(i - 1)) / (2.0 * h);
}

void require_vector_grid(const GridField& f, const char* what) {
    if (f.ncomp() != 3) throw DimMismatch(std::string(what) + " must have three components");
    const GridSpec& s = f.spec();
    if (!s.periodic[0] || !s.periodic[1] || s.periodic[2])
        throw DimMismatch(std::string(what) + " must be periodic in x1, x2 only");
    if (s.dims[0] < 3 || s.dims[1] < 3 || s.dims[2] < 3)
        throw DimMismatch(std::string(what) + " needs at least three nodes per axis");
}

// (1 - e^-x) and (1 - e^-x (1 + x)) without cancellation.
double one_minus_exp(double x) { return -std::expm1(-x); }
double one_minus_exp_linear(double x) {
    if (x > 0.1) return 1.0 - std::exp(-x) * (1.0 + x);
    double sum = 0.0, pw = x, fact = 1.0;
    for (int m = 2; m <= 14; ++m) {
        pw *= x;
        fact *= m;
        sum += ((m % 2 == 0) ? 1.0 : -1.0) * pw * (m - 1) / fact;
    }
    return sum;
}

}  // namespace

double relative_divergence(const GridField& B) {
    require_vector_grid(B, "B");
    const auto& d = B.spec().dims;
    double num = 0.0, den = 0.0;
    for (int i3 = 0; i3 < d[2]; ++i3)
        for (int i2 = 0; i2 < d[1]; ++i2)
            for (int i1 = 0; i1 < d[0]; ++i1) {
                double div = 0.0;
                for (int axis = 0; axis < 3; ++axis)
                    for (int c = 0; c < 3; ++c) {
                        const double g = derivative(B, axis, c, i1, i2, i3);
                        den += g * g;
                        if (axis == c) div += g;
                    }
                num += div * div;
            }
    return den == 0.0 ? 0.0 : std::sqrt(num / den);
}

GridField construct_vector_potential(const GridField& B, double b_ext, const PotentialOptions& opt) {
    require_vector_grid(B, "B");
    if (B.linear_gauge_b != 0.0) throw DimMismatch("B must not carry a linear gauge part");
    const GridSpec& spec = B.spec();
    const int n1 = spec.dims[0], n2 = spec.dims[1], n3 = spec.dims[2];
    const double L1 = spec.hi[0] - spec.lo[0], L2 = spec.hi[1] - spec.lo[1];
    const double h = spec.spacing(2);

    const double div = relative_divergence(B);
    if (div > opt.divergence_tol)
        throw NotDivergenceFree("relative discrete divergence " + std::to_string(div));

    const std::size_t plane = static_cast<std::size_t>(n1) * n2;
    // spectra[(i3 * 3 + c) * plane + i2 * n1 + i1]
    std::vector<cplx> spectra(plane * 3 * static_cast<std::size_t>(n3));
    Fft2 fft(n1, n2);
    auto buf = fft.data();
    const double norm = 1.0 / static_cast<double>(plane);
    for (int i3 = 0; i3 < n3; ++i3)
        for (int c = 0; c < 3; ++c) {
            for (int i2 = 0; i2 < n2; ++i2)
                for (int i1 = 0; i1 < n1; ++i1)
                    buf[static_cast<std::size_t>(i2) * n1 + i1] = B(i1, i2, i3, c);
            fft.forward();
            cplx* dst = spectra.data() + (static_cast<std::size_t>(i3) * 3 + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) dst[i] = buf[i] * norm;
        }
    auto S = [&](int i3, int c, std::size_t mode) -> cplx& {
        return spectra[(static_cast<std::size_t>(i3) * 3 + c) * plane + mode];
    };

    double bmax = std::abs(b_ext);
    for (double v : B.values()) bmax = std::max(bmax, std::abs(v));
    for (int i3 = 0; i3 < n3; ++i3) {
        const double drift = std::abs(S(i3, 2, 0).real() - b_ext);
        if (drift > opt.flux_tol * std::max(bmax, 1e-300))
            throw FluxMismatch("mean vertical field differs from b_ext by " + std::to_string(drift));
    }

    // Section means of B' give the k' = 0 part of A; keep them before the
    // spectra are overwritten.
    std::vector<double> mean1(n3), mean2(n3);
    for (int i3 = 0; i3 < n3; ++i3) {
        mean1[i3] = S(i3, 0, 0).real();
        mean2[i3] = S(i3, 1, 0).real();
    }

    std::vector<std::array<cplx, 3>> col(n3), F(n3), G(n3);
    for (int i2 = 0; i2 < n2; ++i2)
        for (int i1 = 0; i1 < n1; ++i1) {
            const std::size_t mode = static_cast<std::size_t>(i2) * n1 + i1;
            const int f1 = Fft2::freq(i1, n1), f2 = Fft2::freq(i2, n2);
            const bool nyquist = (n1 % 2 == 0 && 2 * f1 == n1) || (n2 % 2 == 0 && 2 * f2 == n2);
            if ((f1 == 0 && f2 == 0) || nyquist) {
                for (int i3 = 0; i3 < n3; ++i3)
                    for (int c = 0; c < 3; ++c) S(i3, c, mode) = 0.0;
                continue;
            }
            const double k1 = 2.0 * pi * f1 / L1, k2 = 2.0 * pi * f2 / L2;
            const double k = std::hypot(k1, k2);
            const double decay = std::exp(-k * h);
            const double e0 = one_minus_exp(k * h) / k;
            const double e1 = one_minus_exp_linear(k * h) / (k * k);
            for (int i3 = 0; i3 < n3; ++i3)
                for (int c = 0; c < 3; ++c) col[i3][c] = S(i3, c, mode);

            // Tail contributions at the two ends.
            std::array<cplx, 3> lower{}, upper{};
            if (opt.tails == TailModel::harmonic) {
                const cplx b0 = col[0][2], bn = col[n3 - 1][2];
                lower = {cplx(0, k1 / k) * b0, cplx(0, k2 / k) * b0, b0};
                upper = {cplx(0, -k1 / k) * bn, cplx(0, -k2 / k) * bn, bn};
                for (int c = 0; c < 3; ++c) {
                    lower[c] /= 2.0 * k;
                    upper[c] /= 2.0 * k;
                }
            } else if (opt.tails == TailModel::constant) {
                for (int c = 0; c < 3; ++c) {
                    lower[c] = col[0][c] / k;
                    upper[c] = col[n3 - 1][c] / k;
                }
            }
            F[0] = lower;
            for (int j = 1; j < n3; ++j)
                for (int c = 0; c < 3; ++c)
                    F[j][c] = decay * F[j - 1][c] + col[j][c] * e0 - (col[j][c] - col[j - 1][c]) / h * e1;
            G[n3 - 1] = upper;
            for (int j = n3 - 2; j >= 0; --j)
                for (int c = 0; c < 3; ++c)
                    G[j][c] = decay * G[j + 1][c] + col[j][c] * e0 + (col[j + 1][c] - col[j][c]) / h * e1;

            const cplx ik1(0.0, k1), ik2(0.0, k2);
            for (int j = 0; j < n3; ++j) {
                std::array<cplx, 3> psi, dpsi;
                for (int c = 0; c < 3; ++c) {
                    psi[c] = (F[j][c] + G[j][c]) / (2.0 * k);
                    dpsi[c] = (G[j][c] - F[j][c]) / 2.0;
                }
                S(j, 0, mode) = ik2 * psi[2] - dpsi[1];
                S(j, 1, mode) = dpsi[0] - ik1 * psi[2];
                S(j, 2, mode) = ik1 * psi[1] - ik2 * psi[0];
            }
        }

    GridField A(spec, 3);
    A.linear_gauge_b = b_ext;
    double int1 = 0.0, int2 = 0.0;
    for (int i3 = 0; i3 < n3; ++i3) {
        if (i3 > 0) {
            int1 += 0.5 * h * (mean1[i3] + mean1[i3 - 1]);
            int2 += 0.5 * h * (mean2[i3] + mean2[i3 - 1]);
        }
        const double shift[3] = {int2, -int1, 0.0};
        for (int c = 0; c < 3; ++c) {
            const cplx* src = &S(i3, c, 0);
            std::copy(src, src + plane, buf.begin());
            fft.backward();
            for (int i2 = 0; i2 < n2; ++i2)
                for (int i1 = 0; i1 < n1; ++i1)
                    A(i1, i2, i3, c) = buf[static_cast<std::size_t>(i2) * n1 + i1].real() + shift[c];
        }
    }
    return A;
}

double curl_residual(const GridField& A, const GridField& B) {
    require_vector_grid(A, "A");
    require_vector_grid(B, "B");
    if (A.spec().dims != B.spec().dims) throw DimMismatch("A and B grids differ");
    const auto& d = A.spec().dims;
    double num = 0.0, den = 0.0;
    for (int i3 = 0; i3 < d[2]; ++i3)
        for (int i2 = 0; i2 < d[1]; ++i2)
            for (int i1 = 0; i1 < d[0]; ++i1) {
                auto D = [&](int axis, int c) { return derivative(A, axis, c, i1, i2, i3); };
                const double c1 = D(1, 2) - D(2, 1);
                const double c2 = D(2, 0) - D(0, 2);
                const double c3 = D(0, 1) - D(1, 0) + A.linear_gauge_b;
                const double b1 = B.full(i1, i2, i3, 0), b2 = B.full(i1, i2, i3, 1),
                             b3 = B.full(i1, i2, i3, 2);
                num += (c1 - b1) * (c1 - b1) + (c2 - b2) * (c2 - b2) + (c3 - b3) * (c3 - b3);
                den += b1 * b1 + b2 * b2 + b3 * b3;
            }
    return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

}  // namespace branching
