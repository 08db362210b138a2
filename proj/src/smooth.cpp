#include <algorithm>
#include <cmath>

#include "branching/branch.hpp"
#include "branching/quadrature.hpp"
#include "fft.hpp"

namespace branching {

namespace {

// Mode table on [-K1, K1] x [-K2, K2], x1 index fastest.
struct ModeTable {
    int K1 = 0, K2 = 0;
    std::size_t size() const { return static_cast<std::size_t>(2 * K1 + 1) * (2 * K2 + 1); }
    std::size_t index(int n1, int n2) const {
        return static_cast<std::size_t>(n2 + K2) * (2 * K1 + 1) + (n1 + K1);
    }
};

// Adds the transforms of B3, B1, B2 of the pieces at height z (scaled by 1/L^2).
void accumulate_section(const SharpPattern& pat, double z, const ModeTable& m, double L,
                        std::vector<cplx>& b1, std::vector<cplx>& b2, std::vector<cplx>& b3) {
    const double c = pat.field_inside() / (L * L);
    std::vector<cplx> X(2 * m.K1 + 1), Xm(2 * m.K1 + 1), Y(2 * m.K2 + 1), Ym(2 * m.K2 + 1);
    for (const SectionPiece& piece : section(pat, z)) {
        const TubeSegment& seg = pat.segments[piece.segment];
        const Rect& r = piece.rect;
        const double t = seg.height();
        const Vec2 d = seg.drift();
        const double a1 = d.x / t, a2 = d.y / t, beta = seg.lambda() / t;
        for (int n = -m.K1; n <= m.K1; ++n) {
            const double k = 2.0 * pi * n / L;
            X[n + m.K1] = interval_transform(k, r.x0(), r.x1());
            Xm[n + m.K1] = interval_moment_transform(k, r.x0(), r.x1());
        }
        for (int n = -m.K2; n <= m.K2; ++n) {
            const double k = 2.0 * pi * n / L;
            Y[n + m.K2] = interval_transform(k, r.y0(), r.y1());
            Ym[n + m.K2] = interval_moment_transform(k, r.y0(), r.y1());
        }
        for (int n2 = -m.K2; n2 <= m.K2; ++n2)
            for (int n1 = -m.K1; n1 <= m.K1; ++n1) {
                const std::size_t i = m.index(n1, n2);
                const cplx xy = X[n1 + m.K1] * Y[n2 + m.K2];
                b3[i] += c * xy;
                b1[i] += c * (a1 * xy + beta * Xm[n1 + m.K1] * Y[n2 + m.K2]);
                b2[i] += c * (a2 * xy - beta * X[n1 + m.K1] * Ym[n2 + m.K2]);
            }
    }
}

// Integral over z' < 0 of the unit Gaussian kernel at z times exp(k z').
double below_weight(double z, double k, double w) {
    if (k == 0.0) return 0.5 * std::erfc(z / (std::sqrt(2.0) * w));
    return 0.5 * std::exp(-z * z / (2.0 * w * w)) * erfcx((z + k * w * w) / (std::sqrt(2.0) * w));
}

}  // namespace

GridField smoothed_field(const SharpPattern& pat, const GridSpec& spec, double width) {
    const double L = pat.params.L, T = pat.params.T;
    if (!spec.periodic[0] || !spec.periodic[1] || spec.periodic[2])
        throw DimMismatch("grid must be periodic in x1, x2 only");
    if (std::abs(spec.lo[0]) > 1e-12 * L || std::abs(spec.lo[1]) > 1e-12 * L ||
        std::abs(spec.hi[0] - L) > 1e-12 * L || std::abs(spec.hi[1] - L) > 1e-12 * L)
        throw DimMismatch("grid must span one lateral period [0, L)");
    if (!(width > 0.0)) throw ConstraintViolated("width > 0");
    const int n1 = spec.dims[0], n2 = spec.dims[1], n3 = spec.dims[2];

    const int K = static_cast<int>(std::ceil(8.6 * L / (2.0 * pi * width)));
    ModeTable modes{std::min(K, (n1 - 1) / 2), std::min(K, (n2 - 1) / 2)};
    const std::size_t nm = modes.size();

    // Quadrature in z' over the slab, with panels split at every segment end.
    std::vector<double> breaks{0.0, T};
    for (const TubeSegment& s : pat.segments) {
        breaks.push_back(s.z_bottom);
        breaks.push_back(s.z_top);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end(),
                             [&](double a, double b) { return std::abs(a - b) <= 1e-12 * T; }),
                 breaks.end());
    const QuadratureRule& rule = gauss_legendre(10);
    std::vector<double> zq, wq;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double u = breaks[i], v = breaks[i + 1];
        const int panels = std::max(1, static_cast<int>(std::ceil((v - u) / (0.25 * width))));
        const double len = (v - u) / panels;
        for (int p = 0; p < panels; ++p) {
            const double mid = u + (p + 0.5) * len;
            for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                zq.push_back(mid + 0.5 * len * rule.nodes[q]);
                wq.push_back(0.5 * len * rule.weights[q]);
            }
        }
    }
    std::vector<std::vector<cplx>> node_b1(zq.size()), node_b2(zq.size()), node_b3(zq.size());
    for (std::size_t q = 0; q < zq.size(); ++q) {
        node_b1[q].assign(nm, cplx{});
        node_b2[q].assign(nm, cplx{});
        node_b3[q].assign(nm, cplx{});
        if (!pat.empty()) accumulate_section(pat, zq[q], modes, L, node_b1[q], node_b2[q], node_b3[q]);
    }

    // Traces on the two faces; the exterior field is their harmonic extension.
    auto trace_at = [&](double z) {
        std::vector<cplx> g(nm);
        const auto rects = cross_section(pat, z);
        const double c = pat.field_inside() / (L * L);
        for (const Rect& r : rects)
            for (int n2 = -modes.K2; n2 <= modes.K2; ++n2) {
                const cplx y = interval_transform(2.0 * pi * n2 / L, r.y0(), r.y1());
                for (int n1 = -modes.K1; n1 <= modes.K1; ++n1)
                    g[modes.index(n1, n2)] += c * interval_transform(2.0 * pi * n1 / L, r.x0(), r.x1()) * y;
            }
        return g;
    };
    const auto g_bottom = trace_at(0.0);
    const auto g_top = trace_at(T);

    GridField B(spec, 3);
    detail::Fft2 fft(n1, n2);
    auto buf = fft.data();
    const double gauss_norm = 1.0 / (std::sqrt(2.0 * pi) * width);
    std::vector<cplx> acc1(nm), acc2(nm), acc3(nm);
    for (int i3 = 0; i3 < n3; ++i3) {
        const double z = spec.coord(2, i3);
        std::fill(acc1.begin(), acc1.end(), cplx{});
        std::fill(acc2.begin(), acc2.end(), cplx{});
        std::fill(acc3.begin(), acc3.end(), cplx{});
        for (std::size_t q = 0; q < zq.size(); ++q) {
            const double u = (z - zq[q]) / width;
            if (std::abs(u) > 9.0) continue;
            const double wgt = wq[q] * gauss_norm * std::exp(-0.5 * u * u);
            for (std::size_t i = 0; i < nm; ++i) {
                acc1[i] += wgt * node_b1[q][i];
                acc2[i] += wgt * node_b2[q][i];
                acc3[i] += wgt * node_b3[q][i];
            }
        }
        for (int n2 = -modes.K2; n2 <= modes.K2; ++n2)
            for (int n1 = -modes.K1; n1 <= modes.K1; ++n1) {
                const std::size_t i = modes.index(n1, n2);
                const double k1 = 2.0 * pi * n1 / L, k2 = 2.0 * pi * n2 / L;
                const double k = std::hypot(k1, k2);
                const double wb = below_weight(z, k, width), wt = below_weight(T - z, k, width);
                if (k == 0.0) {
                    acc3[i] += pat.params.b_ext * (wb + wt);
                } else {
                    const cplx gb = g_bottom[i] * wb, gt = g_top[i] * wt;
                    acc1[i] += cplx(0.0, k1 / k) * (gb - gt);
                    acc2[i] += cplx(0.0, k2 / k) * (gb - gt);
                    acc3[i] += gb + gt;
                }
                const double damp = std::exp(-0.5 * k * k * width * width);
                acc1[i] *= damp;
                acc2[i] *= damp;
                acc3[i] *= damp;
            }
        const std::vector<cplx>* comps[3] = {&acc1, &acc2, &acc3};
        for (int c = 0; c < 3; ++c) {
            std::fill(buf.begin(), buf.end(), cplx{});
            for (int m2 = -modes.K2; m2 <= modes.K2; ++m2)
                for (int m1 = -modes.K1; m1 <= modes.K1; ++m1)
                    buf[static_cast<std::size_t>((m2 + n2) % n2) * n1 + (m1 + n1) % n1] =
                        (*comps[c])[modes.index(m1, m2)];
            fft.backward();
            for (int i2 = 0; i2 < n2; ++i2)
                for (int i1 = 0; i1 < n1; ++i1)
                    B(i1, i2, i3, c) = buf[static_cast<std::size_t>(i2) * n1 + i1].real();
        }
    }
    return B;
}

}  // namespace branching
