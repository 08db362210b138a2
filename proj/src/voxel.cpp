#include <algorithm>
#include <cmath>
#include <limits>

#include "branching/branch.hpp"

namespace branching {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas: out[p] = min_q (h (p - q))^2 + f[q].
void distance_1d(const std::vector<double>& f, double h, std::vector<double>& out) {
    const int n = static_cast<int>(f.size());
    std::vector<int> v;
    std::vector<double> zs;
    v.reserve(n);
    zs.reserve(n + 1);
    for (int q = 0; q < n; ++q) {
        if (f[q] == inf) continue;
        const double xq = h * q;
        while (!v.empty()) {
            const int r = v.back();
            const double xr = h * r;
            const double s = ((f[q] + xq * xq) - (f[r] + xr * xr)) / (2.0 * (xq - xr));
            if (s <= zs.back()) {
                v.pop_back();
                zs.pop_back();
            } else {
                zs.push_back(s);
                break;
            }
        }
        if (v.empty()) zs.assign(1, -inf);
        v.push_back(q);
    }
    out.assign(n, inf);
    if (v.empty()) return;
    zs.push_back(inf);
    std::size_t k = 0;
    for (int p = 0; p < n; ++p) {
        const double x = h * p;
        while (zs[k + 1] < x) ++k;
        const double dx = x - h * v[k];
        out[p] = dx * dx + f[v[k]];
    }
}

void transform_axis(std::vector<double>& d, const std::array<int, 3>& dims, int axis, double h,
                    bool periodic) {
    const int n = dims[axis];
    const std::size_t stride = axis == 0 ? 1 : axis == 1 ? dims[0] : static_cast<std::size_t>(dims[0]) * dims[1];
    const int o1 = axis == 0 ? 1 : 0, o2 = axis == 2 ? 1 : 2;
    std::vector<double> line, result;
    const int ext = periodic ? n : 0;
    for (int b = 0; b < dims[o2]; ++b)
        for (int a = 0; a < dims[o1]; ++a) {
            int idx[3] = {0, 0, 0};
            idx[o1] = a;
            idx[o2] = b;
            const std::size_t base = (static_cast<std::size_t>(idx[2]) * dims[1] + idx[1]) * dims[0] + idx[0];
            line.resize(static_cast<std::size_t>(n + 2 * ext));
            for (int i = -ext; i < n + ext; ++i) line[i + ext] = d[base + ((i % n + n) % n) * stride];
            distance_1d(line, h, result);
            for (int i = 0; i < n; ++i) d[base + i * stride] = result[i + ext];
        }
}

}  // namespace

Voxels voxelize(const SharpPattern& pat, std::array<int, 3> dims) {
    for (int n : dims)
        if (n < 1) throw DimMismatch("voxel dimensions must be positive");
    Voxels v;
    v.dims = dims;
    v.spacing = {pat.params.L / dims[0], pat.params.L / dims[1], pat.params.T / dims[2]};
    v.inside.assign(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2], 0);
    auto first_center = [](double x, double h) { return static_cast<int>(std::ceil(x / h - 0.5)); };
    for (int i3 = 0; i3 < dims[2]; ++i3) {
        const double z = (i3 + 0.5) * v.spacing[2];
        for (const Rect& r : cross_section(pat, z)) {
            const int a0 = std::max(0, first_center(r.x0(), v.spacing[0]));
            const int a1 = std::min(dims[0], first_center(r.x1(), v.spacing[0]));
            const int b0 = std::max(0, first_center(r.y0(), v.spacing[1]));
            const int b1 = std::min(dims[1], first_center(r.y1(), v.spacing[1]));
            for (int i2 = b0; i2 < b1; ++i2)
                for (int i1 = a0; i1 < a1; ++i1) v.inside[v.index(i1, i2, i3)] = 1;
        }
    }
    return v;
}

std::vector<double> distance_to_set(const Voxels& v) {
    std::vector<double> d(v.inside.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = v.inside[i] ? 0.0 : inf;
    transform_axis(d, v.dims, 0, v.spacing[0], true);
    transform_axis(d, v.dims, 1, v.spacing[1], true);
    transform_axis(d, v.dims, 2, v.spacing[2], false);
    for (double& x : d) x = std::sqrt(x);
    return d;
}

double neighborhood_excess(const SharpPattern& pat, double delta, int cells_per_delta,
                           std::size_t max_voxels) {
    if (!(delta > 0.0)) throw ConstraintViolated("delta > 0");
    if (pat.empty()) return 0.0;
    const double h = delta / cells_per_delta;
    const std::array<int, 3> dims{static_cast<int>(std::ceil(pat.params.L / h)),
                                  static_cast<int>(std::ceil(pat.params.L / h)),
                                  static_cast<int>(std::ceil(pat.params.T / h))};
    const double count = static_cast<double>(dims[0]) * dims[1] * dims[2];
    if (count > static_cast<double>(max_voxels))
        throw ResolutionTooCoarse("neighbourhood grid would need " + std::to_string(count) + " voxels");
    const Voxels v = voxelize(pat, dims);
    const auto d = distance_to_set(v);
    // Centre-to-centre distances overshoot the distance to the boundary by
    // about half a cell.
    const double half = 0.5 * std::max({v.spacing[0], v.spacing[1], v.spacing[2]});
    std::size_t n = 0;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (!v.inside[i] && d[i] - half < delta) ++n;
    return static_cast<double>(n) * v.cell_volume();
}

}  // namespace branching
