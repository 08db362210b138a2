#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "branching/core.hpp"

namespace branching {

using cplx = std::complex<double>;

// Periodic trace g on [0, L)^2 stored by its Fourier coefficients
// g_hat(n) = L^-2 * integral of g(x) exp(-i k.x), k = 2 pi n / L, |n_i| <= K.
class SpectralTrace {
public:
    SpectralTrace() = default;
    SpectralTrace(double L, int K);

    double period() const { return L_; }
    int cutoff() const { return K_; }

    cplx& at(int n1, int n2) { return coeffs_[index(n1, n2)]; }
    const cplx& at(int n1, int n2) const { return coeffs_[index(n1, n2)]; }
    double mean() const { return at(0, 0).real(); }

    // Forward transform of n x n nodal samples (row-major, x1 fastest).
    static SpectralTrace from_samples(std::span<const double> samples, int n, double L, int K);

    // Exact coefficients of sum_r amplitude_r * 1_r.
    static SpectralTrace from_rects(std::span<const Rect> rects, std::span<const double> amplitude,
                                    double L, int K);

    // Nodal values on an n x n grid (n > 2K), row-major with x1 fastest.
    std::vector<double> sample(int n) const;

private:
    std::size_t index(int n1, int n2) const {
        return static_cast<std::size_t>(n2 + K_) * static_cast<std::size_t>(2 * K_ + 1) +
               static_cast<std::size_t>(n1 + K_);
    }

    double L_ = 0.0;
    int K_ = 0;
    std::vector<cplx> coeffs_;
};

// integral over [x0, x1] of exp(-i k x).
cplx interval_transform(double k, double x0, double x1);
// integral over [x0, x1] of (x - x0) exp(-i k x).
cplx interval_moment_transform(double k, double x0, double x1);

// L^2 * sum_{k != 0} |g_hat|^2 / |k|: the squared homogeneous H^{-1/2} norm
// over one period, equal to the least field energy in a half space above the
// trace.
double hminus12_sq(const SpectralTrace& g);

// Same quantity for g = sum_r c_r 1_r, evaluated without truncation by
// splitting 1/|k| into a rapidly converging Fourier sum and a real-space
// heat-kernel sum. `split` <= 0 picks a length automatically.
double hminus12_sq_rects(std::span<const Rect> rects, std::span<const double> amplitude, double L,
                         double split = 0.0);

struct GridSpec {
    std::array<int, 3> dims{0, 0, 0};
    std::array<double, 3> lo{0, 0, 0};
    std::array<double, 3> hi{0, 0, 0};
    std::array<bool, 3> periodic{true, true, false};

    // Node spacing: (hi-lo)/n on periodic axes, (hi-lo)/(n-1) otherwise.
    double spacing(int axis) const;
    double coord(int axis, int i) const { return lo[axis] + spacing(axis) * i; }
    std::size_t nodes() const {
        return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    }
};

// Nodal vector or scalar field on a box, periodic in x1, x2. A field with a
// nonzero `linear_gauge_b` represents values + (b/2)(-x2, x1, 0).
class GridField {
public:
    GridField() = default;
    GridField(GridSpec spec, int ncomp);

    const GridSpec& spec() const { return spec_; }
    int ncomp() const { return ncomp_; }
    double linear_gauge_b = 0.0;

    std::size_t offset(int i1, int i2, int i3) const {
        return ((static_cast<std::size_t>(i3) * spec_.dims[1] + i2) * spec_.dims[0] + i1) * ncomp_;
    }
    double& operator()(int i1, int i2, int i3, int c) { return data_[offset(i1, i2, i3) + c]; }
    double operator()(int i1, int i2, int i3, int c) const { return data_[offset(i1, i2, i3) + c]; }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    // Full value including the linear gauge part.
    double full(int i1, int i2, int i3, int c) const;

    void save(const std::string& path) const;
    static GridField load(const std::string& path);

private:
    GridSpec spec_;
    int ncomp_ = 0;
    std::vector<double> data_;
};

// Field B = grad of the harmonic extension of g - mean below the trace plus
// the constant mean in B3, sampled on z in [-depth, 0].
GridField exterior_extension(const SpectralTrace& g, double depth, std::array<int, 3> dims);

enum class TailModel {
    harmonic,  // beyond the z ends the field decays like the harmonic extension of B3
    constant,  // beyond the z ends the field repeats the end-plane values
    zero
};

struct PotentialOptions {
    TailModel tails = TailModel::harmonic;
    double divergence_tol = 0.1;  // relative discrete divergence
    double flux_tol = 1e-6;       // relative drift of the section flux
};

// Vector potential A with curl A = B. The periodic part is stored in the
// grid; the part carrying the mean vertical flux is (b/2)(-x2, x1, 0).
GridField construct_vector_potential(const GridField& B, double b_ext,
                                     const PotentialOptions& opt = {});

// || curl_h A - B || / || B || with centred differences (second-order
// one-sided differences at the ends of non-periodic axes).
double curl_residual(const GridField& A, const GridField& B);

// || div_h B || / || grad_h B ||.
double relative_divergence(const GridField& B);

}  // namespace branching
