#pragma once

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <span>

namespace branching::detail {

// In-place 2D complex transform of an n2 x n1 array (x1 fastest). Plans are
// created under a global lock because the FFTW planner is not re-entrant.
class Fft2 {
public:
    Fft2(int n1, int n2) : n1_(n1), n2_(n2) {
        buf_ = reinterpret_cast<std::complex<double>*>(
            fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(n1) * n2));
        std::lock_guard lock(planner_mutex());
        auto* raw = reinterpret_cast<fftw_complex*>(buf_);
        forward_ = fftw_plan_dft_2d(n2, n1, raw, raw, FFTW_FORWARD, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_2d(n2, n1, raw, raw, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~Fft2() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
        fftw_free(buf_);
    }
    Fft2(const Fft2&) = delete;
    Fft2& operator=(const Fft2&) = delete;

    std::span<std::complex<double>> data() {
        return {buf_, static_cast<std::size_t>(n1_) * n2_};
    }
    // Unnormalised exp(-i k x) sum.
    void forward() { fftw_execute(forward_); }
    // Unnormalised exp(+i k x) sum.
    void backward() { fftw_execute(backward_); }

    int n1() const { return n1_; }
    int n2() const { return n2_; }

    // Signed frequency index of FFT bin i for length n.
    static int freq(int i, int n) { return i <= n / 2 ? i : i - n; }

private:
    static std::mutex& planner_mutex() {
        static std::mutex m;
        return m;
    }

    int n1_, n2_;
    std::complex<double>* buf_ = nullptr;
    fftw_plan forward_{};
    fftw_plan backward_{};
};

}  // namespace branching::detail
