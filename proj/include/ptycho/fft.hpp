#pragma once

#include "ptycho/array2d.hpp"

namespace ptycho {

/// Unnormalized square 2D DFT of a fixed side length, backed by FFTW.
/// Execution is thread-safe; plans are created once and shared.
class FftPlan2D {
public:
    explicit FftPlan2D(int side);
    ~FftPlan2D();
    FftPlan2D(const FftPlan2D&) = delete;
    FftPlan2D& operator=(const FftPlan2D&) = delete;

    int side() const { return side_; }

    /// out(k) = sum_x in(x) exp(-2 pi i k.x / side). Buffers must not alias.
    void forward(const Complex* in, Complex* out) const;
    /// out(x) = sum_k in(k) exp(+2 pi i k.x / side), no 1/side^2 factor.
    void backward(const Complex* in, Complex* out) const;

private:
    int side_;
    void* fwd_ = nullptr;
    void* bwd_ = nullptr;
};

/// Process-wide plan for the given side.
const FftPlan2D& fft_plan(int side);

} // namespace ptycho
