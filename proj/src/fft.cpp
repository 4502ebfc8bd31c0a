#include "ptycho/fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace ptycho {

namespace {

std::mutex& planner_mutex()
{
    static std::mutex mu;
    return mu;
}

fftw_complex* as_fftw(const Complex* p)
{
    return reinterpret_cast<fftw_complex*>(const_cast<Complex*>(p));
}

} // namespace

FftPlan2D::FftPlan2D(int side)
    : side_(side)
{
    if (side <= 0) throw Error("FftPlan2D: side must be positive");
    std::vector<Complex> a(static_cast<std::size_t>(side) * side);
    std::vector<Complex> b(a.size());
    // FFTW_UNALIGNED keeps the chosen codelets independent of buffer alignment,
    // so new-array execution gives identical results for every buffer.
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::lock_guard lock(planner_mutex());
    fwd_ = fftw_plan_dft_2d(side, side, as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD, flags);
    bwd_ = fftw_plan_dft_2d(side, side, as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD, flags);
    if (!fwd_ || !bwd_) throw Error("FftPlan2D: FFTW planning failed");
}

FftPlan2D::~FftPlan2D()
{
    std::lock_guard lock(planner_mutex());
    if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    if (bwd_) fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

void FftPlan2D::forward(const Complex* in, Complex* out) const
{
    fftw_execute_dft(static_cast<fftw_plan>(fwd_), as_fftw(in), as_fftw(out));
}

void FftPlan2D::backward(const Complex* in, Complex* out) const
{
    fftw_execute_dft(static_cast<fftw_plan>(bwd_), as_fftw(in), as_fftw(out));
}

const FftPlan2D& fft_plan(int side)
{
    static std::mutex mu;
    static std::map<int, std::unique_ptr<FftPlan2D>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[side];
    if (!slot) slot = std::make_unique<FftPlan2D>(side);
    return *slot;
}

} // namespace ptycho
