#include "ptycho/kernels.hpp"

#include <algorithm>

#include "ptycho/fft.hpp"

namespace ptycho::kernels {

namespace {

void check_layout(const FrameLayout& l, std::size_t unknowns)
{
    const std::size_t mm = static_cast<std::size_t>(l.m) * l.m;
    if (l.index.size() != mm * l.masks.size()) throw Error("frame layout: index table size mismatch");
    for (const auto& mk : l.masks) {
        if (mk.rows() != l.m || mk.cols() != l.m) throw Error("frame layout: mask is not m x m");
    }
    for (int i : l.index) {
        if (i < 0 || static_cast<std::size_t>(i) >= unknowns) throw Error("frame layout: index out of range");
    }
}

// Fills `pad` with the zero-padded masked window of frame s and transforms it.
void forward_one(const FrameLayout& l, std::span<const Complex> x, int s, std::vector<Complex>& pad,
                 std::span<Complex> out)
{
    const int m = l.m;
    const int side = l.side();
    std::fill(pad.begin(), pad.end(), Complex{});
    const int* idx = l.index.data() + static_cast<std::size_t>(s) * m * m;
    const ComplexImage& mask = l.masks[s];
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            const int p = r * m + c;
            pad[static_cast<std::size_t>(r) * side + c] = mask[p] * x[idx[p]];
        }
    }
    fft_plan(side).forward(pad.data(), out.data());
}

// Cropped inverse transform of frame s times conj(mask), written to contrib (m*m).
void adjoint_one(const FrameLayout& l, const FrameStack& y, int s, std::vector<Complex>& work,
                 Complex* contrib)
{
    const int m = l.m;
    const int side = l.side();
    fft_plan(side).backward(y.frame(s).data(), work.data());
    const ComplexImage& mask = l.masks[s];
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            const int p = r * m + c;
            contrib[p] = std::conj(mask[p]) * work[static_cast<std::size_t>(r) * side + c];
        }
    }
}

void scatter_all(const FrameLayout& l, const std::vector<Complex>& contrib, std::span<Complex> x)
{
    std::fill(x.begin(), x.end(), Complex{});
    for (std::size_t i = 0; i < contrib.size(); ++i) x[l.index[i]] += contrib[i];
}

void prepare_output(const FrameLayout& l, FrameStack& out)
{
    if (out.count() != l.count() || out.side() != l.side()) out = FrameStack(l.count(), l.side());
}

} // namespace

void forward_frames_serial(const FrameLayout& l, std::span<const Complex> x, FrameStack& out)
{
    check_layout(l, x.size());
    prepare_output(l, out);
    std::vector<Complex> pad(static_cast<std::size_t>(l.side()) * l.side());
    for (int s = 0; s < l.count(); ++s) forward_one(l, x, s, pad, out.frame(s));
}

void forward_frames_parallel(const FrameLayout& l, std::span<const Complex> x, FrameStack& out)
{
    check_layout(l, x.size());
    prepare_output(l, out);
    const int count = l.count();
#pragma omp parallel
    {
        std::vector<Complex> pad(static_cast<std::size_t>(l.side()) * l.side());
#pragma omp for schedule(static)
        for (int s = 0; s < count; ++s) forward_one(l, x, s, pad, out.frame(s));
    }
}

void adjoint_frames_serial(const FrameLayout& l, const FrameStack& y, std::span<Complex> x)
{
    check_layout(l, x.size());
    if (y.count() != l.count() || y.side() != l.side()) throw Error("adjoint: frame stack shape mismatch");
    const std::size_t mm = static_cast<std::size_t>(l.m) * l.m;
    std::vector<Complex> contrib(mm * l.count());
    std::vector<Complex> work(y.frame_size());
    for (int s = 0; s < l.count(); ++s) adjoint_one(l, y, s, work, contrib.data() + s * mm);
    scatter_all(l, contrib, x);
}

void adjoint_frames_parallel(const FrameLayout& l, const FrameStack& y, std::span<Complex> x)
{
    check_layout(l, x.size());
    if (y.count() != l.count() || y.side() != l.side()) throw Error("adjoint: frame stack shape mismatch");
    const std::size_t mm = static_cast<std::size_t>(l.m) * l.m;
    std::vector<Complex> contrib(mm * l.count());
    const int count = l.count();
#pragma omp parallel
    {
        std::vector<Complex> work(y.frame_size());
#pragma omp for schedule(static)
        for (int s = 0; s < count; ++s) adjoint_one(l, y, s, work, contrib.data() + s * mm);
    }
    // Ordered scatter keeps the sum independent of the thread count.
    scatter_all(l, contrib, x);
}

namespace {

void magnitude_one(const ComplexImage& psi, int os, std::vector<Complex>& pad, std::vector<Complex>& spectrum,
                   RealImage& out)
{
    const int m = psi.rows();
    const int side = os * m;
    std::fill(pad.begin(), pad.end(), Complex{});
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) pad[static_cast<std::size_t>(r) * side + c] = psi(r, c);
    }
    fft_plan(side).forward(pad.data(), spectrum.data());
    out = RealImage(side, side);
    for (std::size_t i = 0; i < spectrum.size(); ++i) out[i] = std::abs(spectrum[i]);
}

void check_frames(const std::vector<ComplexImage>& psi, int os)
{
    if (os < 1) throw Error("oversampling factor must be >= 1");
    for (const auto& p : psi) {
        if (p.rows() != p.cols()) throw Error("exit wave must be square");
    }
}

} // namespace

void magnitudes_serial(const std::vector<ComplexImage>& psi, int os, std::vector<RealImage>& out)
{
    check_frames(psi, os);
    out.resize(psi.size());
    for (std::size_t s = 0; s < psi.size(); ++s) {
        const std::size_t side = static_cast<std::size_t>(os) * psi[s].rows();
        std::vector<Complex> pad(side * side), spectrum(side * side);
        magnitude_one(psi[s], os, pad, spectrum, out[s]);
    }
}

void magnitudes_parallel(const std::vector<ComplexImage>& psi, int os, std::vector<RealImage>& out)
{
    check_frames(psi, os);
    out.resize(psi.size());
    const int count = static_cast<int>(psi.size());
    // Plans are created up front; only execution happens inside the region.
    for (const auto& p : psi) fft_plan(os * p.rows());
#pragma omp parallel
    {
        std::vector<Complex> pad, spectrum;
#pragma omp for schedule(static)
        for (int s = 0; s < count; ++s) {
            const std::size_t side = static_cast<std::size_t>(os) * psi[s].rows();
            pad.resize(side * side);
            spectrum.resize(side * side);
            magnitude_one(psi[s], os, pad, spectrum, out[s]);
        }
    }
}

} // namespace ptycho::kernels
