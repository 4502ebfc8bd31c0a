#pragma once

#include <span>
#include <vector>

#include "ptycho/array2d.hpp"

namespace ptycho {

/// Execution policy for the per-shift kernels. `serial` is the reference
/// path; `parallel` distributes shifts over OpenMP threads and must agree
/// with it bit for bit.
enum class Exec { serial, parallel };

/// A stack of equally sized square Fourier-domain frames, one per shift.
class FrameStack {
public:
    FrameStack() = default;
    FrameStack(int count, int side)
        : count_(count), side_(side), data_(static_cast<std::size_t>(count) * side * side) {}

    int count() const { return count_; }
    int side() const { return side_; }
    std::size_t frame_size() const { return static_cast<std::size_t>(side_) * side_; }

    std::span<Complex> frame(int s) { return {data_.data() + s * frame_size(), frame_size()}; }
    std::span<const Complex> frame(int s) const { return {data_.data() + s * frame_size(), frame_size()}; }

    std::vector<Complex>& raw() { return data_; }
    const std::vector<Complex>& raw() const { return data_; }

    bool same_shape(const FrameStack& o) const { return count_ == o.count_ && side_ == o.side_; }

private:
    int count_ = 0;
    int side_ = 0;
    std::vector<Complex> data_;
};

namespace kernels {

/// Per-frame gather/mask description of a bilinear ptychographic operator:
/// frame s sees pixels x[index[s*m*m + p]] weighted by masks[s][p].
struct FrameLayout {
    int m = 0;
    int os = 1;
    std::vector<int> index;            ///< count*m*m entries into the unknown
    std::vector<ComplexImage> masks;   ///< count masks, each m*m
    int count() const { return static_cast<int>(masks.size()); }
    int side() const { return os * m; }
};

/// y_s = DFT(zero-pad(mask_s .* x[index_s])), unnormalized.
void forward_frames_serial(const FrameLayout& layout, std::span<const Complex> x, FrameStack& out);
void forward_frames_parallel(const FrameLayout& layout, std::span<const Complex> x, FrameStack& out);

/// x = sum_s scatter(index_s, conj(mask_s) .* crop(IDFT(y_s))), unnormalized adjoint.
void adjoint_frames_serial(const FrameLayout& layout, const FrameStack& y, std::span<Complex> x);
void adjoint_frames_parallel(const FrameLayout& layout, const FrameStack& y, std::span<Complex> x);

/// Entrywise modulus of every frame of DFT(zero-pad(psi_s)).
void magnitudes_serial(const std::vector<ComplexImage>& psi, int os, std::vector<RealImage>& out);
void magnitudes_parallel(const std::vector<ComplexImage>& psi, int os, std::vector<RealImage>& out);

inline void forward_frames(Exec e, const FrameLayout& l, std::span<const Complex> x, FrameStack& out)
{
    e == Exec::serial ? forward_frames_serial(l, x, out) : forward_frames_parallel(l, x, out);
}

inline void adjoint_frames(Exec e, const FrameLayout& l, const FrameStack& y, std::span<Complex> x)
{
    e == Exec::serial ? adjoint_frames_serial(l, y, x) : adjoint_frames_parallel(l, y, x);
}

} // namespace kernels
} // namespace ptycho
