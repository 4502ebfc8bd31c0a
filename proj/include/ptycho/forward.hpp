#pragma once

#include <vector>

#include "ptycho/grid.hpp"
#include "ptycho/kernels.hpp"
#include "ptycho/scan.hpp"

namespace ptycho {

/// Default oversampling factor: data frames are (2m) x (2m).
inline constexpr int kDefaultOversampling = 2;

struct DiffractionFrame {
    int k = 0;
    int l = 0;
    Shift t;
    RealImage magnitude;  ///< (os*m) x (os*m), row-major, nonnegative
};

/// Fourier magnitudes for every scan position.
struct DiffractionSet {
    int os = kDefaultOversampling;
    int m = 0;
    std::vector<DiffractionFrame> frames;

    int side() const { return os * m; }
    std::vector<Shift> shifts() const;
    /// Euclidean norm over all frames.
    double norm() const;
};

/// psi^t = probe .* restrict(f, t).
ComplexImage exit_wave(const ComplexImage& f, const ComplexImage& probe, const GridGeometry& geom, Shift t);

/// Zero-pads psi to (os*m)^2 and applies the unnormalized 2D DFT.
ComplexImage padded_dft(const ComplexImage& psi, int os);

/// Entrywise modulus of padded_dft(psi, os).
RealImage dft_magnitude(const ComplexImage& psi, int os);

/// Same contract as dft_magnitude by direct O(M^4) summation. Test oracle.
RealImage dft_magnitude_oracle(const ComplexImage& psi, int os);

/// Diffraction data of (f, probe) over the pattern.
DiffractionSet measure(const ComplexImage& f, const ComplexImage& probe, const GridGeometry& geom,
                       const ScanPattern& pattern, int os, Exec exec = Exec::parallel);
DiffractionSet measure(const ComplexImage& f, const ComplexImage& probe, const GridGeometry& geom,
                       const std::vector<ScanPosition>& positions, int os, Exec exec = Exec::parallel);

} // namespace ptycho
