#include "ptycho/forward.hpp"

#include <cmath>
#include <string>

#include "ptycho/fft.hpp"

namespace ptycho {

std::vector<Shift> DiffractionSet::shifts() const
{
    std::vector<Shift> out;
    out.reserve(frames.size());
    for (const auto& fr : frames) out.push_back(fr.t);
    return out;
}

double DiffractionSet::norm() const
{
    double s = 0.0;
    for (const auto& fr : frames) {
        for (double v : fr.magnitude) s += v * v;
    }
    return std::sqrt(s);
}

ComplexImage exit_wave(const ComplexImage& f, const ComplexImage& probe, const GridGeometry& geom, Shift t)
{
    if (probe.rows() != geom.m() || probe.cols() != geom.m()) {
        throw Error("exit_wave: probe is not " + std::to_string(geom.m()) + "x" + std::to_string(geom.m()));
    }
    ComplexImage psi = restrict_to_window(f, geom, t);
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= probe[i];
    return psi;
}

ComplexImage padded_dft(const ComplexImage& psi, int os)
{
    if (os < 1) throw Error("padded_dft: oversampling factor must be >= 1");
    if (psi.rows() != psi.cols()) throw Error("padded_dft: input must be square");
    const int m = psi.rows();
    const int side = os * m;
    ComplexImage pad(side, side);
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) pad(r, c) = psi(r, c);
    }
    ComplexImage out(side, side);
    fft_plan(side).forward(pad.data(), out.data());
    return out;
}

RealImage dft_magnitude(const ComplexImage& psi, int os)
{
    const ComplexImage spectrum = padded_dft(psi, os);
    RealImage out(spectrum.rows(), spectrum.cols());
    for (std::size_t i = 0; i < spectrum.size(); ++i) out[i] = std::abs(spectrum[i]);
    return out;
}

RealImage dft_magnitude_oracle(const ComplexImage& psi, int os)
{
    if (os < 1) throw Error("dft_magnitude_oracle: oversampling factor must be >= 1");
    if (psi.rows() != psi.cols()) throw Error("dft_magnitude_oracle: input must be square");
    const int m = psi.rows();
    const int side = os * m;
    RealImage out(side, side);
    for (int u = 0; u < side; ++u) {
        for (int v = 0; v < side; ++v) {
            Complex acc{};
            for (int r = 0; r < m; ++r) {
                for (int c = 0; c < m; ++c) {
                    // Reduce the phase index exactly before converting to an angle.
                    const long idx = (static_cast<long>(u) * r + static_cast<long>(v) * c) % side;
                    const double ang = -kTwoPi * static_cast<double>(idx) / side;
                    acc += psi(r, c) * Complex(std::cos(ang), std::sin(ang));
                }
            }
            out(u, v) = std::abs(acc);
        }
    }
    return out;
}

DiffractionSet measure(const ComplexImage& f, const ComplexImage& probe, const GridGeometry& geom,
                       const ScanPattern& pattern, int os, Exec exec)
{
    return measure(f, probe, geom, pattern.positions(), os, exec);
}

DiffractionSet measure(const ComplexImage& f, const ComplexImage& probe, const GridGeometry& geom,
                       const std::vector<ScanPosition>& positions, int os, Exec exec)
{
    if (os < 1) throw Error("measure: oversampling factor must be >= 1");
    std::vector<ComplexImage> psi;
    psi.reserve(positions.size());
    for (const auto& p : positions) psi.push_back(exit_wave(f, probe, geom, p.t));

    std::vector<RealImage> mags;
    if (exec == Exec::serial) {
        kernels::magnitudes_serial(psi, os, mags);
    } else {
        kernels::magnitudes_parallel(psi, os, mags);
    }

    DiffractionSet data;
    data.os = os;
    data.m = geom.m();
    data.frames.reserve(positions.size());
    for (std::size_t s = 0; s < positions.size(); ++s) {
        data.frames.push_back({positions[s].k, positions[s].l, positions[s].t, std::move(mags[s])});
    }
    return data;
}

} // namespace ptycho
