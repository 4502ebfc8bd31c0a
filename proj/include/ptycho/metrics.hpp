#pragma once

#include "ptycho/ambiguity.hpp"
#include "ptycho/forward.hpp"

namespace ptycho {

/// Relative error with the scaling and linear-phase ambiguities discounted.
struct REResult {
    double value = 0.0;
    Complex best_alpha{1.0, 0.0};
    Vec2 best_r{0.0, 0.0};  ///< in cycles over the reference size
    int search_window = 0;
};

/// min over alpha and slope r of
///   || truth - alpha exp(-2 pi i (r1 col + r2 row)/N) est || / ||truth||
/// with integer r in [-window, window]^2 and N the image side. `refine`
/// adds a continuous local search around the best integer slope.
REResult relative_error(const ComplexImage& truth, const ComplexImage& est, int window, bool refine = false);

/// Probe version: same modulation, with N = reference_size (the object side
/// n) so that slopes are directly comparable with the object's. For an
/// affine-phase pair, the probe's best r is the negative of the object's.
REResult probe_relative_error(const ComplexImage& truth, const ComplexImage& est, int window, int reference_size,
                              bool refine = false);

/// || |A(f,mu)| - b || / ||b|| over all frames of b.
double data_residual(const DiffractionSet& b, const ComplexImage& f_est, const ComplexImage& probe_est,
                     const GridGeometry& geom, Exec exec = Exec::parallel);

} // namespace ptycho
