#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ptycho/forward.hpp"
#include "ptycho/kernels.hpp"
#include "ptycho/metrics.hpp"

namespace ptycho {

/// Pixel domain the reconstruction works on. Under periodic boundary it is
/// Z_n^2 itself; under dark/bright boundary it is the smallest square
/// containing Z_n^2 and every window, with the pixels outside Z_n^2 marked
/// exterior.
class ReconCanvas {
public:
    ReconCanvas(const GridGeometry& geom, const std::vector<Shift>& shifts);

    const GridGeometry& geometry() const { return geom_; }
    int side() const { return side_; }
    /// Object coordinate of canvas pixel (0,0).
    Shift origin() const { return origin_; }
    bool exterior(int idx) const { return exterior_[idx] != 0; }
    std::vector<int> exterior_indices() const;

    /// Canvas indices of the m*m window at shift t (row-major local order).
    std::vector<int> window_index(Shift t) const;
    /// Object on Z_n^2 placed on the canvas; exterior pixels take the boundary value.
    ComplexImage embed(const ComplexImage& f) const;
    /// The Z_n^2 part of a canvas image.
    ComplexImage interior(const ComplexImage& canvas) const;

private:
    GridGeometry geom_;
    int side_ = 0;
    Shift origin_;
    std::vector<char> exterior_;
};

/// Linear map x -> stacked oversampled DFTs of mask_s .* x|window_s with its
/// adjoint and the diagonal pseudo-inverse (A*A is diagonal: M^2 * W where
/// W(x) = sum_s |mask_s|^2 over the windows containing x).
class FrameOperator {
public:
    struct Options {
        double pinv_guard = 1e-8;   ///< relative weight below which a pixel counts as unlit
        Complex unlit_value{};      ///< value given to unlit pixels by pinv()
        /// Pixels pinned to a value after every pinv(); makes project() the
        /// orthogonal projection onto the pinned affine range.
        std::vector<std::pair<int, Complex>> fixed;
        Exec exec = Exec::parallel;
    };

    FrameOperator(kernels::FrameLayout layout, int unknown_rows, int unknown_cols, Options opts);

    int unknown_rows() const { return rows_; }
    int unknown_cols() const { return cols_; }
    int frame_count() const { return layout_.count(); }
    int frame_side() const { return layout_.side(); }
    const RealImage& weights() const { return weights_; }
    const kernels::FrameLayout& layout() const { return layout_; }

    FrameStack apply(const ComplexImage& x) const;
    ComplexImage adjoint(const FrameStack& y) const;
    ComplexImage pinv(const FrameStack& y) const;
    FrameStack project(const FrameStack& y) const { return apply(pinv(y)); }

private:
    kernels::FrameLayout layout_;
    int rows_;
    int cols_;
    Options opts_;
    RealImage weights_;
    double weight_floor_ = 0.0;
};

/// Object-side operator A (probe fixed) over the canvas. With `enforce`,
/// exterior canvas pixels are pinned to the boundary value.
FrameOperator object_operator(const ReconCanvas& canvas, const ComplexImage& probe, const std::vector<Shift>& shifts,
                              int os, double pinv_guard, bool enforce, Exec exec = Exec::parallel);

/// Probe-side operator B (canvas object fixed).
FrameOperator probe_operator(const ReconCanvas& canvas, const ComplexImage& canvas_object,
                             const std::vector<Shift>& shifts, int os, double pinv_guard, Exec exec = Exec::parallel);

/// A g for an n x n object under the geometry's boundary rule.
FrameStack apply_A(const ComplexImage& probe, const ComplexImage& g, const GridGeometry& geom,
                   const ScanPattern& pattern, int os);
/// A^dagger u as an n x n object. Throws if the probe is identically zero.
ComplexImage apply_A_pinv(const ComplexImage& probe, const FrameStack& u, const GridGeometry& geom,
                          const ScanPattern& pattern, int os, double pinv_guard = 1e-8);

/// Measured magnitudes in FrameStack layout, one frame per shift.
std::vector<double> stacked_magnitudes(const DiffractionSet& data);

struct DrResult {
    FrameStack u;
    ComplexImage estimate;           ///< A^dagger u
    std::vector<double> objective;   ///< 0.5 || |P u| - b ||^2 before each update
};

/// Douglas-Rachford iterations u <- u/2 + b .* sgn((2P - I) u) / 2 with
/// P = A A^dagger and sgn(0) = 1.
DrResult dr_inner(const std::vector<double>& b, const FrameOperator& op, FrameStack u_init, int iters);

enum class ProbeInitMode { aligned_random, given };

/// aligned_random: truth(n) exp(i phi(n)) with phi uniform on
/// (-pi/2 + margin, pi/2 - margin), so Re[conj(init) truth] > 0 pixelwise.
/// Zero truth pixels get a unit-modulus random phase and a warning on stderr.
ComplexImage init_probe(const ComplexImage& truth, std::uint64_t seed, ProbeInitMode mode, double margin = 0.05);

/// First-epoch object-side starting point: A_1 applied to the all-ones
/// object, or the projection P_1 of the data with zero phase.
enum class ObjectSeed { ones, data };

struct ReconConfig {
    int max_epochs = 200;
    int inner_iters = 30;
    double tol_data = 1e-12;        ///< stop once the data residual drops below this
    bool enforce_boundary = true;
    std::uint64_t seed = 0;
    double pinv_guard = 1e-8;
    int stagnation_window = 5;
    double stagnation_tol = 1e-10;
    int re_window = 0;              ///< RE slope search bound; 0: n/2
    ObjectSeed object_seed = ObjectSeed::ones;
    Exec exec = Exec::parallel;
};

struct EpochRecord {
    int epoch = 0;
    double data_residual = 0.0;
    double re_object = -1.0;        ///< negative when no truth was supplied
    double re_probe = -1.0;
    double wall_ms = 0.0;
};

enum class StopReason { tolerance, stagnation, max_epochs };
const char* to_string(StopReason r);

struct ReconState {
    ComplexImage f_est;             ///< n x n
    ComplexImage f_canvas;          ///< full reconstruction domain
    ComplexImage probe_est;
    FrameStack u, v;
    std::vector<EpochRecord> history;
    StopReason stop = StopReason::max_epochs;
    REResult last_re_object;
    REResult last_re_probe;
};

struct ReconExtras {
    std::optional<ComplexImage> object_init;   ///< overrides ReconConfig::object_seed
    std::optional<ComplexImage> object_truth;  ///< enables RE_object in the history
    std::optional<ComplexImage> probe_truth;   ///< enables RE_probe in the history
    std::function<void(const EpochRecord&)> on_epoch;
};

/// Alternating minimization: DR on the object with the probe fixed, then DR
/// on the probe with the object fixed, once per epoch. Shifts and os come from b.
ReconState am_reconstruct(const DiffractionSet& b, const GridGeometry& geom, const ComplexImage& probe_init,
                          const ReconConfig& cfg, const ReconExtras& extras = {});

/// CSV header and rows: epoch,data_residual,RE_object,RE_probe,wall_ms.
std::string history_csv(const std::vector<EpochRecord>& history, bool include_wall_ms = true);

} // namespace ptycho
