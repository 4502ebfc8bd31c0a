#pragma once

#include <array>
#include <vector>

#include "ptycho/forward.hpp"

namespace ptycho {

using Vec2 = std::array<double, 2>;

/// A (object, probe) estimate pair.
struct SolutionPair {
    ComplexImage object;
    ComplexImage probe;
};

/// g = c f, nu = mu / c.
SolutionPair scaling_pair(const ComplexImage& f, const ComplexImage& probe, double c);

/// nu(n) = mu(n) exp(-i a - i w.n), g(n) = f(n) exp(i b + i w.n), with
/// n = (col, row).
SolutionPair affine_phase_pair(const ComplexImage& f, const ComplexImage& probe, double a, double b, Vec2 w);

/// Block-scale arithmetic progression: probe blocks get exp(-i r.(k,l)),
/// object blocks exp(i theta00) exp(i r.(k,l)). r must lie on the 2 pi/q lattice.
/// Over-shifted rasters (tau > m/2) use the 3x3 block scheme with psi = 0.
SolutionPair progression_pair(const ComplexImage& f, const ComplexImage& probe, const ScanPattern& pattern,
                              double theta00, Vec2 r);

/// Raster grid pathology: the tau x tau phase block psi imprinted on every
/// probe block (positively) and object block (negatively), on top of the
/// progression. Dispatches to the over-shift construction when tau > m/2.
SolutionPair pathology_pair(const ComplexImage& f, const ComplexImage& probe, const ScanPattern& pattern,
                            const RealImage& psi, double theta00, Vec2 r);

/// Over-shift case m/2 < tau < m on the 3x3 unequal block partition.
SolutionPair pathology_pair_overshift(const ComplexImage& f, const ComplexImage& probe,
                                      const ScanPattern& pattern, const RealImage& psi, double theta00, Vec2 r);

struct BlockPhase {
    int k = 0;
    int l = 0;
    Shift t;
    double theta = 0.0;  ///< in (-pi, pi]
};

struct BlockPhaseProfile {
    std::vector<BlockPhase> phases;
    double max_spread = 0.0;  ///< worst per-shift phase spread (rad)
    bool fitted = false;
    double theta00 = 0.0;
    Vec2 r{0.0, 0.0};
    double residual = 0.0;
};

/// The pair is not related by one constant phase per shift.
class BlockPhaseViolation : public Error {
public:
    BlockPhaseViolation(const std::string& what, Shift t, double spread)
        : Error(what), shift(t), spread(spread) {}
    Shift shift;
    double spread;
};

inline constexpr double kDefaultPhaseTolerance = 1e-8;

/// Per-shift phase of (nu^t g^t)/(mu^t f^t) as a circular mean. Pixels with
/// |mu^t f^t| < 1e-12 * max are skipped. Throws BlockPhaseViolation when
/// a shift's phase spread or modulus deviation exceeds tol_phase.
BlockPhaseProfile extract_block_phases(const ComplexImage& f, const ComplexImage& probe, const ComplexImage& g,
                                       const ComplexImage& nu, const GridGeometry& geom,
                                       const ScanPattern& pattern, double tol_phase = kDefaultPhaseTolerance);

struct AffineFit {
    double theta00 = 0.0;
    Vec2 r{0.0, 0.0};  ///< per lattice step for raster, per pixel otherwise
    double residual = 0.0;
};

/// Fits theta_t = theta00 + r.x_t with x_t = (k,l) for raster scans and
/// x_t = t for perturbed scans. Slopes are searched on the 2 pi/q (raster)
/// or 2 pi/n (perturbed) lattice; non-periodic boundaries add a continuous
/// refinement. Residual is the largest circular deviation.
AffineFit fit_affine_profile(const BlockPhaseProfile& profile, const ScanPattern& pattern, bool periodic = true);

/// Same fit, stored into the profile.
void fit_affine_profile_inplace(BlockPhaseProfile& profile, const ScanPattern& pattern, bool periodic = true);

/// max over shifts and pixels of ||B_g| - |B_f|| / (max |B_f| + 1e-300).
double verify_same_data(const ComplexImage& f, const ComplexImage& probe, const ComplexImage& g,
                        const ComplexImage& nu, const GridGeometry& geom, const ScanPattern& pattern, int os);

/// h = ln g - ln f with Im h wrapped to (-pi, pi].
ComplexImage log_ratio_field(const ComplexImage& f, const ComplexImage& g);

struct RampFit {
    Complex h0;              ///< intercept: mean Re h + i phase at the origin
    Vec2 r{0.0, 0.0};        ///< phase slope (rad/pixel) along (col, row)
    double phase_residual = 0.0;
    double modulus_residual = 0.0;
    double residual = 0.0;   ///< max of the two
};

/// Affine fit of Im h and constancy check of Re h.
RampFit ramp_fit(const ComplexImage& h);

} // namespace ptycho
