#include "ptycho/ambiguity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ptycho {

namespace {

Complex phasor(double a) { return {std::cos(a), std::sin(a)}; }

void check_square(const ComplexImage& x, const char* what)
{
    if (x.rows() != x.cols() || x.empty()) throw Error(std::string(what) + " must be a nonempty square image");
}

void check_lattice_slope(Vec2 r, int q)
{
    for (double ri : r) {
        const double steps = ri * q / kTwoPi;
        if (std::abs(steps - std::round(steps)) > 1e-9) {
            throw Error("block-phase slope " + std::to_string(ri) + " is not a multiple of 2 pi/q with q=" +
                        std::to_string(q));
        }
    }
}

struct RasterShape {
    int n, m, tau, q;
};

RasterShape raster_shape(const ComplexImage& f, const ComplexImage& probe, const ScanPattern& pattern)
{
    check_square(f, "object");
    check_square(probe, "probe");
    if (pattern.kind() != ScanKind::raster) throw Error("construction requires an unperturbed raster scan");
    if (f.rows() != pattern.n()) throw Error("object size does not match the scan pattern");
    if (probe.rows() > f.rows()) throw Error("probe larger than object");
    return {f.rows(), probe.rows(), pattern.tau(), pattern.q()};
}

void check_psi(const RealImage& psi, int tau)
{
    if (psi.rows() != tau || psi.cols() != tau) {
        throw Error("psi must be " + std::to_string(tau) + "x" + std::to_string(tau) + ", got " +
                    std::to_string(psi.rows()) + "x" + std::to_string(psi.cols()));
    }
}

// Object side shared by both schemes: cell (k,l) of the q x q partition of
// Z_n^2 gets exp(i theta00) exp(i r.(k,l)) exp(-i psi).
ComplexImage imprint_object(const ComplexImage& f, int q, const RealImage& psi, double theta00, Vec2 r)
{
    const auto part = BlockPartition::under_shift(f.rows(), q);
    auto blocks = partition(f, part);
    for (auto& [key, blk] : blocks) {
        const auto [k, l] = key;
        const Complex c = phasor(theta00 + r[0] * k + r[1] * l);
        for (int y = 0; y < blk.rows(); ++y) {
            for (int x = 0; x < blk.cols(); ++x) blk(y, x) *= c * phasor(-psi(y, x));
        }
    }
    return reassemble(blocks, part);
}

} // namespace

SolutionPair scaling_pair(const ComplexImage& f, const ComplexImage& probe, double c)
{
    if (!(c > 0.0) || !std::isfinite(c)) throw Error("scaling_pair: c must be positive, got " + std::to_string(c));
    SolutionPair out{f, probe};
    for (auto& v : out.object) v *= c;
    for (auto& v : out.probe) v /= c;
    return out;
}

SolutionPair affine_phase_pair(const ComplexImage& f, const ComplexImage& probe, double a, double b, Vec2 w)
{
    SolutionPair out{f, probe};
    for (int r = 0; r < f.rows(); ++r) {
        for (int c = 0; c < f.cols(); ++c) out.object(r, c) *= phasor(b + w[0] * c + w[1] * r);
    }
    for (int r = 0; r < probe.rows(); ++r) {
        for (int c = 0; c < probe.cols(); ++c) out.probe(r, c) *= phasor(-a - w[0] * c - w[1] * r);
    }
    return out;
}

SolutionPair progression_pair(const ComplexImage& f, const ComplexImage& probe, const ScanPattern& pattern,
                              double theta00, Vec2 r)
{
    const auto s = raster_shape(f, probe, pattern);
    const RealImage zero(s.tau, s.tau, 0.0);
    if (2 * s.tau > s.m) return pathology_pair_overshift(f, probe, pattern, zero, theta00, r);
    return pathology_pair(f, probe, pattern, zero, theta00, r);
}

SolutionPair pathology_pair(const ComplexImage& f, const ComplexImage& probe, const ScanPattern& pattern,
                            const RealImage& psi, double theta00, Vec2 r)
{
    const auto s = raster_shape(f, probe, pattern);
    if (2 * s.tau > s.m) return pathology_pair_overshift(f, probe, pattern, psi, theta00, r);
    if (s.m % s.tau != 0) {
        throw Error("pathology_pair: m=" + std::to_string(s.m) + " is not a multiple of tau=" +
                    std::to_string(s.tau));
    }
    check_psi(psi, s.tau);
    check_lattice_slope(r, s.q);

    const int p = s.m / s.tau;
    const auto part = BlockPartition::under_shift(s.m, p);
    auto blocks = partition(probe, part);
    for (auto& [key, blk] : blocks) {
        const auto [k, l] = key;
        const Complex c = phasor(-(r[0] * k + r[1] * l));
        for (int y = 0; y < blk.rows(); ++y) {
            for (int x = 0; x < blk.cols(); ++x) blk(y, x) *= c * phasor(psi(y, x));
        }
    }
    return {imprint_object(f, s.q, psi, theta00, r), reassemble(blocks, part)};
}

SolutionPair pathology_pair_overshift(const ComplexImage& f, const ComplexImage& probe,
                                      const ScanPattern& pattern, const RealImage& psi, double theta00, Vec2 r)
{
    const auto s = raster_shape(f, probe, pattern);
    if (!(2 * s.tau > s.m && s.tau < s.m)) {
        throw Error("pathology_pair_overshift: need m/2 < tau < m, got m=" + std::to_string(s.m) +
                    " tau=" + std::to_string(s.tau));
    }
    check_psi(psi, s.tau);
    check_lattice_slope(r, s.q);

    // psi covers the upper-left 2x2 composite [0,tau)^2; its blocks psi_ij
    // share segments 0 and 1 of the probe partition. Probe blocks in the last
    // column/row reuse psi_0j / psi_j0 with an extra -r1 / -r2.
    const auto part = BlockPartition::over_shift(s.m, s.tau);
    const auto& segs = part.segments();
    auto blocks = partition(probe, part);
    for (auto& [key, blk] : blocks) {
        const auto [i, j] = key;
        const int pi_ = i == 2 ? 0 : i;
        const int pj = j == 2 ? 0 : j;
        const double ramp = (i == 2 ? r[0] : 0.0) + (j == 2 ? r[1] : 0.0);
        const int c0 = segs[pi_].begin;
        const int r0 = segs[pj].begin;
        for (int y = 0; y < blk.rows(); ++y) {
            for (int x = 0; x < blk.cols(); ++x) blk(y, x) *= phasor(-ramp + psi(r0 + y, c0 + x));
        }
    }
    // Object blocks 2j / j2 / 22 of window (k,l) coincide with blocks 0j / j0 / 00
    // of the neighbouring windows, so the object side is one tau x tau cell per (k,l).
    return {imprint_object(f, s.q, psi, theta00, r), reassemble(blocks, part)};
}

BlockPhaseProfile extract_block_phases(const ComplexImage& f, const ComplexImage& probe, const ComplexImage& g,
                                       const ComplexImage& nu, const GridGeometry& geom,
                                       const ScanPattern& pattern, double tol_phase)
{
    if (!f.same_shape(g) || !probe.same_shape(nu)) throw Error("extract_block_phases: shape mismatch");
    std::vector<ComplexImage> truth, est;
    double peak = 0.0;
    for (const auto& pos : pattern.positions()) {
        truth.push_back(exit_wave(f, probe, geom, pos.t));
        est.push_back(exit_wave(g, nu, geom, pos.t));
        for (const auto& v : truth.back()) peak = std::max(peak, std::abs(v));
    }
    if (peak == 0.0) throw Error("extract_block_phases: exit waves vanish identically");
    const double floor = 1e-12 * peak;

    BlockPhaseProfile prof;
    for (std::size_t s = 0; s < truth.size(); ++s) {
        const auto& pos = pattern.positions()[s];
        std::vector<Complex> ratios;
        Complex acc{};
        for (std::size_t i = 0; i < truth[s].size(); ++i) {
            if (std::abs(truth[s][i]) < floor) continue;
            const Complex q = est[s][i] / truth[s][i];
            ratios.push_back(q);
            if (std::abs(q) > 0.0) acc += q / std::abs(q);
        }
        if (ratios.empty() || std::abs(acc) == 0.0) {
            throw BlockPhaseViolation("no usable pixels in window", pos.t, kPi);
        }
        const double theta = std::arg(acc);
        double spread = 0.0;
        for (const Complex& q : ratios) {
            spread = std::max(spread, std::abs(wrap_phase(std::arg(q) - theta)));
            spread = std::max(spread, std::abs(std::abs(q) - 1.0));
        }
        prof.max_spread = std::max(prof.max_spread, spread);
        if (spread > tol_phase) {
            throw BlockPhaseViolation("exit waves at shift (" + std::to_string(pos.t.t1) + "," +
                                          std::to_string(pos.t.t2) + ") differ by more than a constant phase (" +
                                          std::to_string(spread) + " rad)",
                                      pos.t, spread);
        }
        prof.phases.push_back({pos.k, pos.l, pos.t, wrap_phase(theta)});
    }
    return prof;
}

namespace {

struct FitEval {
    double theta00;
    double residual;
};

FitEval evaluate_fit(const std::vector<double>& theta, const std::vector<Vec2>& x, Vec2 r)
{
    Complex acc{};
    for (std::size_t i = 0; i < theta.size(); ++i) acc += phasor(theta[i] - r[0] * x[i][0] - r[1] * x[i][1]);
    const double t0 = std::arg(acc);
    double res = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        res = std::max(res, std::abs(wrap_phase(theta[i] - t0 - r[0] * x[i][0] - r[1] * x[i][1])));
    }
    return {t0, res};
}

} // namespace

AffineFit fit_affine_profile(const BlockPhaseProfile& profile, const ScanPattern& pattern, bool periodic)
{
    const auto& ph = profile.phases;
    if (ph.size() < 3) throw Error("fit_affine_profile: need at least 3 block phases");
    const bool lattice = pattern.kind() == ScanKind::raster;
    std::vector<double> theta;
    std::vector<Vec2> x;
    for (const auto& b : ph) {
        theta.push_back(b.theta);
        x.push_back(lattice ? Vec2{double(b.k), double(b.l)} : Vec2{double(b.t.t1), double(b.t.t2)});
    }
    bool collinear = true;
    for (std::size_t i = 2; i < x.size() && collinear; ++i) {
        for (std::size_t j = 1; j < i && collinear; ++j) {
            const double cross = (x[j][0] - x[0][0]) * (x[i][1] - x[0][1]) - (x[j][1] - x[0][1]) * (x[i][0] - x[0][0]);
            if (std::abs(cross) > 0.0) collinear = false;
        }
    }
    if (collinear) throw Error("fit_affine_profile: scan positions are collinear");

    const int period = lattice ? pattern.q() : pattern.n();
    const double step = kTwoPi / period;
    AffineFit best{0.0, {0.0, 0.0}, std::numeric_limits<double>::infinity()};
    for (int j1 = 0; j1 < period; ++j1) {
        for (int j2 = 0; j2 < period; ++j2) {
            const Vec2 r{wrap_phase(step * j1), wrap_phase(step * j2)};
            const auto e = evaluate_fit(theta, x, r);
            if (e.residual < best.residual - 1e-15) best = {e.theta00, r, e.residual};
        }
    }

    if (!periodic) {
        // Gauss-Newton on the wrapped residuals around the lattice optimum.
        for (int it = 0; it < 50; ++it) {
            double a00 = 0, a01 = 0, a02 = 0, a11 = 0, a12 = 0, a22 = 0, b0 = 0, b1 = 0, b2 = 0;
            for (std::size_t i = 0; i < theta.size(); ++i) {
                const double e = wrap_phase(theta[i] - best.theta00 - best.r[0] * x[i][0] - best.r[1] * x[i][1]);
                const double g0 = 1.0, g1 = x[i][0], g2 = x[i][1];
                a00 += g0 * g0; a01 += g0 * g1; a02 += g0 * g2;
                a11 += g1 * g1; a12 += g1 * g2; a22 += g2 * g2;
                b0 += g0 * e; b1 += g1 * e; b2 += g2 * e;
            }
            // Solve the 3x3 normal equations by Cramer's rule.
            const double det = a00 * (a11 * a22 - a12 * a12) - a01 * (a01 * a22 - a12 * a02) + a02 * (a01 * a12 - a11 * a02);
            if (std::abs(det) < 1e-300) break;
            const double d0 = (b0 * (a11 * a22 - a12 * a12) - a01 * (b1 * a22 - a12 * b2) + a02 * (b1 * a12 - a11 * b2)) / det;
            const double d1 = (a00 * (b1 * a22 - a12 * b2) - b0 * (a01 * a22 - a12 * a02) + a02 * (a01 * b2 - b1 * a02)) / det;
            const double d2 = (a00 * (a11 * b2 - b1 * a12) - a01 * (a01 * b2 - b1 * a02) + b0 * (a01 * a12 - a11 * a02)) / det;
            const Vec2 r{best.r[0] + d1, best.r[1] + d2};
            const auto e = evaluate_fit(theta, x, r);
            const bool done = std::abs(d0) + std::abs(d1) + std::abs(d2) < 1e-15;
            if (e.residual <= best.residual) best = {e.theta00, r, e.residual};
            if (done) break;
        }
    }
    best.theta00 = wrap_phase(best.theta00);
    return best;
}

void fit_affine_profile_inplace(BlockPhaseProfile& profile, const ScanPattern& pattern, bool periodic)
{
    const auto fit = fit_affine_profile(profile, pattern, periodic);
    profile.fitted = true;
    profile.theta00 = fit.theta00;
    profile.r = fit.r;
    profile.residual = fit.residual;
}

double verify_same_data(const ComplexImage& f, const ComplexImage& probe, const ComplexImage& g,
                        const ComplexImage& nu, const GridGeometry& geom, const ScanPattern& pattern, int os)
{
    const auto bf = measure(f, probe, geom, pattern, os);
    const auto bg = measure(g, nu, geom, pattern, os);
    double peak = 0.0, dev = 0.0;
    for (std::size_t s = 0; s < bf.frames.size(); ++s) {
        const auto& a = bf.frames[s].magnitude;
        const auto& b = bg.frames[s].magnitude;
        for (std::size_t i = 0; i < a.size(); ++i) {
            peak = std::max(peak, a[i]);
            dev = std::max(dev, std::abs(a[i] - b[i]));
        }
    }
    return dev / (peak + 1e-300);
}

ComplexImage log_ratio_field(const ComplexImage& f, const ComplexImage& g)
{
    if (!f.same_shape(g)) throw Error("log_ratio_field: shape mismatch");
    ComplexImage h(f.rows(), f.cols());
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] == Complex{} || g[i] == Complex{}) throw Error("log_ratio_field: zero pixel in f or g");
        const Complex q = g[i] / f[i];
        h[i] = {std::log(std::abs(q)), wrap_phase(std::arg(q))};
    }
    return h;
}

RampFit ramp_fit(const ComplexImage& h)
{
    if (h.empty()) throw Error("ramp_fit: empty field");
    const int rows = h.rows();
    const int cols = h.cols();
    Complex d1{}, d2{};
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) d1 += phasor(h(r, c + 1).imag() - h(r, c).imag());
            if (r + 1 < rows) d2 += phasor(h(r + 1, c).imag() - h(r, c).imag());
        }
    }
    RampFit fit;
    fit.r = {cols > 1 ? std::arg(d1) : 0.0, rows > 1 ? std::arg(d2) : 0.0};

    Complex acc{};
    double mean_re = 0.0;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            acc += phasor(h(r, c).imag() - fit.r[0] * c - fit.r[1] * r);
            mean_re += h(r, c).real();
        }
    }
    mean_re /= static_cast<double>(h.size());
    const double phi0 = std::arg(acc);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            fit.phase_residual = std::max(
                fit.phase_residual, std::abs(wrap_phase(h(r, c).imag() - phi0 - fit.r[0] * c - fit.r[1] * r)));
            fit.modulus_residual = std::max(fit.modulus_residual, std::abs(h(r, c).real() - mean_re));
        }
    }
    fit.h0 = {mean_re, phi0};
    fit.residual = std::max(fit.phase_residual, fit.modulus_residual);
    return fit;
}

} // namespace ptycho
