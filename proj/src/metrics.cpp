#include "ptycho/metrics.hpp"

#include <cmath>
#include <vector>

namespace ptycho {

namespace {

Complex phasor(double a) { return {std::cos(a), std::sin(a)}; }

// Correlation c(r) = sum conj(est) truth exp(+2 pi i (r1 col + r2 row)/N).
Complex correlation(const ComplexImage& truth, const ComplexImage& est, Vec2 r, double n_ref)
{
    Complex acc{};
    for (int row = 0; row < truth.rows(); ++row) {
        Complex racc{};
        for (int col = 0; col < truth.cols(); ++col) {
            racc += std::conj(est(row, col)) * truth(row, col) * phasor(kTwoPi * r[0] * col / n_ref);
        }
        acc += racc * phasor(kTwoPi * r[1] * row / n_ref);
    }
    return acc;
}

REResult relative_error_impl(const ComplexImage& truth, const ComplexImage& est, int window, double n_ref,
                             bool refine)
{
    if (!truth.same_shape(est)) throw Error("relative_error: shape mismatch");
    const double tn = norm2(truth);
    if (tn == 0.0) throw Error("relative_error: truth is identically zero");
    if (window < 0) throw Error("relative_error: window must be >= 0");

    REResult res;
    res.search_window = window;
    const double en = norm2(est);
    if (en == 0.0) {
        res.value = 1.0;
        res.best_alpha = 0.0;
        return res;
    }

    // Column sums for every candidate r1, then row sums for every r2.
    const int rows = truth.rows();
    const int cols = truth.cols();
    const int w = 2 * window + 1;
    std::vector<Complex> partial(static_cast<std::size_t>(rows) * w);
    for (int row = 0; row < rows; ++row) {
        for (int i = 0; i < w; ++i) {
            const int r1 = i - window;
            Complex acc{};
            for (int col = 0; col < cols; ++col) {
                acc += std::conj(est(row, col)) * truth(row, col) * phasor(kTwoPi * r1 * col / n_ref);
            }
            partial[static_cast<std::size_t>(row) * w + i] = acc;
        }
    }
    double best = -1.0;
    Complex best_c{};
    for (int i = 0; i < w; ++i) {
        for (int j = 0; j < w; ++j) {
            const int r2 = j - window;
            Complex acc{};
            for (int row = 0; row < rows; ++row) {
                acc += partial[static_cast<std::size_t>(row) * w + i] * phasor(kTwoPi * r2 * row / n_ref);
            }
            // Strict comparison keeps the lexicographically first (r1, r2) on ties.
            if (std::abs(acc) > best) {
                best = std::abs(acc);
                best_c = acc;
                res.best_r = {double(i - window), double(r2)};
            }
        }
    }

    if (refine) {
        double h = 0.5;
        for (int round = 0; round < 60 && h > 1e-10; ++round) {
            bool moved = false;
            for (int axis = 0; axis < 2; ++axis) {
                for (double dir : {-1.0, 1.0}) {
                    Vec2 r = res.best_r;
                    r[axis] += dir * h;
                    const Complex c = correlation(truth, est, r, n_ref);
                    if (std::abs(c) > best) {
                        best = std::abs(c);
                        best_c = c;
                        res.best_r = r;
                        moved = true;
                    }
                }
            }
            if (!moved) h *= 0.5;
        }
    }

    res.best_alpha = best_c / (en * en);
    double err = 0.0;
    for (int row = 0; row < rows; ++row) {
        for (int col = 0; col < cols; ++col) {
            const Complex mod = phasor(-kTwoPi * (res.best_r[0] * col + res.best_r[1] * row) / n_ref);
            err += std::norm(truth(row, col) - res.best_alpha * mod * est(row, col));
        }
    }
    res.value = std::sqrt(err) / tn;
    return res;
}

} // namespace

REResult relative_error(const ComplexImage& truth, const ComplexImage& est, int window, bool refine)
{
    if (truth.rows() != truth.cols()) throw Error("relative_error: images must be square");
    return relative_error_impl(truth, est, window, truth.rows(), refine);
}

REResult probe_relative_error(const ComplexImage& truth, const ComplexImage& est, int window, int reference_size,
                              bool refine)
{
    if (reference_size <= 0) throw Error("probe_relative_error: reference size must be positive");
    return relative_error_impl(truth, est, window, reference_size, refine);
}

double data_residual(const DiffractionSet& b, const ComplexImage& f_est, const ComplexImage& probe_est,
                     const GridGeometry& geom, Exec exec)
{
    std::vector<ScanPosition> positions;
    for (const auto& fr : b.frames) positions.push_back({fr.k, fr.l, fr.t});
    const auto est = measure(f_est, probe_est, geom, positions, b.os, exec);
    double num = 0.0;
    for (std::size_t s = 0; s < b.frames.size(); ++s) {
        const auto& x = b.frames[s].magnitude;
        const auto& y = est.frames[s].magnitude;
        if (!x.same_shape(y)) throw Error("data_residual: frame size mismatch");
        for (std::size_t i = 0; i < x.size(); ++i) num += (y[i] - x[i]) * (y[i] - x[i]);
    }
    const double den = b.norm();
    return den > 0.0 ? std::sqrt(num) / den : std::sqrt(num);
}

} // namespace ptycho
