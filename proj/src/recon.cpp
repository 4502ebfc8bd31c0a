#include "ptycho/recon.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <random>
#include <sstream>

namespace ptycho {

// ---------------------------------------------------------------- canvas

ReconCanvas::ReconCanvas(const GridGeometry& geom, const std::vector<Shift>& shifts)
    : geom_(geom)
{
    const int n = geom.n();
    const int m = geom.m();
    if (geom.periodic()) {
        side_ = n;
        exterior_.assign(static_cast<std::size_t>(n) * n, 0);
        return;
    }
    int lo1 = 0, lo2 = 0, hi1 = n - 1, hi2 = n - 1;
    for (const auto& t : shifts) {
        lo1 = std::min(lo1, t.t1);
        lo2 = std::min(lo2, t.t2);
        hi1 = std::max(hi1, t.t1 + m - 1);
        hi2 = std::max(hi2, t.t2 + m - 1);
    }
    origin_ = {lo1, lo2};
    side_ = std::max(hi1 - lo1, hi2 - lo2) + 1;
    exterior_.assign(static_cast<std::size_t>(side_) * side_, 0);
    for (int r = 0; r < side_; ++r) {
        for (int c = 0; c < side_; ++c) {
            const int row = r + lo2;
            const int col = c + lo1;
            exterior_[static_cast<std::size_t>(r) * side_ + c] = (row < 0 || row >= n || col < 0 || col >= n);
        }
    }
}

std::vector<int> ReconCanvas::exterior_indices() const
{
    std::vector<int> out;
    for (std::size_t i = 0; i < exterior_.size(); ++i) {
        if (exterior_[i]) out.push_back(static_cast<int>(i));
    }
    return out;
}

std::vector<int> ReconCanvas::window_index(Shift t) const
{
    const int m = geom_.m();
    std::vector<int> idx(static_cast<std::size_t>(m) * m);
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            int row = t.t2 + r - origin_.t2;
            int col = t.t1 + c - origin_.t1;
            if (geom_.periodic()) {
                row = ((row % side_) + side_) % side_;
                col = ((col % side_) + side_) % side_;
            } else if (row < 0 || row >= side_ || col < 0 || col >= side_) {
                throw Error("recon canvas: window outside the canvas");
            }
            idx[static_cast<std::size_t>(r) * m + c] = row * side_ + col;
        }
    }
    return idx;
}

ComplexImage ReconCanvas::embed(const ComplexImage& f) const
{
    const int n = geom_.n();
    if (f.rows() != n || f.cols() != n) throw Error("recon canvas: object is not n x n");
    ComplexImage out(side_, side_, geom_.boundary().exterior_value());
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) out(r - origin_.t2, c - origin_.t1) = f(r, c);
    }
    return out;
}

ComplexImage ReconCanvas::interior(const ComplexImage& canvas) const
{
    const int n = geom_.n();
    if (canvas.rows() != side_ || canvas.cols() != side_) throw Error("recon canvas: image is not canvas sized");
    ComplexImage out(n, n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) out(r, c) = canvas(r - origin_.t2, c - origin_.t1);
    }
    return out;
}

// ---------------------------------------------------------------- operator

FrameOperator::FrameOperator(kernels::FrameLayout layout, int unknown_rows, int unknown_cols, Options opts)
    : layout_(std::move(layout)), rows_(unknown_rows), cols_(unknown_cols), opts_(std::move(opts)),
      weights_(unknown_rows, unknown_cols, 0.0)
{
    if (!(opts_.pinv_guard > 0.0)) throw Error("frame operator: pinv_guard must be positive");
    if (layout_.count() == 0) throw Error("frame operator: no frames");
    const std::size_t mm = static_cast<std::size_t>(layout_.m) * layout_.m;
    if (layout_.index.size() != mm * layout_.masks.size()) throw Error("frame operator: index table size mismatch");
    for (int s = 0; s < layout_.count(); ++s) {
        const ComplexImage& mask = layout_.masks[s];
        for (std::size_t p = 0; p < mm; ++p) {
            const int i = layout_.index[s * mm + p];
            if (i < 0 || static_cast<std::size_t>(i) >= weights_.size()) throw Error("frame operator: index out of range");
            weights_[i] += std::norm(mask[p]);
        }
    }
    const double wmax = *std::max_element(weights_.begin(), weights_.end());
    if (!(wmax > 0.0)) throw Error("frame operator: illumination weights are identically zero");
    weight_floor_ = opts_.pinv_guard * wmax;
}

FrameStack FrameOperator::apply(const ComplexImage& x) const
{
    if (x.rows() != rows_ || x.cols() != cols_) throw Error("frame operator: unknown has the wrong shape");
    FrameStack out(layout_.count(), layout_.side());
    kernels::forward_frames(opts_.exec, layout_, x.flat(), out);
    return out;
}

ComplexImage FrameOperator::adjoint(const FrameStack& y) const
{
    if (y.count() != layout_.count() || y.side() != layout_.side()) throw Error("frame operator: stack shape mismatch");
    ComplexImage x(rows_, cols_);
    kernels::adjoint_frames(opts_.exec, layout_, y, x.flat());
    return x;
}

ComplexImage FrameOperator::pinv(const FrameStack& y) const
{
    ComplexImage x = adjoint(y);
    const double mm = static_cast<double>(layout_.side()) * layout_.side();
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = weights_[i] >= weight_floor_ ? x[i] / (mm * weights_[i]) : opts_.unlit_value;
    }
    for (const auto& [i, v] : opts_.fixed) x[i] = v;
    return x;
}

FrameOperator object_operator(const ReconCanvas& canvas, const ComplexImage& probe, const std::vector<Shift>& shifts,
                              int os, double pinv_guard, bool enforce, Exec exec)
{
    const int m = canvas.geometry().m();
    if (probe.rows() != m || probe.cols() != m) throw Error("object operator: probe is not m x m");
    if (norm2(probe) == 0.0) throw Error("object operator: probe estimate is identically zero");
    kernels::FrameLayout layout;
    layout.m = m;
    layout.os = os;
    for (const auto& t : shifts) {
        const auto idx = canvas.window_index(t);
        layout.index.insert(layout.index.end(), idx.begin(), idx.end());
        layout.masks.push_back(probe);
    }
    FrameOperator::Options opts;
    opts.pinv_guard = pinv_guard;
    opts.exec = exec;
    const Complex ext = canvas.geometry().boundary().exterior_value();
    opts.unlit_value = canvas.geometry().periodic() ? Complex{} : ext;
    if (enforce) {
        for (int i : canvas.exterior_indices()) opts.fixed.emplace_back(i, ext);
    }
    return FrameOperator(std::move(layout), canvas.side(), canvas.side(), std::move(opts));
}

FrameOperator probe_operator(const ReconCanvas& canvas, const ComplexImage& canvas_object,
                             const std::vector<Shift>& shifts, int os, double pinv_guard, Exec exec)
{
    const int m = canvas.geometry().m();
    if (canvas_object.rows() != canvas.side() || canvas_object.cols() != canvas.side()) {
        throw Error("probe operator: object is not canvas sized");
    }
    kernels::FrameLayout layout;
    layout.m = m;
    layout.os = os;
    std::vector<int> ident(static_cast<std::size_t>(m) * m);
    for (std::size_t p = 0; p < ident.size(); ++p) ident[p] = static_cast<int>(p);
    for (const auto& t : shifts) {
        const auto idx = canvas.window_index(t);
        ComplexImage mask(m, m);
        for (std::size_t p = 0; p < idx.size(); ++p) mask[p] = canvas_object[idx[p]];
        layout.index.insert(layout.index.end(), ident.begin(), ident.end());
        layout.masks.push_back(std::move(mask));
    }
    FrameOperator::Options opts;
    opts.pinv_guard = pinv_guard;
    opts.exec = exec;
    return FrameOperator(std::move(layout), m, m, std::move(opts));
}

// ---------------------------------------------------------------- n x n forms

namespace {

void check_object(const ComplexImage& g, const GridGeometry& geom, const ScanPattern& pattern)
{
    if (g.rows() != geom.n() || g.cols() != geom.n()) throw Error("apply_A: object is not n x n");
    if (pattern.n() != geom.n()) throw Error("apply_A: pattern and geometry disagree on n");
}

// Linear part of A on Z_n^2: exterior pixels contribute nothing.
FrameOperator interior_operator(const ComplexImage& probe, const GridGeometry& geom, const ScanPattern& pattern,
                                int os, double pinv_guard)
{
    const int n = geom.n();
    const int m = geom.m();
    if (probe.rows() != m || probe.cols() != m) throw Error("apply_A: probe is not m x m");
    if (norm2(probe) == 0.0) throw Error("apply_A: probe is identically zero");
    kernels::FrameLayout layout;
    layout.m = m;
    layout.os = os;
    for (const auto& t : pattern.shifts()) {
        ComplexImage mask = probe;
        const auto win = shifted_window(geom, t);
        for (std::size_t p = 0; p < win.size(); ++p) {
            if (win[p].exterior) {
                mask[p] = 0.0;
                layout.index.push_back(0);
            } else {
                layout.index.push_back(win[p].row * n + win[p].col);
            }
        }
        layout.masks.push_back(std::move(mask));
    }
    FrameOperator::Options opts;
    opts.pinv_guard = pinv_guard;
    opts.unlit_value = geom.periodic() ? Complex{} : geom.boundary().exterior_value();
    return FrameOperator(std::move(layout), n, n, std::move(opts));
}

// Contribution of the exterior (bright constant) to A g; zero unless bright.
FrameStack exterior_term(const ComplexImage& probe, const GridGeometry& geom, const ScanPattern& pattern, int os)
{
    const auto shifts = pattern.shifts();
    FrameStack out(static_cast<int>(shifts.size()), os * geom.m());
    if (geom.boundary().kind != BoundaryKind::bright) return out;
    const ComplexImage zero(geom.n(), geom.n());
    for (std::size_t s = 0; s < shifts.size(); ++s) {
        const ComplexImage y = padded_dft(exit_wave(zero, probe, geom, shifts[s]), os);
        std::copy(y.begin(), y.end(), out.frame(static_cast<int>(s)).begin());
    }
    return out;
}

} // namespace

FrameStack apply_A(const ComplexImage& probe, const ComplexImage& g, const GridGeometry& geom,
                   const ScanPattern& pattern, int os)
{
    check_object(g, geom, pattern);
    FrameStack y = interior_operator(probe, geom, pattern, os, 1e-8).apply(g);
    const FrameStack c = exterior_term(probe, geom, pattern, os);
    for (std::size_t i = 0; i < y.raw().size(); ++i) y.raw()[i] += c.raw()[i];
    return y;
}

ComplexImage apply_A_pinv(const ComplexImage& probe, const FrameStack& u, const GridGeometry& geom,
                          const ScanPattern& pattern, int os, double pinv_guard)
{
    if (pattern.n() != geom.n()) throw Error("apply_A_pinv: pattern and geometry disagree on n");
    const FrameOperator op = interior_operator(probe, geom, pattern, os, pinv_guard);
    if (!u.same_shape(FrameStack(op.frame_count(), op.frame_side()))) throw Error("apply_A_pinv: stack shape mismatch");
    FrameStack v = u;
    const FrameStack c = exterior_term(probe, geom, pattern, os);
    for (std::size_t i = 0; i < v.raw().size(); ++i) v.raw()[i] -= c.raw()[i];
    return op.pinv(v);
}

std::vector<double> stacked_magnitudes(const DiffractionSet& data)
{
    std::vector<double> b;
    b.reserve(data.frames.size() * static_cast<std::size_t>(data.side()) * data.side());
    for (const auto& fr : data.frames) {
        if (fr.magnitude.rows() != data.side() || fr.magnitude.cols() != data.side()) {
            throw Error("diffraction set: frame has the wrong size");
        }
        b.insert(b.end(), fr.magnitude.begin(), fr.magnitude.end());
    }
    return b;
}

// ---------------------------------------------------------------- DR

namespace {

double magnitude_misfit(const FrameStack& y, const std::vector<double>& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        const double d = std::abs(y.raw()[i]) - b[i];
        s += d * d;
    }
    return s;
}

double stack_norm2(const std::vector<double>& b)
{
    double s = 0.0;
    for (double v : b) s += v * v;
    return s;
}

} // namespace

DrResult dr_inner(const std::vector<double>& b, const FrameOperator& op, FrameStack u, int iters)
{
    if (iters < 0) throw Error("dr_inner: iteration count must be >= 0");
    if (u.count() != op.frame_count() || u.side() != op.frame_side() || u.raw().size() != b.size()) {
        throw Error("dr_inner: u_init is not shaped like b");
    }
    DrResult res;
    res.objective.reserve(static_cast<std::size_t>(iters) + 1);
    auto& uu = u.raw();
    for (int it = 0; it < iters; ++it) {
        const FrameStack pu = op.project(u);
        res.objective.push_back(0.5 * magnitude_misfit(pu, b));
        const auto& p = pu.raw();
        for (std::size_t i = 0; i < uu.size(); ++i) {
            const Complex r = 2.0 * p[i] - uu[i];
            const double a = std::abs(r);
            const Complex sg = a > 0.0 ? r / a : Complex{1.0, 0.0};
            uu[i] = 0.5 * uu[i] + 0.5 * b[i] * sg;
        }
    }
    res.estimate = op.pinv(u);
    res.objective.push_back(0.5 * magnitude_misfit(op.apply(res.estimate), b));
    res.u = std::move(u);
    return res;
}

// ---------------------------------------------------------------- probe init

ComplexImage init_probe(const ComplexImage& truth, std::uint64_t seed, ProbeInitMode mode, double margin)
{
    if (mode == ProbeInitMode::given) return truth;
    if (!(margin >= 0.0 && margin <= kPi / 2)) throw Error("init_probe: margin must lie in [0, pi/2]");
    std::mt19937_64 rng(seed);
    const double half = kPi / 2 - margin;
    std::uniform_real_distribution<double> phi(-half, half);
    std::uniform_real_distribution<double> full(0.0, kTwoPi);
    ComplexImage out(truth.rows(), truth.cols());
    int zeros = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        // Draw every pixel so the sequence does not depend on where the zeros are.
        const double a = half > 0.0 ? phi(rng) : 0.0;
        const double z = full(rng);
        if (truth[i] == Complex{}) {
            out[i] = std::polar(1.0, z);
            ++zeros;
        } else {
            out[i] = truth[i] * std::polar(1.0, a);
        }
    }
    if (zeros > 0) {
        std::clog << "warning: init_probe: " << zeros
                  << " zero pixel(s) in the reference probe got a random unit phase\n";
    }
    return out;
}

// ---------------------------------------------------------------- AM

const char* to_string(StopReason r)
{
    switch (r) {
    case StopReason::tolerance: return "tolerance";
    case StopReason::stagnation: return "stagnation";
    case StopReason::max_epochs: return "max_epochs";
    }
    return "?";
}

ReconState am_reconstruct(const DiffractionSet& b, const GridGeometry& geom, const ComplexImage& probe_init,
                          const ReconConfig& cfg, const ReconExtras& extras)
{
    if (cfg.inner_iters < 1) throw Error("reconstruct: inner_iters must be >= 1");
    if (cfg.max_epochs < 1) throw Error("reconstruct: max_epochs must be >= 1");
    if (!(cfg.pinv_guard > 0.0)) throw Error("reconstruct: pinv_guard must be positive");
    if (b.m != geom.m()) throw Error("reconstruct: data and geometry disagree on m");
    if (b.frames.empty()) throw Error("reconstruct: no diffraction frames");
    if (probe_init.rows() != geom.m() || probe_init.cols() != geom.m()) throw Error("reconstruct: probe is not m x m");
    if (norm2(probe_init) == 0.0) throw Error("reconstruct: initial probe is identically zero");
    if (extras.object_truth && (extras.object_truth->rows() != geom.n() || extras.object_truth->cols() != geom.n())) {
        throw Error("reconstruct: object truth is not n x n");
    }
    if (extras.probe_truth && !extras.probe_truth->same_shape(probe_init)) {
        throw Error("reconstruct: probe truth is not m x m");
    }

    const auto shifts = b.shifts();
    const ReconCanvas canvas(geom, shifts);
    const std::vector<double> bm = stacked_magnitudes(b);
    const double bnorm = std::sqrt(stack_norm2(bm));
    if (!(bnorm > 0.0)) throw Error("reconstruct: data are identically zero");
    const int window = cfg.re_window > 0 ? cfg.re_window : geom.n() / 2;

    ReconState st;
    st.probe_est = probe_init;

    FrameOperator a_op =
        object_operator(canvas, st.probe_est, shifts, b.os, cfg.pinv_guard, cfg.enforce_boundary, cfg.exec);
    FrameStack u;
    if (extras.object_init || cfg.object_seed == ObjectSeed::ones) {
        const ComplexImage f1 = extras.object_init ? *extras.object_init
                                                   : ComplexImage(geom.n(), geom.n(), Complex{1.0, 0.0});
        u = a_op.apply(canvas.embed(f1));
    } else {
        FrameStack seed(a_op.frame_count(), a_op.frame_side());
        for (std::size_t i = 0; i < bm.size(); ++i) seed.raw()[i] = bm[i];
        u = a_op.project(seed);
    }
    st.f_canvas = canvas.embed(ComplexImage(geom.n(), geom.n(), Complex{1.0, 0.0}));

    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        if (epoch > 1) {
            a_op = object_operator(canvas, st.probe_est, shifts, b.os, cfg.pinv_guard, cfg.enforce_boundary, cfg.exec);
        }
        DrResult obj = dr_inner(bm, a_op, std::move(u), cfg.inner_iters);
        u = std::move(obj.u);
        st.f_canvas = std::move(obj.estimate);

        const FrameOperator b_op = probe_operator(canvas, st.f_canvas, shifts, b.os, cfg.pinv_guard, cfg.exec);
        FrameStack v_init = epoch == 1 ? u : std::move(st.v);
        DrResult prb = dr_inner(bm, b_op, std::move(v_init), cfg.inner_iters);
        st.v = std::move(prb.u);
        st.probe_est = std::move(prb.estimate);
        if (norm2(st.probe_est) == 0.0) throw Error("reconstruct: probe estimate collapsed to zero");

        EpochRecord rec;
        rec.epoch = epoch;
        rec.data_residual = std::sqrt(2.0 * prb.objective.back()) / bnorm;
        st.f_est = canvas.interior(st.f_canvas);
        if (extras.object_truth) {
            st.last_re_object = relative_error(*extras.object_truth, st.f_est, window);
            rec.re_object = st.last_re_object.value;
        }
        if (extras.probe_truth) {
            st.last_re_probe = probe_relative_error(*extras.probe_truth, st.probe_est, window, geom.n());
            rec.re_probe = st.last_re_probe.value;
        }
        rec.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        st.history.push_back(rec);
        if (extras.on_epoch) extras.on_epoch(rec);

        if (!std::isfinite(rec.data_residual)) throw Error("reconstruct: non-finite data residual");
        if (rec.data_residual < cfg.tol_data) {
            st.stop = StopReason::tolerance;
            break;
        }
        const int w = cfg.stagnation_window;
        if (w > 0 && static_cast<int>(st.history.size()) > w) {
            const double prev = st.history[st.history.size() - 1 - w].data_residual;
            if (std::abs(prev - rec.data_residual) < cfg.stagnation_tol * prev) {
                st.stop = StopReason::stagnation;
                break;
            }
        }
    }
    st.u = std::move(u);
    return st;
}

std::string history_csv(const std::vector<EpochRecord>& history, bool include_wall_ms)
{
    std::ostringstream os;
    os.precision(17);
    os << "epoch,data_residual,RE_object,RE_probe,wall_ms\n";
    for (const auto& r : history) {
        os << r.epoch << ',' << r.data_residual << ',';
        if (r.re_object >= 0) os << r.re_object;
        os << ',';
        if (r.re_probe >= 0) os << r.re_probe;
        os << ',';
        if (include_wall_ms) {
            os.precision(3);
            os << std::fixed << r.wall_ms << std::defaultfloat;
            os.precision(17);
        }
        os << '\n';
    }
    return os.str();
}

} // namespace ptycho
