#include "ptycho/grid.hpp"

#include <string>

namespace ptycho {

namespace {

int mod(int a, int n)
{
    int r = a % n;
    return r < 0 ? r + n : r;
}

} // namespace

GridGeometry::GridGeometry(int n, int m, Boundary boundary)
    : n_(n), m_(m), boundary_(boundary)
{
    if (m <= 0 || m > n) {
        throw Error("GridGeometry: need 0 < m <= n, got n=" + std::to_string(n) +
                    " m=" + std::to_string(m));
    }
    if (boundary.kind == BoundaryKind::bright) {
        const Complex v = boundary.bright_value;
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()) || v == Complex{}) {
            throw Error("GridGeometry: bright boundary value must be finite and nonzero");
        }
    }
}

std::vector<WindowPixel> shifted_window(const GridGeometry& geom, Shift t)
{
    const int m = geom.m();
    const int n = geom.n();
    std::vector<WindowPixel> out;
    out.reserve(static_cast<std::size_t>(m) * m);
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
            const int row = t.t2 + j;
            const int col = t.t1 + i;
            if (geom.periodic()) {
                out.push_back({mod(row, n), mod(col, n), false});
            } else {
                const bool ext = row < 0 || row >= n || col < 0 || col >= n;
                out.push_back({row, col, ext});
            }
        }
    }
    return out;
}

ComplexImage restrict_to_window(const ComplexImage& x, const GridGeometry& geom, Shift t)
{
    if (x.rows() != geom.n() || x.cols() != geom.n()) {
        throw Error("restrict: object is " + std::to_string(x.rows()) + "x" +
                    std::to_string(x.cols()) + ", geometry expects n=" + std::to_string(geom.n()));
    }
    const int m = geom.m();
    const Complex ext = geom.boundary().exterior_value();
    ComplexImage out(m, m);
    const auto win = shifted_window(geom, t);
    for (std::size_t p = 0; p < win.size(); ++p) {
        out[p] = win[p].exterior ? ext : x(win[p].row, win[p].col);
    }
    return out;
}

ComplexImage cyclic_shift(const ComplexImage& x, Shift t)
{
    ComplexImage out(x.rows(), x.cols());
    for (int r = 0; r < x.rows(); ++r) {
        for (int c = 0; c < x.cols(); ++c) {
            out(r, c) = x(mod(r + t.t2, x.rows()), mod(c + t.t1, x.cols()));
        }
    }
    return out;
}

Array2D<int> coverage_counts(const GridGeometry& geom, const std::vector<Shift>& shifts)
{
    Array2D<int> counts(geom.n(), geom.n(), 0);
    for (const auto& t : shifts) {
        for (const auto& px : shifted_window(geom, t)) {
            if (!px.exterior) ++counts(px.row, px.col);
        }
    }
    return counts;
}

BlockPartition BlockPartition::under_shift(int m, int p)
{
    if (p < 1 || m <= 0 || m % p != 0) {
        throw Error("under-shift partition: p=" + std::to_string(p) + " does not divide m=" +
                    std::to_string(m));
    }
    const int s = m / p;
    std::vector<Range> segs;
    for (int i = 0; i < p; ++i) segs.push_back({i * s, (i + 1) * s});
    return BlockPartition(PartitionScheme::under_shift, m, p, std::move(segs));
}

BlockPartition BlockPartition::over_shift(int m, int tau)
{
    if (!(2 * tau > m && tau < m)) {
        throw Error("over-shift partition: need m/2 < tau < m, got m=" + std::to_string(m) +
                    " tau=" + std::to_string(tau));
    }
    std::vector<Range> segs{{0, m - tau}, {m - tau, tau}, {tau, m}};
    return BlockPartition(PartitionScheme::over_shift, m, tau, std::move(segs));
}

BlockMap partition(const ComplexImage& x, const BlockPartition& part)
{
    if (x.rows() != part.m() || x.cols() != part.m()) {
        throw Error("partition: image is not " + std::to_string(part.m()) + "x" +
                    std::to_string(part.m()));
    }
    BlockMap blocks;
    const auto& segs = part.segments();
    for (std::size_t j = 0; j < segs.size(); ++j) {
        for (std::size_t i = 0; i < segs.size(); ++i) {
            const Range rr = segs[j];
            const Range cr = segs[i];
            ComplexImage b(rr.size(), cr.size());
            for (int r = 0; r < rr.size(); ++r) {
                for (int c = 0; c < cr.size(); ++c) b(r, c) = x(rr.begin + r, cr.begin + c);
            }
            blocks.emplace(std::make_pair(static_cast<int>(i), static_cast<int>(j)), std::move(b));
        }
    }
    return blocks;
}

ComplexImage reassemble(const BlockMap& blocks, const BlockPartition& part)
{
    const auto& segs = part.segments();
    const int nb = part.blocks_per_axis();
    if (blocks.size() != static_cast<std::size_t>(nb) * nb) {
        throw Error("reassemble: expected " + std::to_string(nb * nb) + " blocks");
    }
    ComplexImage x(part.m(), part.m());
    for (const auto& [key, b] : blocks) {
        const auto [i, j] = key;
        if (i < 0 || j < 0 || i >= nb || j >= nb) throw Error("reassemble: block index out of range");
        const Range rr = segs[j];
        const Range cr = segs[i];
        if (b.rows() != rr.size() || b.cols() != cr.size()) {
            throw Error("reassemble: block size mismatch");
        }
        for (int r = 0; r < rr.size(); ++r) {
            for (int c = 0; c < cr.size(); ++c) x(rr.begin + r, cr.begin + c) = b(r, c);
        }
    }
    return x;
}

} // namespace ptycho
