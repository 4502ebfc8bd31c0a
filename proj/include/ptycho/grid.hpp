#pragma once

#include <map>
#include <utility>
#include <vector>

#include "ptycho/array2d.hpp"

namespace ptycho {

enum class BoundaryKind { periodic, dark, bright };

struct Boundary {
    BoundaryKind kind = BoundaryKind::periodic;
    Complex bright_value{0.0, 0.0};

    static Boundary periodic() { return {}; }
    static Boundary dark() { return {BoundaryKind::dark, {}}; }
    static Boundary bright(Complex value) { return {BoundaryKind::bright, value}; }

    /// Value an exterior pixel takes (0 for dark, the constant for bright).
    Complex exterior_value() const { return kind == BoundaryKind::bright ? bright_value : Complex{}; }
};

/// Integer shift t = (t1, t2); t1 moves along columns, t2 along rows.
struct Shift {
    int t1 = 0;
    int t2 = 0;
    bool operator==(const Shift&) const = default;
    Shift operator+(const Shift& o) const { return {t1 + o.t1, t2 + o.t2}; }
    Shift operator-(const Shift& o) const { return {t1 - o.t1, t2 - o.t2}; }
};

/// Object domain Z_n^2, probe domain Z_m^2 and the boundary regime.
class GridGeometry {
public:
    GridGeometry(int n, int m, Boundary boundary = Boundary::periodic());

    int n() const { return n_; }
    int m() const { return m_; }
    const Boundary& boundary() const { return boundary_; }
    bool periodic() const { return boundary_.kind == BoundaryKind::periodic; }

private:
    int n_;
    int m_;
    Boundary boundary_;
};

/// One pixel of a shifted window. (row, col) are object coordinates, reduced
/// mod n under periodic boundary and left raw (possibly outside [0,n)) otherwise.
struct WindowPixel {
    int row = 0;
    int col = 0;
    bool exterior = false;
    bool operator==(const WindowPixel&) const = default;
};

/// The m*m coordinates of the t-shifted window, in row-major local order.
std::vector<WindowPixel> shifted_window(const GridGeometry& geom, Shift t);

/// Object restricted to the t-shifted window. Exterior pixels take the
/// boundary value.
ComplexImage restrict_to_window(const ComplexImage& x, const GridGeometry& geom, Shift t);

/// Periodic translation: result(n) = x(n + t).
ComplexImage cyclic_shift(const ComplexImage& x, Shift t);

/// Number of windows covering each object pixel (exterior pixels ignored).
Array2D<int> coverage_counts(const GridGeometry& geom, const std::vector<Shift>& shifts);

/// Half-open pixel range [begin, end).
struct Range {
    int begin = 0;
    int end = 0;
    int size() const { return end - begin; }
    bool operator==(const Range&) const = default;
};

enum class PartitionScheme { under_shift, over_shift };

/// Block structure of an m*m window. Block (i, j) spans column segment i and
/// row segment j.
class BlockPartition {
public:
    /// p*p equal blocks of side m/p; requires p >= 1 and p | m.
    static BlockPartition under_shift(int m, int p);
    /// 3*3 blocks with segments [0,m-tau), [m-tau,tau), [tau,m); requires m/2 < tau < m.
    static BlockPartition over_shift(int m, int tau);

    PartitionScheme scheme() const { return scheme_; }
    int m() const { return m_; }
    /// p for under-shift, tau for over-shift.
    int parameter() const { return param_; }
    int blocks_per_axis() const { return static_cast<int>(segments_.size()); }
    const std::vector<Range>& segments() const { return segments_; }

private:
    BlockPartition(PartitionScheme s, int m, int param, std::vector<Range> segs)
        : scheme_(s), m_(m), param_(param), segments_(std::move(segs)) {}

    PartitionScheme scheme_;
    int m_;
    int param_;
    std::vector<Range> segments_;
};

using BlockMap = std::map<std::pair<int, int>, ComplexImage>;

/// Splits an m*m image into its blocks, keyed by (i, j).
BlockMap partition(const ComplexImage& x, const BlockPartition& part);

/// Inverse of partition().
ComplexImage reassemble(const BlockMap& blocks, const BlockPartition& part);

} // namespace ptycho
