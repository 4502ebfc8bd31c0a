#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ptycho/grid.hpp"

namespace ptycho {

enum class ScanKind { raster, perturbed_separable, perturbed_full };

const char* to_string(ScanKind k);
ScanKind scan_kind_from_string(const std::string& s);

/// A scan position with its lattice index (k, l).
struct ScanPosition {
    int k = 0;
    int l = 0;
    Shift t;
    bool operator==(const ScanPosition&) const = default;
};

/// Raster or perturbed-raster scan t_kl = tau*(k,l) + delta. Positions are
/// ordered with k outermost.
class ScanPattern {
public:
    int n() const { return n_; }
    int tau() const { return tau_; }
    int q() const { return q_; }
    ScanKind kind() const { return kind_; }
    const std::vector<ScanPosition>& positions() const { return positions_; }
    std::vector<Shift> shifts() const;
    const ScanPosition& at(int k, int l) const;

    /// Separable perturbation tables (zeros for raster, empty for full).
    const std::vector<int>& delta1() const { return delta1_; }
    const std::vector<int>& delta2() const { return delta2_; }
    /// Full perturbation tables, q*q row-major by (k, l); empty unless full.
    const std::vector<int>& delta1_full() const { return delta1_full_; }
    const std::vector<int>& delta2_full() const { return delta2_full_; }

    /// Largest |delta| over both axes.
    int max_abs_perturbation() const;

    bool operator==(const ScanPattern&) const = default;

    friend ScanPattern raster(int n, int tau);
    friend ScanPattern perturbed_separable(int n, int tau, std::vector<int> d1, std::vector<int> d2);
    friend ScanPattern perturbed_full(int n, int tau, std::vector<std::vector<int>> d1,
                                      std::vector<std::vector<int>> d2);
    friend ScanPattern read_scan_pattern(std::istream& in);

private:
    int n_ = 0;
    int tau_ = 0;
    int q_ = 0;
    ScanKind kind_ = ScanKind::raster;
    std::vector<int> delta1_, delta2_;
    std::vector<int> delta1_full_, delta2_full_;
    std::vector<ScanPosition> positions_;
};

ScanPattern raster(int n, int tau);
ScanPattern perturbed_separable(int n, int tau, std::vector<int> d1, std::vector<int> d2);
ScanPattern perturbed_full(int n, int tau, std::vector<std::vector<int>> d1,
                           std::vector<std::vector<int>> d2);

/// Separable table of q i.i.d. integers uniform on [-d, d] with the first entry 0.
std::vector<int> random_separable_delta(int q, int d, std::uint64_t seed);
/// q*q table of i.i.d. integers uniform on [-d, d].
std::vector<std::vector<int>> random_full_delta(int q, int d, std::uint64_t seed);

/// a_k = 2 delta_{k+1} - delta_k - delta_{k+2}, k = 0..q-3.
std::vector<int> second_differences(const std::vector<int>& delta);

struct UniquenessReport {
    bool conditions_evaluated = false;  ///< false for full-grid patterns
    std::vector<int> a1, a2;
    std::vector<bool> passes_small1, passes_cover2, passes_small2;
    std::vector<int> qualifying;  ///< indices j_k passing all three conditions
    int gcd1 = 0;
    int gcd2 = 0;
    bool coprime_ok = false;
    double overlap_ratio = 0.0;
    int max_abs_delta = 0;
    /// max|delta| < min(tau, m - tau)
    bool perturbation_bounded = false;
};

UniquenessReport audit(const ScanPattern& pattern, int m);

/// Brute-force set check: builds the validity domain for the triplet
/// (t_kl, t_{k+1,l}, t_{k+2,l}) (axis 1) or (t_kl, t_{k,l+1}, t_{k,l+2}) (axis 2),
/// unions its translates over every scan position mod n and reports whether
/// the union covers Z_n^2.
bool coverage_union(const ScanPattern& pattern, int m, int k, int l, int axis);

/// Text table: "tau q kind" then one "k l t1 t2" line per shift.
void write_scan_pattern(std::ostream& out, const ScanPattern& pattern);
ScanPattern read_scan_pattern(std::istream& in);

} // namespace ptycho
