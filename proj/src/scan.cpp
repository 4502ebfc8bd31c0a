#include "ptycho/scan.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

namespace ptycho {

namespace {

int mod(int a, int n)
{
    int r = a % n;
    return r < 0 ? r + n : r;
}

int checked_q(int n, int tau)
{
    if (n <= 0 || tau <= 0 || n % tau != 0) {
        throw Error("scan: step tau=" + std::to_string(tau) + " does not divide n=" +
                    std::to_string(n));
    }
    return n / tau;
}

} // namespace

const char* to_string(ScanKind k)
{
    switch (k) {
    case ScanKind::raster: return "raster";
    case ScanKind::perturbed_separable: return "perturbed_separable";
    case ScanKind::perturbed_full: return "perturbed_full";
    }
    return "?";
}

ScanKind scan_kind_from_string(const std::string& s)
{
    if (s == "raster") return ScanKind::raster;
    if (s == "perturbed_separable" || s == "separable") return ScanKind::perturbed_separable;
    if (s == "perturbed_full" || s == "full") return ScanKind::perturbed_full;
    throw Error("unknown scan kind '" + s + "'");
}

std::vector<Shift> ScanPattern::shifts() const
{
    std::vector<Shift> out;
    out.reserve(positions_.size());
    for (const auto& p : positions_) out.push_back(p.t);
    return out;
}

const ScanPosition& ScanPattern::at(int k, int l) const
{
    if (k < 0 || l < 0 || k >= q_ || l >= q_) {
        throw Error("scan: lattice index (" + std::to_string(k) + "," + std::to_string(l) +
                    ") outside q=" + std::to_string(q_));
    }
    return positions_[static_cast<std::size_t>(k) * q_ + l];
}

int ScanPattern::max_abs_perturbation() const
{
    int mx = 0;
    for (const auto* v : {&delta1_, &delta2_, &delta1_full_, &delta2_full_}) {
        for (int d : *v) mx = std::max(mx, std::abs(d));
    }
    return mx;
}

ScanPattern raster(int n, int tau)
{
    const int q = checked_q(n, tau);
    return perturbed_separable(n, tau, std::vector<int>(q, 0), std::vector<int>(q, 0));
}

ScanPattern perturbed_separable(int n, int tau, std::vector<int> d1, std::vector<int> d2)
{
    const int q = checked_q(n, tau);
    if (d1.size() != static_cast<std::size_t>(q) || d2.size() != static_cast<std::size_t>(q)) {
        throw Error("perturbed_separable: perturbation tables must have length q=" +
                    std::to_string(q));
    }
    if (d1[0] != 0 || d2[0] != 0) {
        throw Error("perturbed_separable: first perturbation must be 0 on both axes");
    }
    ScanPattern p;
    p.n_ = n;
    p.tau_ = tau;
    p.q_ = q;
    const bool zero = std::all_of(d1.begin(), d1.end(), [](int v) { return v == 0; }) &&
                      std::all_of(d2.begin(), d2.end(), [](int v) { return v == 0; });
    p.kind_ = zero ? ScanKind::raster : ScanKind::perturbed_separable;
    for (int k = 0; k < q; ++k) {
        for (int l = 0; l < q; ++l) {
            p.positions_.push_back({k, l, {tau * k + d1[k], tau * l + d2[l]}});
        }
    }
    p.delta1_ = std::move(d1);
    p.delta2_ = std::move(d2);
    return p;
}

ScanPattern perturbed_full(int n, int tau, std::vector<std::vector<int>> d1,
                           std::vector<std::vector<int>> d2)
{
    const int q = checked_q(n, tau);
    auto check = [q](const std::vector<std::vector<int>>& d) {
        if (d.size() != static_cast<std::size_t>(q)) return false;
        return std::all_of(d.begin(), d.end(),
                           [q](const auto& row) { return row.size() == static_cast<std::size_t>(q); });
    };
    if (!check(d1) || !check(d2)) {
        throw Error("perturbed_full: perturbation tables must be q x q with q=" + std::to_string(q));
    }
    ScanPattern p;
    p.n_ = n;
    p.tau_ = tau;
    p.q_ = q;
    bool zero = true;
    for (int k = 0; k < q; ++k) {
        for (int l = 0; l < q; ++l) {
            p.positions_.push_back({k, l, {tau * k + d1[k][l], tau * l + d2[k][l]}});
            p.delta1_full_.push_back(d1[k][l]);
            p.delta2_full_.push_back(d2[k][l]);
            zero = zero && d1[k][l] == 0 && d2[k][l] == 0;
        }
    }
    if (zero) return raster(n, tau);
    p.kind_ = ScanKind::perturbed_full;
    return p;
}

std::vector<int> random_separable_delta(int q, int d, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dist(-d, d);
    std::vector<int> out(static_cast<std::size_t>(q), 0);
    for (int k = 1; k < q; ++k) out[k] = dist(rng);
    return out;
}

std::vector<std::vector<int>> random_full_delta(int q, int d, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dist(-d, d);
    std::vector<std::vector<int>> out(q, std::vector<int>(q));
    for (auto& row : out) {
        for (auto& v : row) v = dist(rng);
    }
    return out;
}

std::vector<int> second_differences(const std::vector<int>& delta)
{
    if (delta.size() < 3) {
        throw Error("second_differences: need at least 3 perturbations, got " +
                    std::to_string(delta.size()));
    }
    std::vector<int> a(delta.size() - 2);
    for (std::size_t k = 0; k + 2 < delta.size(); ++k) {
        a[k] = 2 * delta[k + 1] - delta[k] - delta[k + 2];
    }
    return a;
}

UniquenessReport audit(const ScanPattern& pattern, int m)
{
    UniquenessReport rep;
    const int tau = pattern.tau();
    const int q = pattern.q();
    rep.overlap_ratio = std::max(0.0, 1.0 - static_cast<double>(tau) / m);
    rep.max_abs_delta = pattern.max_abs_perturbation();
    rep.perturbation_bounded = tau < m && rep.max_abs_delta < std::min(tau, m - tau);
    if (pattern.kind() == ScanKind::perturbed_full || q < 3) return rep;

    rep.conditions_evaluated = true;
    const std::vector<int>* deltas[2] = {&pattern.delta1(), &pattern.delta2()};
    rep.a1 = second_differences(pattern.delta1());
    rep.a2 = second_differences(pattern.delta2());
    const std::vector<int>* as[2] = {&rep.a1, &rep.a2};

    // Largest step excess delta_{k'+1} - delta_{k'} per axis, including the
    // periodic step from the last position back to the first.
    int max_step[2];
    for (int i = 0; i < 2; ++i) {
        const auto& d = *deltas[i];
        int mx = d[0] - d[q - 1];
        for (int k = 0; k + 1 < q; ++k) mx = std::max(mx, d[k + 1] - d[k]);
        max_step[i] = mx;
    }

    const bool overlap = tau < m;
    for (int k = 0; k + 2 < q; ++k) {
        int s1 = 0, c2 = 0, s2 = 0;
        for (int i = 0; i < 2; ++i) {
            const auto& d = *deltas[i];
            const int a = std::abs((*as[i])[k]);
            const int e1 = a + d[k + 1] - d[k];
            const int e2 = d[k + 2] - d[k];
            const int e3 = a + max_step[i];
            if (i == 0) {
                s1 = e1;
                c2 = e2;
                s2 = e3;
            } else {
                s1 = std::max(s1, e1);
                c2 = std::max(c2, e2);
                s2 = std::max(s2, e3);
            }
        }
        const bool p1 = overlap && tau >= s1;
        const bool p2 = overlap && 2 * tau <= m - c2;
        const bool p3 = overlap && m - tau >= 1 + s2;
        rep.passes_small1.push_back(p1);
        rep.passes_cover2.push_back(p2);
        rep.passes_small2.push_back(p3);
        if (p1 && p2 && p3) rep.qualifying.push_back(k);
    }
    for (int k : rep.qualifying) {
        rep.gcd1 = std::gcd(rep.gcd1, std::abs(rep.a1[k]));
        rep.gcd2 = std::gcd(rep.gcd2, std::abs(rep.a2[k]));
    }
    rep.coprime_ok = rep.gcd1 == 1 && rep.gcd2 == 1;
    return rep;
}

bool coverage_union(const ScanPattern& pattern, int m, int k, int l, int axis)
{
    const int q = pattern.q();
    const int n = pattern.n();
    if (axis != 1 && axis != 2) throw Error("coverage_union: axis must be 1 or 2");
    if (m <= 0) throw Error("coverage_union: m must be positive");
    const int k2 = axis == 1 ? k + 2 : k;
    const int l2 = axis == 2 ? l + 2 : l;
    if (k < 0 || l < 0 || k2 >= q || l2 >= q) {
        throw Error("coverage_union: triplet starting at (" + std::to_string(k) + "," +
                    std::to_string(l) + ") leaves the lattice");
    }
    const Shift t0 = pattern.at(k, l).t;
    const Shift t1 = pattern.at(axis == 1 ? k + 1 : k, axis == 2 ? l + 1 : l).t;
    const Shift t2 = pattern.at(k2, l2).t;
    const Shift s1 = t1 - t0;
    const Shift s2 = t2 - t1;
    const Shift a = s1 - s2;

    auto in_window = [m](int c, int r) { return c >= 0 && c < m && r >= 0 && r < m; };

    // Local validity set inside M^00 (coordinates relative to t_kl).
    std::vector<std::pair<int, int>> local;
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            const bool in_ma = in_window(c + a.t1, r + a.t2);
            const bool first = in_ma && in_window(c + s1.t1, r + s1.t2);
            const bool second = in_window(c - s2.t1, r - s2.t2);
            if ((first || second) && in_ma) local.emplace_back(r, c);
        }
    }

    std::vector<char> covered(static_cast<std::size_t>(n) * n, 0);
    for (const auto& pos : pattern.positions()) {
        for (const auto& [r, c] : local) {
            covered[static_cast<std::size_t>(mod(r + pos.t.t2, n)) * n + mod(c + pos.t.t1, n)] = 1;
        }
    }
    return std::all_of(covered.begin(), covered.end(), [](char v) { return v != 0; });
}

void write_scan_pattern(std::ostream& out, const ScanPattern& pattern)
{
    out << pattern.tau() << ' ' << pattern.q() << ' ' << to_string(pattern.kind()) << '\n';
    for (const auto& p : pattern.positions()) {
        out << p.k << ' ' << p.l << ' ' << p.t.t1 << ' ' << p.t.t2 << '\n';
    }
}

ScanPattern read_scan_pattern(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) throw Error("scan file: missing header");
    std::istringstream hs(line);
    int tau = 0, q = 0;
    std::string kind_str;
    if (!(hs >> tau >> q >> kind_str) || tau <= 0 || q <= 0) {
        throw Error("scan file: malformed header '" + line + "'");
    }
    const ScanKind kind = scan_kind_from_string(kind_str);
    const int n = tau * q;
    std::vector<std::vector<int>> d1(q, std::vector<int>(q)), d2(q, std::vector<int>(q));
    std::vector<char> seen(static_cast<std::size_t>(q) * q, 0);
    for (int i = 0; i < q * q; ++i) {
        if (!std::getline(in, line)) throw Error("scan file: expected " + std::to_string(q * q) + " shifts");
        std::istringstream ls(line);
        int k, l, t1, t2;
        if (!(ls >> k >> l >> t1 >> t2) || k < 0 || l < 0 || k >= q || l >= q) {
            throw Error("scan file: malformed shift line '" + line + "'");
        }
        seen[static_cast<std::size_t>(k) * q + l] = 1;
        d1[k][l] = t1 - tau * k;
        d2[k][l] = t2 - tau * l;
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
        throw Error("scan file: missing lattice indices");
    }
    if (kind == ScanKind::perturbed_full) return perturbed_full(n, tau, d1, d2);

    std::vector<int> s1(q), s2(q);
    for (int k = 0; k < q; ++k) s1[k] = d1[k][0];
    for (int l = 0; l < q; ++l) s2[l] = d2[0][l];
    for (int k = 0; k < q; ++k) {
        for (int l = 0; l < q; ++l) {
            if (d1[k][l] != s1[k] || d2[k][l] != s2[l]) {
                throw Error("scan file: shifts are not separable but kind is " + kind_str);
            }
        }
    }
    auto p = perturbed_separable(n, tau, s1, s2);
    if (kind == ScanKind::raster && p.kind() != ScanKind::raster) throw Error("scan file: kind '" + kind_str + "' does not match shifts");
    return p;
}

} // namespace ptycho
