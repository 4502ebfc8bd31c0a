#include "ptycho/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ptycho {

namespace {

// Periodic Gaussian blur of white noise, rescaled to [lo, hi].
RealImage smooth_field(int n, double width, double lo, double hi, std::mt19937_64& rng)
{
    std::normal_distribution<double> g(0.0, 1.0);
    RealImage x(n, n);
    for (auto& v : x) v = g(rng);

    const int rad = static_cast<int>(std::ceil(3 * width));
    std::vector<double> k(2 * rad + 1);
    for (int i = -rad; i <= rad; ++i) k[i + rad] = std::exp(-0.5 * i * i / (width * width));

    RealImage tmp(n, n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            double s = 0.0;
            for (int i = -rad; i <= rad; ++i) s += k[i + rad] * x(r, ((c + i) % n + n) % n);
            tmp(r, c) = s;
        }
    }
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            double s = 0.0;
            for (int i = -rad; i <= rad; ++i) s += k[i + rad] * tmp(((r + i) % n + n) % n, c);
            x(r, c) = s;
        }
    }
    const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
    const double a = *mn, span = *mx - *mn;
    for (auto& v : x) v = span > 0 ? lo + (hi - lo) * (v - a) / span : hi;
    return x;
}

} // namespace

std::vector<std::string> synthetic_object_names() { return {"constant", "ramp", "random_complex", "cib_like"}; }

ComplexImage synthetic_object(const std::string& name, int n, std::uint64_t seed)
{
    if (n < 1) throw Error("synthetic object: n must be >= 1");
    ComplexImage f(n, n, Complex{1.0, 0.0});
    if (name == "constant") return f;
    if (name == "ramp") {
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) f(r, c) = std::polar(0.5 + 0.5 * c / n, kPi * r / n);
        }
        return f;
    }
    std::mt19937_64 rng(seed);
    if (name == "random_complex") {
        std::uniform_real_distribution<double> amp(0.5, 1.0), ph(0.0, kTwoPi);
        for (auto& v : f) {
            const double a = amp(rng);
            v = std::polar(a, ph(rng));
        }
        return f;
    }
    if (name == "cib_like") {
        const double width = std::max(1.0, n / 32.0);
        const RealImage re = smooth_field(n, width, 0.1, 1.0, rng);
        const RealImage im = smooth_field(n, width, 0.1, 1.0, rng);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = {re[i], im[i]};
        return f;
    }
    throw Error("unknown synthetic object '" + name + "'");
}

ComplexImage random_phase_probe(int m, std::uint64_t seed)
{
    if (m < 1) throw Error("random probe: m must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ph(0.0, kTwoPi);
    ComplexImage p(m, m);
    for (auto& v : p) v = std::polar(1.0, ph(rng));
    return p;
}

ComplexImage random_complex_image(int rows, int cols, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexImage x(rows, cols);
    for (auto& v : x) {
        const double a = g(rng);
        v = {a, g(rng)};
    }
    return x;
}

} // namespace ptycho
