#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ptycho {

using Complex = std::complex<double>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense row-major 2D array. Row index runs along the second lattice axis,
/// column index along the first.
template <class T>
class Array2D {
public:
    Array2D() = default;
    Array2D(int rows, int cols, T fill = T{})
        : rows_(rows), cols_(cols)
    {
        if (rows < 0 || cols < 0) {
            throw Error("Array2D: negative extent");
        }
        data_.assign(static_cast<std::size_t>(rows) * cols, fill);
    }
    Array2D(int rows, int cols, std::vector<T> data)
        : rows_(rows), cols_(cols), data_(std::move(data))
    {
        if (rows < 0 || cols < 0 || data_.size() != static_cast<std::size_t>(rows) * cols) {
            throw Error("Array2D: data length does not match " + std::to_string(rows) + "x" +
                        std::to_string(cols));
        }
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    const T& operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    std::span<T> flat() { return data_; }
    std::span<const T> flat() const { return data_; }
    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    auto begin() { return data_.begin(); }
    auto end() { return data_.end(); }
    auto begin() const { return data_.begin(); }
    auto end() const { return data_.end(); }

    bool same_shape(const Array2D& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    bool operator==(const Array2D&) const = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<T> data_;
};

using ComplexImage = Array2D<Complex>;
using RealImage = Array2D<double>;

inline double norm2(const ComplexImage& x)
{
    double s = 0.0;
    for (const auto& v : x) s += std::norm(v);
    return std::sqrt(s);
}

inline bool all_finite(const ComplexImage& x)
{
    for (const auto& v : x) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    }
    return true;
}

/// Wraps an angle into (-pi, pi].
inline double wrap_phase(double a)
{
    constexpr double two_pi = 2.0 * 3.14159265358979323846;
    double w = std::remainder(a, two_pi);
    if (w <= -3.14159265358979323846) w += two_pi;
    return w;
}

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

} // namespace ptycho
