#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ptycho/array2d.hpp"

namespace ptycho {

/// Names accepted by synthetic_object().
std::vector<std::string> synthetic_object_names();

/// Nonvanishing n x n test objects:
///   constant        all ones
///   ramp            modulus 0.5..1 rising along columns, phase rising along rows
///   random_complex  modulus uniform on [0.5, 1], phase uniform on [0, 2pi)
///   cib_like        real and imaginary parts are independent smooth random
///                   fields scaled to [0.1, 1]
ComplexImage synthetic_object(const std::string& name, int n, std::uint64_t seed);

/// exp(i phi) with phi i.i.d. uniform on [0, 2pi).
ComplexImage random_phase_probe(int m, std::uint64_t seed);

/// Complex Gaussian entries; for property tests.
ComplexImage random_complex_image(int rows, int cols, std::uint64_t seed);

} // namespace ptycho
