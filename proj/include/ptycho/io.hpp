#pragma once

#include <iosfwd>
#include <string>

#include "ptycho/forward.hpp"

namespace ptycho {

/// Raised for malformed or unreadable files.
class FormatError : public Error {
public:
    using Error::Error;
};

// PTYC: "PTYC rows cols\n" followed by rows*cols (re, im) little-endian doubles.
void write_ptyc(std::ostream& out, const ComplexImage& img);
ComplexImage read_ptyc(std::istream& in);
void save_ptyc(const std::string& path, const ComplexImage& img);
ComplexImage load_ptyc(const std::string& path);

// PTYD: "PTYD os m count\n", then per frame "k l t1 t2\n" followed by
// (os*m)^2 little-endian doubles, row-major.
void write_ptyd(std::ostream& out, const DiffractionSet& data);
DiffractionSet read_ptyd(std::istream& in);
void save_ptyd(const std::string& path, const DiffractionSet& data);
DiffractionSet load_ptyd(const std::string& path);

} // namespace ptycho
