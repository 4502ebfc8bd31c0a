#include "ptycho/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace ptycho {

namespace {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

void write_doubles(std::ostream& out, const double* v, std::size_t count)
{
    out.write(reinterpret_cast<const char*>(v), static_cast<std::streamsize>(count * sizeof(double)));
}

void read_doubles(std::istream& in, double* v, std::size_t count, const char* what)
{
    in.read(reinterpret_cast<char*>(v), static_cast<std::streamsize>(count * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != count * sizeof(double)) {
        throw FormatError(std::string(what) + ": truncated binary payload");
    }
}

std::string read_line(std::istream& in, const char* what)
{
    std::string line;
    if (!std::getline(in, line)) throw FormatError(std::string(what) + ": missing header line");
    return line;
}

} // namespace

void write_ptyc(std::ostream& out, const ComplexImage& img)
{
    out << "PTYC " << img.rows() << ' ' << img.cols() << '\n';
    write_doubles(out, reinterpret_cast<const double*>(img.data()), 2 * img.size());
}

ComplexImage read_ptyc(std::istream& in)
{
    std::istringstream hs(read_line(in, "PTYC"));
    std::string magic;
    int rows = -1, cols = -1;
    if (!(hs >> magic >> rows >> cols) || magic != "PTYC" || rows <= 0 || cols <= 0) {
        throw FormatError("PTYC: malformed header");
    }
    ComplexImage img(rows, cols);
    read_doubles(in, reinterpret_cast<double*>(img.data()), 2 * img.size(), "PTYC");
    if (!all_finite(img)) throw FormatError("PTYC: non-finite values");
    return img;
}

void write_ptyd(std::ostream& out, const DiffractionSet& data)
{
    out << "PTYD " << data.os << ' ' << data.m << ' ' << data.frames.size() << '\n';
    for (const auto& fr : data.frames) {
        out << fr.k << ' ' << fr.l << ' ' << fr.t.t1 << ' ' << fr.t.t2 << '\n';
        write_doubles(out, fr.magnitude.data(), fr.magnitude.size());
    }
}

DiffractionSet read_ptyd(std::istream& in)
{
    std::istringstream hs(read_line(in, "PTYD"));
    std::string magic;
    long os = -1, m = -1, count = -1;
    if (!(hs >> magic >> os >> m >> count) || magic != "PTYD" || os < 1 || m < 1 || count < 0 ||
        os * m > 1 << 16) {
        throw FormatError("PTYD: malformed header");
    }
    DiffractionSet data;
    data.os = static_cast<int>(os);
    data.m = static_cast<int>(m);
    const int side = data.side();
    for (long s = 0; s < count; ++s) {
        std::istringstream ls(read_line(in, "PTYD frame"));
        DiffractionFrame fr;
        if (!(ls >> fr.k >> fr.l >> fr.t.t1 >> fr.t.t2)) throw FormatError("PTYD: malformed frame line");
        fr.magnitude = RealImage(side, side);
        read_doubles(in, fr.magnitude.data(), fr.magnitude.size(), "PTYD");
        for (double v : fr.magnitude) {
            if (!(v >= 0.0) || !std::isfinite(v)) throw FormatError("PTYD: magnitudes must be finite and >= 0");
        }
        data.frames.push_back(std::move(fr));
    }
    return data;
}

void save_ptyc(const std::string& path, const ComplexImage& img)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    write_ptyc(out, img);
    if (!out) throw FormatError("write to '" + path + "' failed");
}

ComplexImage load_ptyc(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "'");
    return read_ptyc(in);
}

void save_ptyd(const std::string& path, const DiffractionSet& data)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    write_ptyd(out, data);
    if (!out) throw FormatError("write to '" + path + "' failed");
}

DiffractionSet load_ptyd(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "'");
    return read_ptyd(in);
}

} // namespace ptycho
