#ifndef GPSTOMO_FIELD_HPP
#define GPSTOMO_FIELD_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "linalg.hpp"

namespace gpstomo {

/// Scalar node values on a grid, x-fastest.
struct Field {
    Grid3 grid;
    Vector values;

    Field() = default;
    explicit Field(const Grid3& g, double fill = 0.0) : grid(g), values(g.node_count(), fill) {}
    Field(const Grid3& g, Vector v) : grid(g), values(std::move(v))
    {
        if (values.size() != grid.node_count())
            throw Error(ErrorKind::dimension_mismatch, "field length does not match grid");
    }

    std::size_t size() const { return values.size(); }
    double& operator()(std::size_t i, std::size_t j, std::size_t k) { return values[grid.index(i, j, k)]; }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const { return values[grid.index(i, j, k)]; }
};

inline constexpr const char* field_magic = "GPSTOMO-FLD1";

// Header line: magic nx ny nz x_min x_max y_min y_max z_min z_max, then
// nx*ny*nz little-endian float64 values.
inline void write_field(const std::filesystem::path& path, const Field& f)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
    const Bounds& b = f.grid.bounds;
    std::ostringstream hdr;
    hdr << std::setprecision(17) << field_magic << ' ' << f.grid.nx << ' ' << f.grid.ny << ' ' << f.grid.nz << ' '
        << b.x_min << ' ' << b.x_max << ' ' << b.y_min << ' ' << b.y_max << ' ' << b.z_min << ' ' << b.z_max << '\n';
    os << hdr.str();
    for (double v : f.values) {
        auto bits = std::bit_cast<std::uint64_t>(v);
        unsigned char bytes[8];
        for (int k = 0; k < 8; ++k)
            bytes[k] = static_cast<unsigned char>((bits >> (8 * k)) & 0xffU);
        os.write(reinterpret_cast<const char*>(bytes), 8);
    }
    if (!os)
        throw Error(ErrorKind::io, "write failed for " + path.string());
}

inline Field read_field(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw Error(ErrorKind::io, "cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line))
        throw Error(ErrorKind::io, path.string() + ": missing header");
    std::istringstream hdr(line);
    std::string magic;
    std::size_t nx = 0, ny = 0, nz = 0;
    Bounds b;
    hdr >> magic >> nx >> ny >> nz >> b.x_min >> b.x_max >> b.y_min >> b.y_max >> b.z_min >> b.z_max;
    if (!hdr || magic != field_magic)
        throw Error(ErrorKind::io, path.string() + ": bad field header");
    Field f(make_grid(nx, ny, nz, b));
    for (double& v : f.values) {
        unsigned char bytes[8];
        if (!is.read(reinterpret_cast<char*>(bytes), 8))
            throw Error(ErrorKind::io, path.string() + ": truncated payload");
        std::uint64_t bits = 0;
        for (int k = 0; k < 8; ++k)
            bits |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
        v = std::bit_cast<double>(bits);
    }
    return f;
}

} // namespace gpstomo

#endif // GPSTOMO_FIELD_HPP
