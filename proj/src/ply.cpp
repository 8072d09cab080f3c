#include "bcmc/ply.hpp"

#include "bcmc/error.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace bcmc {

namespace {

static_assert(std::endian::native == std::endian::little, "PLY writer assumes a little-endian host");

template <typename T>
void put(std::vector<char>& buf, T v)
{
    char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    buf.insert(buf.end(), bytes, bytes + sizeof(T));
}

} // namespace

void write_ply(std::ostream& out, std::span<const float> positions)
{
    if (positions.size() % 9 != 0) throw ParameterError("triangle soup length must be a multiple of 9 floats");
    const std::size_t n_vertices = positions.size() / 3;
    const std::size_t n_faces = n_vertices / 3;
    out << "ply\nformat binary_little_endian 1.0\n"
        << "element vertex " << n_vertices << "\n"
        << "property float x\nproperty float y\nproperty float z\n"
        << "element face " << n_faces << "\n"
        << "property list uchar int vertex_indices\nend_header\n";

    std::vector<char> body;
    body.reserve(positions.size() * 4 + n_faces * 13);
    for (float p : positions) put(body, p);
    for (std::size_t f = 0; f < n_faces; ++f) {
        put<std::uint8_t>(body, 3);
        for (std::size_t k = 0; k < 3; ++k) put(body, static_cast<std::int32_t>(3 * f + k));
    }
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
}

void write_ply(const std::filesystem::path& path, std::span<const float> positions)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    write_ply(out, positions);
    if (!out) throw Error("failed writing " + path.string());
}

} // namespace bcmc
