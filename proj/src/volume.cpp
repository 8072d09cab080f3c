#include "bcmc/volume.hpp"

#include "bcmc/error.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <limits>
#include <string>

namespace bcmc {

namespace {

template <typename T>
T read_le(const std::byte* p)
{
    static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
}

void check_dims(const Extent3& dims)
{
    for (auto d : dims) {
        if (d == 0) {
            throw InvalidDimsError("volume extent must be non-zero along every axis");
        }
    }
}

} // namespace

std::size_t scalar_width(ScalarType type)
{
    switch (type) {
    case ScalarType::u8: return 1;
    case ScalarType::u16: return 2;
    case ScalarType::f32: return 4;
    }
    throw ParameterError("unknown scalar type");
}

std::uint64_t round_up_to_block(std::uint64_t n)
{
    return (n + kBlockEdge - 1) / kBlockEdge * kBlockEdge;
}

BlockGrid BlockGrid::for_padded_dims(const Extent3& padded_dims)
{
    BlockGrid grid;
    std::uint64_t total = 1;
    for (int a = 0; a < 3; ++a) {
        if (padded_dims[a] == 0 || padded_dims[a] % kBlockEdge != 0) {
            throw InvalidDimsError("padded extent must be a positive multiple of 4");
        }
        grid.nblocks[a] = static_cast<std::uint32_t>(padded_dims[a] / kBlockEdge);
        total *= grid.nblocks[a];
    }
    if (total > std::numeric_limits<std::uint32_t>::max()) {
        throw InvalidDimsError("block count exceeds 32-bit block IDs");
    }
    grid.total = static_cast<std::uint32_t>(total);
    return grid;
}

BlockCoord BlockGrid::coords(std::uint32_t id) const
{
    if (id >= total) {
        throw BoundsError("block id " + std::to_string(id) + " outside grid of " + std::to_string(total));
    }
    return {id % nblocks[0], (id / nblocks[0]) % nblocks[1], id / (nblocks[0] * nblocks[1])};
}

std::uint32_t BlockGrid::id(const BlockCoord& c) const
{
    if (c[0] >= nblocks[0] || c[1] >= nblocks[1] || c[2] >= nblocks[2]) {
        throw BoundsError("block coordinate outside grid");
    }
    return c[0] + nblocks[0] * (c[1] + nblocks[1] * c[2]);
}

VolumeF32 make_volume(const Extent3& dims, std::span<const float> values)
{
    check_dims(dims);
    const std::uint64_t n = dims[0] * dims[1] * dims[2];
    if (values.size() != n) {
        throw InputSizeError("expected " + std::to_string(n) + " values, got " + std::to_string(values.size()));
    }

    VolumeF32 vol;
    vol.dims = dims;
    for (int a = 0; a < 3; ++a) {
        vol.padded_dims[a] = round_up_to_block(dims[a]);
    }
    vol.values.resize(vol.padded_dims[0] * vol.padded_dims[1] * vol.padded_dims[2]);

    float lo = std::numeric_limits<float>::infinity();
    float hi = -std::numeric_limits<float>::infinity();
    for (std::uint64_t z = 0; z < vol.padded_dims[2]; ++z) {
        const auto sz = std::min(z, dims[2] - 1);
        for (std::uint64_t y = 0; y < vol.padded_dims[1]; ++y) {
            const auto sy = std::min(y, dims[1] - 1);
            for (std::uint64_t x = 0; x < vol.padded_dims[0]; ++x) {
                const auto sx = std::min(x, dims[0] - 1);
                const float v = values[sx + dims[0] * (sy + dims[1] * sz)];
                vol.values[vol.index(x, y, z)] = v;
                if (x < dims[0] && y < dims[1] && z < dims[2]) {
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            }
        }
    }
    vol.value_range = {lo, hi};
    return vol;
}

VolumeF32 load_raw(std::span<const std::byte> bytes, const Extent3& dims, ScalarType type)
{
    check_dims(dims);
    const std::size_t width = scalar_width(type);
    const std::uint64_t n = dims[0] * dims[1] * dims[2];
    if (bytes.size() != n * width) {
        throw InputSizeError("raw volume has " + std::to_string(bytes.size()) + " bytes, expected " +
                             std::to_string(n * width));
    }

    std::vector<float> values(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::byte* p = bytes.data() + i * width;
        switch (type) {
        case ScalarType::u8: values[i] = static_cast<float>(std::to_integer<std::uint8_t>(*p)); break;
        case ScalarType::u16: values[i] = static_cast<float>(read_le<std::uint16_t>(p)); break;
        case ScalarType::f32: values[i] = read_le<float>(p); break;
        }
    }
    return make_volume(dims, values);
}

std::array<float, kBlockVoxels> extract_block(const VolumeF32& vol, const BlockGrid& grid, std::uint32_t id)
{
    const BlockCoord b = grid.coords(id);
    std::array<float, kBlockVoxels> out{};
    for (std::uint32_t z = 0; z < kBlockEdge; ++z) {
        for (std::uint32_t y = 0; y < kBlockEdge; ++y) {
            for (std::uint32_t x = 0; x < kBlockEdge; ++x) {
                out[x + 4 * (y + 4 * z)] = vol.at(b[0] * 4 + x, b[1] * 4 + y, b[2] * 4 + z);
            }
        }
    }
    return out;
}

BlockRanges compute_block_ranges(const VolumeF32& vol)
{
    const BlockGrid grid = BlockGrid::for_padded_dims(vol.padded_dims);
    BlockRanges ranges;
    ranges.mins.resize(grid.total);
    ranges.maxs.resize(grid.total);
    for (std::uint32_t id = 0; id < grid.total; ++id) {
        const auto block = extract_block(vol, grid, id);
        const auto [lo, hi] = std::minmax_element(block.begin(), block.end());
        ranges.mins[id] = *lo;
        ranges.maxs[id] = *hi;
    }
    return ranges;
}

} // namespace bcmc
