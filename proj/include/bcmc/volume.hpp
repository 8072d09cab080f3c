#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace bcmc {

inline constexpr std::uint32_t kBlockEdge = 4;
inline constexpr std::uint32_t kBlockVoxels = 64;

using Extent3 = std::array<std::uint64_t, 3>;
using BlockCoord = std::array<std::uint32_t, 3>;

enum class ScalarType : std::uint32_t { u8 = 0, u16 = 1, f32 = 2 };

std::size_t scalar_width(ScalarType type);

struct ValueRange {
    float min = 0.f;
    float max = 0.f;
};

/// Row-major float volume padded to a multiple of 4 voxels per axis.
///
/// `dims` is the original extent; voxels outside it replicate the nearest
/// boundary voxel. `value_range` covers the original extent only.
struct VolumeF32 {
    Extent3 dims{};
    Extent3 padded_dims{};
    std::vector<float> values;
    ValueRange value_range;

    std::size_t index(std::uint64_t x, std::uint64_t y, std::uint64_t z) const
    {
        return static_cast<std::size_t>(x + padded_dims[0] * (y + padded_dims[1] * z));
    }
    float at(std::uint64_t x, std::uint64_t y, std::uint64_t z) const { return values[index(x, y, z)]; }
};

/// Decomposition of a padded volume into 4^3 blocks, IDs in row-major order.
struct BlockGrid {
    BlockCoord nblocks{};
    std::uint32_t total = 0;

    static BlockGrid for_padded_dims(const Extent3& padded_dims);

    /// Throws BoundsError when `id >= total`.
    BlockCoord coords(std::uint32_t id) const;
    /// Throws BoundsError when any coordinate is outside the grid.
    std::uint32_t id(const BlockCoord& c) const;

    bool operator==(const BlockGrid&) const = default;
};

struct BlockRanges {
    std::vector<float> mins;
    std::vector<float> maxs;
};

std::uint64_t round_up_to_block(std::uint64_t n);

/// Widens `bytes` (little-endian) to float and pads by edge-clamp replication.
VolumeF32 load_raw(std::span<const std::byte> bytes, const Extent3& dims, ScalarType type);

/// Builds a padded volume from an unpadded row-major float array of extent `dims`.
VolumeF32 make_volume(const Extent3& dims, std::span<const float> values);

BlockRanges compute_block_ranges(const VolumeF32& vol);

/// Copies block `id` of a padded volume into a row-major 4^3 array.
std::array<float, kBlockVoxels> extract_block(const VolumeF32& vol, const BlockGrid& grid, std::uint32_t id);

} // namespace bcmc
