#pragma once

// Single-threaded ground truth for tests. Shares only constant tables with
// the device kernels.

#include "bcmc/pipeline.hpp"
#include "bcmc/volume.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <set>
#include <span>
#include <vector>

namespace bcmc::reference {

struct TriangleSoup {
    /// x, y, z per vertex in voxel units; three vertices per triangle.
    std::vector<float> positions;
    /// Origin voxel of the cell that produced each triangle (serial MC only).
    std::vector<std::array<std::uint32_t, 3>> cells;

    std::size_t triangle_count() const { return positions.size() / 9; }
};

/// Marching Cubes over every cell inside the original extent, no quantization.
TriangleSoup serial_marching_cubes(const VolumeF32& vol, float isovalue);

struct LruStep {
    std::set<std::uint32_t> resident;
    std::uint32_t hits = 0;
    std::uint32_t misses = 0;
    std::uint32_t slot_count = 0;
};

/// (slot_count, n_new, n_avail) -> new slot count, used when n_new > n_avail.
using GrowthRule = std::function<std::uint32_t(std::uint32_t, std::uint32_t, std::uint32_t)>;

/// LRU over blocks: the oldest available slots are reused first, ties going
/// to the lowest slot index; new blocks are placed in ascending ID order.
std::vector<LruStep> serial_lru_simulate(std::uint32_t slot_count, const GrowthRule& grow,
                                         const std::vector<std::vector<std::uint32_t>>& active_sets);

/// Block-relative packed vertices to voxel-unit positions. Throws
/// FormatError on nonzero top bits or an out-of-grid block ID.
TriangleSoup dequantize(std::span<const PackedVertex> vertices, const BlockGrid& grid);

} // namespace bcmc::reference
