#pragma once

// Block-compressed Marching Cubes:
//   select_active -> cache_update -> filter_occupied -> count_vertices -> compute_vertices
// Surfaces are triangle soups of packed vertices: 10-bit block-local
// coordinates plus the owning block ID.

#include "bcmc/block_cache.hpp"
#include "bcmc/codec.hpp"
#include "bcmc/device.hpp"
#include "bcmc/device_volume.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bcmc {

inline constexpr std::uint32_t kQuantMax = 1023;

struct PackedVertex {
    std::uint32_t word0 = 0; ///< x | y << 10 | z << 20
    std::uint32_t word1 = 0; ///< block ID

    bool operator==(const PackedVertex&) const = default;
};

std::uint32_t quantize_coordinate(float local);
PackedVertex pack_vertex(std::uint32_t qx, std::uint32_t qy, std::uint32_t qz, std::uint32_t block);

struct FrameStats {
    float isovalue = 0.f;
    std::vector<PassTiming> passes;
    double total_ms = 0.0;
    std::uint32_t n_active = 0;
    std::uint32_t n_new = 0;
    std::uint32_t n_occ = 0;
    std::uint32_t vertex_count = 0;
    double hit_rate = 1.0;
    std::uint64_t cache_bytes = 0;
    bool cache_grew = false;
};

struct SurfaceResult {
    std::vector<PackedVertex> vertices;
    std::uint32_t vertex_count = 0;
    FrameStats stats;
};

/// Raised when a frame runs out of device memory; carries what the frame
/// had computed so far.
class SurfaceOutOfMemoryError : public OutOfMemoryError {
public:
    SurfaceOutOfMemoryError(const std::string& what, FrameStats stats)
        : OutOfMemoryError(what), stats_(std::move(stats))
    {
    }
    const FrameStats& stats() const { return stats_; }

private:
    FrameStats stats_;
};

/// Buffers shared by the per-block surface kernels.
struct SurfaceInputs {
    const DeviceVolume& volume;
    const Buffer<std::uint32_t>& active;
    const Buffer<std::int32_t>& block_slot;
    const Buffer<float>& pool;
    float isovalue;
};

// Kernels, exposed for backend-equivalence testing.

void select_active_blocks(Device& device, const DeviceVolume& volume, float isovalue, Buffer<std::uint32_t>& active);

/// One workgroup per listed block: out[64 i + cell] = 1 if the cell is processable.
void mark_processable(Device& device, const SurfaceInputs& in, const Buffer<std::uint32_t>& block_ids,
                      std::uint32_t n_blocks, Buffer<std::uint32_t>& out);

void filter_occupied(Device& device, const SurfaceInputs& in, const Buffer<std::uint32_t>& active_ids,
                     std::uint32_t n_active, Buffer<std::uint32_t>& occupied);

void count_block_vertices(Device& device, const SurfaceInputs& in, const Buffer<std::uint32_t>& occupied_ids,
                          std::uint32_t n_occ, Buffer<std::uint32_t>& counts);

/// `vertices` holds two words per vertex.
void compute_vertices(Device& device, const SurfaceInputs& in, const Buffer<std::uint32_t>& occupied_ids,
                      std::uint32_t n_occ, const Buffer<std::uint32_t>& offsets, Buffer<std::uint32_t>& vertices);

struct PipelineOptions {
    double cache_fraction = 0.10;
};

class IsosurfacePipeline {
public:
    IsosurfacePipeline(Device& device, const CompressedVolume& cv, PipelineOptions options = {});

    /// Throws SurfaceOutOfMemoryError when the cache or vertex buffer cannot grow.
    SurfaceResult compute_surface(float isovalue, bool download_vertices = true);

    const DeviceVolume& volume() const { return volume_; }
    const BlockCache& cache() const { return cache_; }
    std::size_t vertex_capacity() const { return vertex_capacity_; }

private:
    Device& device_;
    DeviceVolume volume_;
    BlockCache cache_;
    std::uint32_t total_;

    Buffer<std::uint32_t> active_;
    Buffer<std::uint32_t> active_offsets_;
    Buffer<std::uint32_t> active_ids_;
    Buffer<std::uint32_t> occupied_;
    Buffer<std::uint32_t> occupied_offsets_;
    Buffer<std::uint32_t> occupied_ids_;
    Buffer<std::uint32_t> block_counts_;
    Buffer<std::uint32_t> block_offsets_;
    Buffer<std::uint32_t> scan_total_;
    Buffer<std::uint32_t> vertices_;
    std::size_t vertex_capacity_ = 0;
};

} // namespace bcmc
