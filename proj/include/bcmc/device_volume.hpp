#pragma once

// A compressed volume resident on the device: the bitstream as u32 words
// (each block starts on a word boundary since block_bytes is a multiple of 8)
// plus the per-block range tables.

#include "bcmc/codec.hpp"
#include "bcmc/device.hpp"

#include <cstdint>

namespace bcmc {

struct DeviceVolume {
    Extent3 dims{};
    BlockGrid grid;
    std::uint32_t rate_bits = 0;
    std::uint32_t words_per_block = 0;
    Buffer<std::uint32_t> words;
    Buffer<float> mins;
    Buffer<float> maxs;
};

DeviceVolume upload_volume(Device& device, const CompressedVolume& cv);

/// One thread per listed block: decodes block new_ids[i] into
/// pool[slot_of[new_ids[i]] * 64, +64). Throws BoundsError when a listed
/// block has no slot or the slot lies outside the pool.
void gpu_decompress_blocks(Device& device, const DeviceVolume& volume, const Buffer<std::uint32_t>& new_ids,
                           std::size_t n_new, const Buffer<std::int32_t>& slot_of, Buffer<float>& pool);

} // namespace bcmc
