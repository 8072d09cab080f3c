#pragma once

// Device-resident LRU cache of decoded blocks.
//
// State per slot: age (frames since last use), resident block or -1.
// State per block: slot or -1. Slot s holds floats [64 s, 64 s + 64) of the
// pool. Every step of an update is a kernel or primitive over these buffers;
// the only host readbacks are n_new and n_avail.

#include "bcmc/device.hpp"
#include "bcmc/device_volume.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace bcmc {

inline constexpr std::uint32_t kAgeMax = 1u << 31;

struct CacheUpdateResult {
    std::uint32_t n_new = 0;
    std::uint32_t n_active = 0;
    bool grew = false;
    double hit_rate = 1.0;
};

/// Slot count after growth when n_new > n_avail.
std::uint32_t grown_slot_count(std::uint32_t slot_count, std::uint32_t n_new, std::uint32_t n_avail);

/// Slot count of a fresh cache; throws ParameterError unless 0 < fraction <= 1.
std::uint32_t initial_slot_count(std::uint32_t total_blocks, double fraction);

// Update kernels, exposed for backend-equivalence testing.

/// Saturating age increment; avail[s] = 1 for empty slots, 0 otherwise.
void increment_slot_age(Device& device, Buffer<std::uint32_t>& ages, const Buffer<std::int32_t>& slot_block,
                        Buffer<std::uint32_t>& avail, std::uint32_t slot_count);

void mark_new_blocks(Device& device, const Buffer<std::uint32_t>& active, const Buffer<std::int32_t>& block_slot,
                     Buffer<std::uint32_t>& ages, Buffer<std::uint32_t>& avail, Buffer<std::uint32_t>& new_mask,
                     std::uint32_t total_blocks);

/// Thread i moves new_ids[i] into slot sorted_slots[i], evicting its prior occupant.
void assign_slots(Device& device, const Buffer<std::uint32_t>& new_ids, const Buffer<std::uint32_t>& sorted_slots,
                  std::uint32_t n_new, Buffer<std::int32_t>& slot_block, Buffer<std::int32_t>& block_slot,
                  Buffer<std::uint32_t>& ages);

class BlockCache {
public:
    BlockCache(Device& device, const DeviceVolume& volume, double initial_fraction);

    /// `active` holds one 0/1 entry per block; `n_active` is its sum.
    CacheUpdateResult update(const Buffer<std::uint32_t>& active, std::uint32_t n_active);
    /// Host convenience: uploads the mask first.
    CacheUpdateResult update(std::span<const std::uint32_t> active);

    std::uint32_t slot_count() const { return slot_count_; }
    std::uint64_t pool_bytes() const { return std::uint64_t{slot_count_} * kBlockVoxels * sizeof(float); }

    const Buffer<std::int32_t>& block_slots() const { return block_slot_; }
    const Buffer<float>& pool() const { return pool_; }

    // Snapshots for inspection.
    std::vector<std::uint32_t> ages() const;
    std::vector<std::int32_t> slot_blocks() const;
    std::vector<std::int32_t> block_slot_map() const;
    std::vector<float> pool_data() const;

private:
    void grow(std::uint32_t new_count);

    Device& device_;
    const DeviceVolume& volume_;
    std::uint32_t total_;
    std::uint32_t slot_count_;

    Buffer<std::uint32_t> ages_;
    Buffer<std::int32_t> slot_block_;
    Buffer<std::int32_t> block_slot_;
    Buffer<float> pool_;

    Buffer<std::uint32_t> avail_;
    Buffer<std::uint32_t> avail_offsets_;
    Buffer<std::uint32_t> avail_ids_;
    Buffer<std::uint32_t> avail_ages_;

    Buffer<std::uint32_t> new_mask_;
    Buffer<std::uint32_t> new_offsets_;
    Buffer<std::uint32_t> new_ids_;
    Buffer<std::uint32_t> scan_total_;
};

} // namespace bcmc
